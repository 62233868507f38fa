#include "abstrip/alias_table.hpp"

#include <numeric>
#include <stdexcept>

namespace abstrip {

AliasTable::AliasTable(std::span<const double> weights)
    : cutoff_(weights.size(), 1.0), alias_(weights.size()) {
    if (weights.empty()) throw std::invalid_argument("AliasTable: no weights");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("AliasTable: negative or NaN weight");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("AliasTable: weights sum to zero");

    const auto k = weights.size();
    std::vector<double> scaled(k);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < k; ++i) {
        scaled[i] = weights[i] * static_cast<double>(k) / total;
        (scaled[i] < 1.0 ? small : large).push_back(i);
        alias_[i] = i;
    }
    while (!small.empty() && !large.empty()) {
        const auto s = small.back();
        small.pop_back();
        const auto l = large.back();
        cutoff_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    // Leftovers are 1 up to rounding.
    for (auto i : small) cutoff_[i] = 1.0;
    for (auto i : large) cutoff_[i] = 1.0;
}

double AliasTable::probability(std::size_t index) const {
    const auto k = static_cast<double>(cutoff_.size());
    double mass = cutoff_.at(index);
    for (std::size_t j = 0; j < cutoff_.size(); ++j)
        if (j != index && alias_[j] == index) mass += 1.0 - cutoff_[j];
    return mass / k;
}

}  // namespace abstrip
