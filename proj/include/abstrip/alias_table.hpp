#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "abstrip/rng.hpp"

namespace abstrip {

/// Walker/Vose alias table over indices [0, size). Build is O(K), each draw
/// costs one uniform.
class AliasTable {
public:
    AliasTable() = default;
    /// `weights` must be non-negative with a positive sum; they are normalized.
    explicit AliasTable(std::span<const double> weights);

    std::size_t size() const noexcept { return cutoff_.size(); }

    std::size_t sample(Rng& rng) const noexcept {
        const double scaled = rng.uniform() * static_cast<double>(cutoff_.size());
        auto column = static_cast<std::size_t>(scaled);
        if (column >= cutoff_.size()) column = cutoff_.size() - 1;
        return (scaled - static_cast<double>(column)) < cutoff_[column] ? column : alias_[column];
    }

    /// Probability that sample() returns `index`, reconstructed from the table.
    double probability(std::size_t index) const;

private:
    std::vector<double> cutoff_;
    std::vector<std::size_t> alias_;
};

}  // namespace abstrip
