#include "abstrip/stattest.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace abstrip {

std::optional<double> chi2_statistic(const ContingencyTable& t) {
    if (t.l0 < 0 || t.l1 < 0 || t.n0 < 0 || t.n1 < 0)
        throw std::invalid_argument("chi2_statistic: negative count");
    if (t.l0 > t.n0 || t.l1 > t.n1)
        throw std::invalid_argument("chi2_statistic: more purchases than visitors in an arm");
    const std::int64_t n_total = t.n0 + t.n1;
    const std::int64_t l_total = t.l0 + t.l1;
    if (t.n0 == 0 || t.n1 == 0 || l_total == 0 || l_total == n_total) return std::nullopt;

    const double n = static_cast<double>(n_total);
    const double l = static_cast<double>(l_total);
    const double arm_sizes[2] = {static_cast<double>(t.n0), static_cast<double>(t.n1)};
    const double purchases[2] = {static_cast<double>(t.l0), static_cast<double>(t.l1)};
    double chi2 = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double share = arm_sizes[i] / n;
        const double bought_expected = l * share;
        const double idle_expected = (n - l) * share;
        const double bought_dev = purchases[i] - bought_expected;
        const double idle_dev = (arm_sizes[i] - purchases[i]) - idle_expected;
        chi2 += bought_dev * bought_dev / bought_expected + idle_dev * idle_dev / idle_expected;
    }
    return chi2;
}

double chi2_1df_sf(double x) {
    if (std::isnan(x) || x < 0.0) throw std::domain_error("chi2_1df_sf: x must be >= 0");
    return std::erfc(std::sqrt(0.5 * x));
}

namespace {

template <typename F>
double bisect(F&& decreasing_excess, double lo, double hi) {
    // Invariant: excess(lo) > 0 >= excess(hi).
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (decreasing_excess(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double chi2_1df_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0))
        throw std::domain_error("chi2_1df_quantile: prob must lie in (0, 1)");
    const double tail = 1.0 - prob;
    double hi = 1.0;
    while (chi2_1df_sf(hi) > tail) hi *= 2.0;
    return bisect([&](double x) { return chi2_1df_sf(x) - tail; }, 0.0, hi);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0))
        throw std::domain_error("std_normal_quantile: prob must lie in (0, 1)");
    double lo = -1.0, hi = 1.0;
    while (std_normal_cdf(lo) > prob) lo *= 2.0;
    while (std_normal_cdf(hi) <= prob) hi *= 2.0;
    // excess(x) = prob - cdf(x) is decreasing; flip so the helper sees lo > 0.
    return bisect([&](double x) { return prob - std_normal_cdf(x); }, lo, hi);
}

}  // namespace abstrip
