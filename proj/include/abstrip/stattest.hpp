#pragma once

#include <cstdint>
#include <optional>

namespace abstrip {

/// 2x2 table of purchases by arm.
struct ContingencyTable {
    std::int64_t l0 = 0;  ///< purchases in arm 0
    std::int64_t l1 = 0;  ///< purchases in arm 1
    std::int64_t n0 = 0;  ///< visitors of arm 0
    std::int64_t n1 = 0;  ///< visitors of arm 1
};

/// Pearson's chi-squared statistic of the table as the four-term sum of
/// (observed - expected)^2 / expected. Empty when an expected count is zero,
/// i.e. L = 0, L = n, N0 = 0 or N1 = 0. Throws std::invalid_argument if
/// L_i > N_i or a count is negative.
std::optional<double> chi2_statistic(const ContingencyTable& t);

/// Upper tail of the chi-squared law with one degree of freedom,
/// erfc(sqrt(x / 2)). Throws std::domain_error for x < 0.
double chi2_1df_sf(double x);

/// x with chi2_1df_sf(x) = 1 - prob, by bracketed bisection on the survival
/// function. prob must lie in (0, 1).
double chi2_1df_quantile(double prob);

double std_normal_cdf(double x);

/// Bracketed root of std_normal_cdf(x) = prob for prob in (0, 1).
double std_normal_quantile(double prob);

/// p-value of the statistic, or empty when the statistic is undefined.
inline std::optional<double> chi2_p_value(const std::optional<double>& chi2) {
    if (!chi2) return std::nullopt;
    return chi2_1df_sf(*chi2);
}

/// Rejection rule chi^2 > q (strict). Undefined statistics never reject.
inline bool rejects(const std::optional<double>& chi2, double critical_value) {
    return chi2 && *chi2 > critical_value;
}

}  // namespace abstrip
