#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace abstrip {

/// One point (x units of good 1, y units of good 2) of an offer pmf.
template <typename Scalar>
struct Atom {
    std::int64_t x = 0;
    std::int64_t y = 0;
    Scalar prob{};
};

/// Finite pmf on pairs of non-negative integers. Houses mu0, mu1 and, with all
/// y = 0, the post-sellout law nu.
template <typename Scalar>
struct BasicOfferDistribution {
    std::vector<Atom<Scalar>> atoms;
};

/// Inventory of the rare good for n visitors: c(n) = floor(d * n^rho).
struct InventorySchedule {
    double d = 0.5;
    double rho = 0.5;

    std::int64_t inventory(std::int64_t n) const {
        if (n <= 0) return 0;
        // Nudge so that exact products such as 0.5 * sqrt(4e6) = 1000 are not
        // floored to 999 by a one-ulp undershoot of pow().
        const double raw = d * std::pow(static_cast<double>(n), rho);
        return static_cast<std::int64_t>(std::floor(raw * (1.0 + 4e-16) + 1e-9));
    }
};

template <typename Scalar>
struct BasicScenario {
    Scalar p{};  ///< probability that a visitor is shown arm 1
    Scalar q{};  ///< probability of buying the remainder on an overshooting order
    BasicOfferDistribution<Scalar> mu0;
    BasicOfferDistribution<Scalar> mu1;
    BasicOfferDistribution<Scalar> nu;
    InventorySchedule schedule;
};

/// Every moment of the offer laws that the limit theorems consume. The
/// second-order quantities are the true central moments of the mixture
/// mu_p = p mu1 + (1 - p) mu0.
template <typename Scalar>
struct BasicDerivedMoments {
    Scalar m0_xi{}, m0_eta{};
    Scalar m1_xi{}, m1_eta{};
    Scalar m_xi{}, m_eta{};
    Scalar p0{}, p1{}, p_theta{};
    Scalar sigma_xi2{}, sigma_eta2{}, rho_xieta{};
    Scalar m_theta{}, sigma_theta2{};
};

using OfferDistribution = BasicOfferDistribution<double>;
using Scenario = BasicScenario<double>;
using DerivedMoments = BasicDerivedMoments<double>;

struct Violation {
    std::string field;
    std::string rule;
};

class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : std::invalid_argument(describe(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string describe(const std::vector<Violation>& vs) {
        std::string out = "invalid scenario:";
        for (const auto& v : vs) out += " [" + v.field + ": " + v.rule + "]";
        return out;
    }

    std::vector<Violation> violations_;
};

namespace detail {

/// Neumaier-compensated accumulator; plain addition for exact scalar types.
template <typename Scalar>
class Accumulator {
public:
    void add(const Scalar& v) {
        if constexpr (std::is_floating_point_v<Scalar>) {
            const Scalar t = sum_ + v;
            if (std::abs(sum_) >= std::abs(v))
                comp_ += (sum_ - t) + v;
            else
                comp_ += (v - t) + sum_;
            sum_ = t;
        } else {
            sum_ += v;
        }
    }
    Scalar value() const {
        if constexpr (std::is_floating_point_v<Scalar>)
            return sum_ + comp_;
        else
            return sum_;
    }

private:
    Scalar sum_{0};
    Scalar comp_{0};
};

template <typename Scalar, typename F>
Scalar sum_over(const BasicOfferDistribution<Scalar>& dist, F&& weight_of) {
    Accumulator<Scalar> acc;
    for (const auto& a : dist.atoms) acc.add(weight_of(a));
    return acc.value();
}

template <typename Scalar>
Scalar abs_value(const Scalar& v) {
    return v < Scalar(0) ? Scalar(-v) : v;
}

template <typename Scalar>
void check_distribution(const BasicOfferDistribution<Scalar>& dist, const std::string& name,
                        std::vector<Violation>& out) {
    if (dist.atoms.empty()) {
        out.push_back({name, "has no atoms"});
        return;
    }
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    bool coords_ok = true, probs_ok = true, distinct = true;
    for (const auto& a : dist.atoms) {
        if (a.x < 0 || a.y < 0) coords_ok = false;
        if (!(a.prob >= Scalar(0)) || a.prob > Scalar(1)) probs_ok = false;
        if (!seen.emplace(a.x, a.y).second) distinct = false;
    }
    if (!coords_ok) out.push_back({name, "atom coordinates must be non-negative integers"});
    if (!probs_ok) out.push_back({name, "atom probabilities must lie in [0, 1]"});
    if (!distinct) out.push_back({name, "atoms must be pairwise distinct"});
    const Scalar total = sum_over(dist, [](const auto& a) -> Scalar { return a.prob; });
    const Scalar tol = Scalar(1) / Scalar(1000000000000LL);
    if (!(abs_value(Scalar(total - Scalar(1))) <= tol))
        out.push_back({name, "probabilities must sum to 1 within 1e-12"});
}

}  // namespace detail

/// Every violated invariant of `s`; empty iff the scenario is valid.
template <typename Scalar>
std::vector<Violation> validate_scenario(const BasicScenario<Scalar>& s) {
    std::vector<Violation> out;
    if (!(s.p > Scalar(0) && s.p < Scalar(1))) out.push_back({"p", "must lie in (0, 1)"});
    if (!(s.q >= Scalar(0) && s.q <= Scalar(1))) out.push_back({"q", "must lie in [0, 1]"});
    detail::check_distribution(s.mu0, "mu0", out);
    detail::check_distribution(s.mu1, "mu1", out);
    detail::check_distribution(s.nu, "nu", out);
    for (const auto& a : s.nu.atoms) {
        if (a.y != 0) {
            out.push_back({"nu", "atoms must have y = 0"});
            break;
        }
    }
    if (!(s.schedule.d > 0.0) || !std::isfinite(s.schedule.d))
        out.push_back({"schedule.d", "must be positive and finite"});
    if (!(s.schedule.rho > 0.0 && s.schedule.rho <= 1.0))
        out.push_back({"schedule.rho", "must lie in (0, 1]"});
    return out;
}

template <typename Scalar>
void require_valid(const BasicScenario<Scalar>& s) {
    auto v = validate_scenario(s);
    if (!v.empty()) throw ValidationError(std::move(v));
}

/// Non-binding notices: positivity of mu_i on {0,1}^2 is not required.
template <typename Scalar>
std::vector<std::string> positivity_warnings(const BasicScenario<Scalar>& s) {
    std::vector<std::string> out;
    auto check = [&](const BasicOfferDistribution<Scalar>& dist, const char* name) {
        for (std::int64_t x = 0; x <= 1; ++x)
            for (std::int64_t y = 0; y <= 1; ++y) {
                bool positive = false;
                for (const auto& a : dist.atoms)
                    if (a.x == x && a.y == y && a.prob > Scalar(0)) positive = true;
                if (!positive)
                    out.push_back(std::string(name) + " puts no mass on (" + std::to_string(x) +
                                  "," + std::to_string(y) + ")");
            }
    };
    check(s.mu0, "mu0");
    check(s.mu1, "mu1");
    return out;
}

/// Exact finite-pmf moments of a valid scenario.
template <typename Scalar>
BasicDerivedMoments<Scalar> derive_moments(const BasicScenario<Scalar>& s) {
    require_valid(s);
    using detail::sum_over;
    const Scalar one(1);
    const Scalar& p = s.p;
    BasicDerivedMoments<Scalar> m;

    m.m0_xi = sum_over(s.mu0, [](const auto& a) -> Scalar { return Scalar(a.x) * a.prob; });
    m.m0_eta = sum_over(s.mu0, [](const auto& a) -> Scalar { return Scalar(a.y) * a.prob; });
    m.m1_xi = sum_over(s.mu1, [](const auto& a) -> Scalar { return Scalar(a.x) * a.prob; });
    m.m1_eta = sum_over(s.mu1, [](const auto& a) -> Scalar { return Scalar(a.y) * a.prob; });
    m.m_xi = p * m.m1_xi + (one - p) * m.m0_xi;
    m.m_eta = p * m.m1_eta + (one - p) * m.m0_eta;

    auto no_purchase = [](const auto& a) -> Scalar { return (a.x == 0 && a.y == 0) ? a.prob : Scalar(0); };
    m.p0 = one - sum_over(s.mu0, no_purchase);
    m.p1 = one - sum_over(s.mu1, no_purchase);
    m.p_theta = one - sum_over(s.nu, [](const auto& a) -> Scalar { return a.x == 0 ? a.prob : Scalar(0); });

    // Central moments of the mixture, centered at the mixture mean.
    auto mixed = [&](auto&& f) -> Scalar {
        return p * sum_over(s.mu1, f) + (one - p) * sum_over(s.mu0, f);
    };
    m.sigma_xi2 = mixed([&](const auto& a) -> Scalar {
        const Scalar dx = Scalar(a.x) - m.m_xi;
        return a.prob * dx * dx;
    });
    m.sigma_eta2 = mixed([&](const auto& a) -> Scalar {
        const Scalar dy = Scalar(a.y) - m.m_eta;
        return a.prob * dy * dy;
    });
    m.rho_xieta = mixed([&](const auto& a) -> Scalar {
        return a.prob * (Scalar(a.x) - m.m_xi) * (Scalar(a.y) - m.m_eta);
    });

    m.m_theta = sum_over(s.nu, [](const auto& a) -> Scalar { return Scalar(a.x) * a.prob; });
    m.sigma_theta2 = sum_over(s.nu, [&](const auto& a) -> Scalar {
        const Scalar dx = Scalar(a.x) - m.m_theta;
        return a.prob * dx * dx;
    });
    return m;
}

/// Parses a finite decimal literal ("0.948", "1", "-2.5e-3" is rejected) into
/// Scalar as numerator / 10^k, exact for rational Scalar types.
template <typename Scalar>
Scalar exact_decimal(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty decimal literal");
    bool negative = false;
    if (text.front() == '-' || text.front() == '+') {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    Scalar numerator(0), denominator(1);
    bool seen_point = false, seen_digit = false;
    for (char c : text) {
        if (c == '.' && !seen_point) {
            seen_point = true;
        } else if (c >= '0' && c <= '9') {
            numerator = numerator * Scalar(10) + Scalar(c - '0');
            if (seen_point) denominator = denominator * Scalar(10);
            seen_digit = true;
        } else {
            throw std::invalid_argument("not a plain decimal literal: " + std::string(text));
        }
    }
    if (!seen_digit) throw std::invalid_argument("not a plain decimal literal: " + std::string(text));
    Scalar v = numerator / denominator;
    return negative ? Scalar(-v) : v;
}

/// Converts every probability of a scenario to another scalar type.
template <typename To, typename From>
BasicScenario<To> scenario_cast(const BasicScenario<From>& s) {
    auto conv = [](const From& v) -> To { return static_cast<To>(v); };
    auto dist = [&](const BasicOfferDistribution<From>& d) {
        BasicOfferDistribution<To> out;
        for (const auto& a : d.atoms) out.atoms.push_back({a.x, a.y, conv(a.prob)});
        return out;
    };
    return {conv(s.p), conv(s.q), dist(s.mu0), dist(s.mu1), dist(s.nu), s.schedule};
}

}  // namespace abstrip
