#include "abstrip/stattest.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace abstrip;

namespace {

// n (L0 (N1 - L1) - L1 (N0 - L0))^2 / (N0 N1 L (n - L))
double shortcut_chi2(const ContingencyTable& t) {
    const long double n = t.n0 + t.n1, l = t.l0 + t.l1;
    const long double cross = (long double)t.l0 * (t.n1 - t.l1) - (long double)t.l1 * (t.n0 - t.l0);
    return static_cast<double>(n * cross * cross / ((long double)t.n0 * t.n1 * l * (n - l)));
}

}  // namespace

TEST(Chi2Statistic, KnownTable) {
    // 10/100 vs 20/100: pooled rate 0.15.
    const auto chi2 = chi2_statistic({10, 20, 100, 100});
    ASSERT_TRUE(chi2);
    EXPECT_NEAR(*chi2, 200.0 * 1000 * 1000 / (100.0 * 100 * 30 * 170), 1e-12);
}

TEST(Chi2Statistic, MatchesShortcutFormula) {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 2000; ++trial) {
        std::uniform_int_distribution<std::int64_t> size(1, 2'000'000);
        ContingencyTable t;
        t.n0 = size(gen);
        t.n1 = size(gen);
        t.l0 = std::uniform_int_distribution<std::int64_t>(0, t.n0)(gen);
        t.l1 = std::uniform_int_distribution<std::int64_t>(0, t.n1)(gen);
        const auto chi2 = chi2_statistic(t);
        const auto l = t.l0 + t.l1;
        if (l == 0 || l == t.n0 + t.n1) {
            EXPECT_FALSE(chi2);
            continue;
        }
        ASSERT_TRUE(chi2);
        const double ref = shortcut_chi2(t);
        EXPECT_NEAR(*chi2, ref, 1e-9 * std::max(1.0, ref));
    }
}

TEST(Chi2Statistic, SymmetricInArms) {
    const auto a = chi2_statistic({37, 81, 1000, 1300});
    const auto b = chi2_statistic({81, 37, 1300, 1000});
    ASSERT_TRUE(a && b);
    EXPECT_NEAR(*a, *b, 1e-12);
}

TEST(Chi2Statistic, UndefinedCases) {
    EXPECT_FALSE(chi2_statistic({0, 0, 10, 10}));
    EXPECT_FALSE(chi2_statistic({10, 10, 10, 10}));
    EXPECT_FALSE(chi2_statistic({3, 0, 10, 0}));
    EXPECT_FALSE(chi2_statistic({0, 3, 0, 10}));
    EXPECT_FALSE(rejects(std::nullopt, 0.0));
    EXPECT_FALSE(chi2_p_value(std::nullopt));
}

TEST(Chi2Statistic, EqualRatesGiveZero) {
    const auto chi2 = chi2_statistic({5, 10, 100, 200});
    ASSERT_TRUE(chi2);
    EXPECT_NEAR(*chi2, 0.0, 1e-12);
}

TEST(Chi2Statistic, RejectsBadCounts) {
    EXPECT_THROW(chi2_statistic({11, 0, 10, 10}), std::invalid_argument);
    EXPECT_THROW(chi2_statistic({-1, 0, 10, 10}), std::invalid_argument);
}

TEST(Chi2Distribution, QuantileAgainstQuadrature) {
    const long double ref = oracle::chi2_1df_quantile(0.95L);
    EXPECT_NEAR(static_cast<double>(ref), 3.8414588207, 1e-8);
    EXPECT_NEAR(chi2_1df_quantile(0.95), 3.8414588207, 1e-8);
    EXPECT_NEAR(chi2_1df_quantile(0.95), static_cast<double>(ref), 1e-9);
}

TEST(Chi2Distribution, SurvivalAgainstQuadrature) {
    for (double x : {0.0, 1e-6, 0.01, 0.5, 1.0, 2.0, 3.841458820694124, 6.0, 10.0, 20.0})
        EXPECT_NEAR(chi2_1df_sf(x), static_cast<double>(oracle::chi2_1df_sf(x)), 1e-12) << x;
    EXPECT_THROW(chi2_1df_sf(-1.0), std::domain_error);
}

TEST(Chi2Distribution, QuantileInvertsSurvival) {
    for (double prob : {0.01, 0.1, 0.5, 0.9, 0.95, 0.99, 0.999})
        EXPECT_NEAR(chi2_1df_sf(chi2_1df_quantile(prob)), 1.0 - prob, 1e-13);
    EXPECT_THROW(chi2_1df_quantile(0.0), std::domain_error);
    EXPECT_THROW(chi2_1df_quantile(1.0), std::domain_error);
}

TEST(NormalDistribution, CdfAgainstQuadrature) {
    const double points[] = {-8.0, -6.0, -5.0, -4.0, -3.0, -2.5, -2.0, -1.5, -1.0, -0.5,
                             0.0,  0.25, 0.5,  1.0,  1.5,  1.96, 2.5,  3.0,  4.5,  7.0};
    for (double x : points) EXPECT_NEAR(std_normal_cdf(x), static_cast<double>(oracle::normal_cdf(x)), 1e-12) << x;
}

TEST(NormalDistribution, QuantileInvertsCdf) {
    EXPECT_NEAR(std_normal_quantile(0.975), 1.959963984540054, 1e-12);
    EXPECT_NEAR(std_normal_quantile(0.5), 0.0, 1e-14);
    for (double prob : {1e-10, 0.001, 0.3, 0.7, 0.999}) EXPECT_NEAR(std_normal_cdf(std_normal_quantile(prob)), prob, 1e-14);
}
