#include "abstrip/asymptotics.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "abstrip/scenarios.hpp"
#include "abstrip/stattest.hpp"
#include "oracles.hpp"

using namespace abstrip;
using oracle::Rational;

namespace {

BasicDerivedMoments<Rational> exact_moments(const char* id) {
    return derive_moments(get_scenario(id).source.instantiate<Rational>());
}

Rational half() { return Rational(1, 2); }

}  // namespace

TEST(Slln, RankingRatesExact) {
    const auto m = exact_moments("ranking");
    const auto lim = slln_limits(m, half(), Rational(0));
    EXPECT_EQ(lim.l0_rate, Rational(1, 40));
    EXPECT_EQ(lim.l1_rate, Rational(1, 40));
    EXPECT_EQ(lim.c0, Rational(1, 20));
    EXPECT_EQ(lim.c1, Rational(1, 20));
}

TEST(Slln, SubAndSupercritical) {
    const auto m = exact_moments("ranking");
    // c_inf = 10 < 1/0.042: rate (1-p) p_theta + c_inf (1-p)(p0 - p_theta)/m^eta.
    const auto sub = slln_limits(m, half(), Rational(10));
    EXPECT_EQ(sub.l0_rate, Rational(Rational(1, 40) + Rational(10) * half() * Rational(2, 1000) / Rational(42, 1000)));
    const auto super = slln_limits(m, half(), Rational(100));
    EXPECT_EQ(super.l0_rate, Rational(half() * Rational(52, 1000)));
    EXPECT_EQ(super.c1, Rational(9, 100));
    EXPECT_THROW(slln_limits(m, half(), Rational(1000, 42)), UnsupportedRegime);
    EXPECT_THROW(slln_limits(m, half(), Rational(-1)), std::domain_error);
}

TEST(Slln, NoSelloutWithoutDemand) {
    auto s = get_scenario("ranking").scenario;
    s.mu0.atoms = {{0, 0, 0.95}, {1, 0, 0.05}};
    s.mu1 = s.mu0;
    const auto lim = slln_limits(derive_moments(s), 0.5, 0.0);
    EXPECT_NEAR(lim.c0, 0.05, 1e-15);
    EXPECT_THROW(drift(derive_moments(s), 0.5, 0.5), DegenerateScenario);
}

TEST(Drift, RankingExact) {
    const auto [d2, d3] = drift(exact_moments("ranking"), half(), half());
    EXPECT_EQ(d2, Rational(1, 84));
    EXPECT_EQ(d3, Rational(5, 21));
}

TEST(MarginalLimit, PickyExact) {
    const auto m = exact_moments("picky");
    const auto [mean0, var0] = marginal_conv_rate_limit(m, 0, half());
    const auto [mean1, var1] = marginal_conv_rate_limit(m, 1, half());
    EXPECT_EQ(mean0, Rational(349, 896));
    EXPECT_EQ(mean1, Rational(223, 842));
    EXPECT_GT(mean0, mean1);
    EXPECT_EQ(var0, Rational(m.p_theta * (1 - m.p_theta)));
    EXPECT_EQ(var1, var0);
    EXPECT_THROW(marginal_conv_rate_limit(m, 2, half()), std::invalid_argument);
}

TEST(MarginalLimit, RankingExact) {
    const auto m = exact_moments("ranking");
    EXPECT_EQ(marginal_conv_rate_limit(m, 0, half()).first, Rational(1, 4));
    EXPECT_EQ(marginal_conv_rate_limit(m, 1, half()).first, Rational(1, 4));
}

TEST(Covariance, SevenByMatchesEnumeration) {
    for (const auto& id : scenario_ids()) {
        const auto s = get_scenario(id).source.instantiate<Rational>();
        const auto v = build_v(derive_moments(s), s.p);
        const auto ref = oracle::increment_covariance(s);
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j) EXPECT_EQ(v(i, j), ref(i, j)) << id << " (" << i << "," << j << ")";
    }
}

TEST(Covariance, SevenByMatchesEnumerationRandom) {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 25; ++trial) {
        auto pmf = [&](int atoms, bool eta) {
            BasicOfferDistribution<Rational> d;
            std::vector<int> w(atoms);
            int total = 0;
            for (auto& x : w) total += (x = std::uniform_int_distribution<int>(1, 9)(gen));
            for (int i = 0; i < atoms; ++i)
                d.atoms.push_back({i % 3, eta ? i / 3 : 0, Rational(w[i], total)});
            return d;
        };
        BasicScenario<Rational> s;
        s.p = Rational(std::uniform_int_distribution<int>(1, 9)(gen), 10);
        s.q = 1;
        s.mu0 = pmf(std::uniform_int_distribution<int>(2, 9)(gen), true);
        s.mu1 = pmf(std::uniform_int_distribution<int>(2, 9)(gen), true);
        s.nu = pmf(3, false);
        const auto v = build_v(derive_moments(s), s.p);
        const auto ref = oracle::increment_covariance(s);
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j) ASSERT_EQ(v(i, j), ref(i, j)) << trial << " (" << i << "," << j << ")";
    }
}

TEST(Covariance, SelectorGivesV1) {
    for (const auto& id : scenario_ids()) {
        const auto s = get_scenario(id).source.instantiate<Rational>();
        const auto m = derive_moments(s);
        const auto sel = limit_selector<Rational>();
        const auto v = build_v(m, s.p);
        Matrix3<Rational> projected;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                Rational acc = 0;
                for (int k = 0; k < 7; ++k)
                    for (int l = 0; l < 7; ++l) acc += sel(i, k) * v(k, l) * sel(j, l);
                projected(i, j) = acc;
            }
        const auto v1 = build_v1(m, s.p);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) EXPECT_EQ(projected(i, j), v1(i, j)) << id;
    }
}

// p_theta G1 - p G2 + (1-p) G3 has variance p_theta (1 - p_theta) p (1 - p).
TEST(Covariance, ContrastVarianceIdentity) {
    for (const auto& id : scenario_ids()) {
        const auto s = get_scenario(id).source.instantiate<Rational>();
        const auto m = derive_moments(s);
        const Rational a[3] = {m.p_theta, Rational(-s.p), Rational(1 - s.p)};
        const auto v1 = build_v1(m, s.p);
        Rational var = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) var += a[i] * v1(i, j) * a[j];
        EXPECT_EQ(var, Rational(m.p_theta * (1 - m.p_theta) * s.p * (1 - s.p))) << id;
    }
}

TEST(PsdFactor, ReconstructsV1) {
    for (const auto& id : scenario_ids()) {
        const auto& named = get_scenario(id);
        const auto v1 = build_v1(derive_moments(named.scenario), named.scenario.p);
        const auto f = psd_factor<3>(v1);
        EXPECT_LT((f * f.transpose() - v1).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(PsdFactor, SingularAndInvalid) {
    Eigen::Matrix3d rank_one = Eigen::Vector3d(1, 2, 3) * Eigen::Vector3d(1, 2, 3).transpose();
    const auto f = psd_factor<3>(rank_one);
    EXPECT_LT((f * f.transpose() - rank_one).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((psd_factor<3>(Eigen::Matrix3d::Zero())).cwiseAbs().maxCoeff(), 1e-300);
    Eigen::Matrix3d indefinite = Eigen::Matrix3d::Identity();
    indefinite(2, 2) = -1.0;
    EXPECT_THROW(psd_factor<3>(indefinite), FactorizationError);
    Eigen::Matrix3d asym = Eigen::Matrix3d::Identity();
    asym(0, 1) = 0.5;
    EXPECT_THROW(psd_factor<3>(asym), FactorizationError);
}

TEST(Noncentrality, BuiltinValues) {
    const auto& ranking = get_scenario("ranking");
    const auto mr = derive_moments(ranking.scenario);
    EXPECT_NEAR(noncentrality(mr, 0.5, 0.5), -5.0 * std::sqrt(19.0) / 21.0, 1e-12);
    EXPECT_NEAR(noncentrality(mr, 0.5, 0.5), -1.037833, 1e-6);
    EXPECT_EQ(noncentrality(mr, 0.5, 0.0), 0.0);
    const auto mp = derive_moments(get_scenario("picky").scenario);
    EXPECT_NEAR(std::abs(noncentrality(mp, 0.5, 0.5)), 0.930852, 1e-6);
}

// delta^2 equals the squared limiting mean of the corollary numerator
// pt G1 - p G2 + (1-p) G3 - (p d2 - (1-p) d3) over its variance.
TEST(Noncentrality, AgreesWithDriftForm) {
    for (const char* id : {"ranking", "picky"}) {
        const auto m = derive_moments(get_scenario(id).scenario);
        for (double p : {0.2, 0.5, 0.7}) {
            for (double d : {0.1, 0.5, 2.0}) {
                const auto [d2, d3] = drift(m, p, d);
                const double shift = p * d2 - (1.0 - p) * d3;
                const double sd = std::sqrt(m.p_theta * (1.0 - m.p_theta) * p * (1.0 - p));
                EXPECT_NEAR(std::abs(noncentrality(m, p, d)), std::abs(shift) / sd, 1e-12) << id;
            }
        }
    }
}

TEST(Noncentrality, DegenerateScenario) {
    auto s = get_scenario("ranking").scenario;
    s.nu.atoms = {{1, 0, 1.0}};
    EXPECT_THROW(noncentrality(derive_moments(s), 0.5, 0.5), DegenerateScenario);
}

TEST(RejectProb, ClosedForm) {
    EXPECT_NEAR(asym_reject_prob(-1.037833081795, 0.05), 0.1795898, 1e-6);
    EXPECT_NEAR(asym_reject_prob(0.0, 0.05), 0.05, 1e-10);
    EXPECT_NEAR(asym_reject_prob(0.0, 0.01), 0.01, 1e-10);
    for (double d : {0.1, 0.7, 1.3, 4.0}) EXPECT_EQ(asym_reject_prob(d, 0.05), asym_reject_prob(-d, 0.05));
    double prev = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double v = asym_reject_prob(0.1 * i, 0.05);
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_NEAR(asym_reject_prob(10.0, 0.05), 1.0, 1e-12);
}

// P((Z - delta)^2 > q) by quadrature of the normal density off [delta - r, delta + r].
TEST(RejectProb, AgainstQuadrature) {
    const long double root_q = std::sqrt(oracle::chi2_1df_quantile(0.95L));
    for (double d : {0.0, 0.3, 1.037833, 2.5}) {
        const long double inside = oracle::integrate(oracle::normal_density, d - root_q, d + root_q);
        EXPECT_NEAR(asym_reject_prob(d, 0.05), static_cast<double>(1 - inside), 1e-12) << d;
    }
}

TEST(GaussianLimit, SampleCovariance) {
    const auto& named = get_scenario("ranking");
    const auto m = derive_moments(named.scenario);
    const auto g = make_gaussian_limit(m, 0.5, 0.5);
    const auto draws = sample_gaussian_limit(g, 4, 400'000);
    const Eigen::Vector3d mean = draws.rowwise().mean();
    const Eigen::MatrixXd centered = draws.colwise() - mean;
    const Eigen::Matrix3d cov = centered * centered.transpose() / (draws.cols() - 1.0);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(mean(i), 0.0, 4.0 * std::sqrt(g.cov(i, i) / draws.cols()));
        for (int j = 0; j < 3; ++j) {
            const double se = std::sqrt((g.cov(i, i) * g.cov(j, j) + g.cov(i, j) * g.cov(i, j)) / draws.cols());
            EXPECT_NEAR(cov(i, j), g.cov(i, j), 4.0 * se);
        }
    }
}

TEST(GaussianLimit, ThreadCountDoesNotMatter) {
    const auto m = derive_moments(get_scenario("picky").scenario);
    const auto g = make_gaussian_limit(m, 0.5, 0.5);
    const auto a = sample_gaussian_limit(g, 99, 200'000, 1);
    const auto b = sample_gaussian_limit(g, 99, 200'000, 4);
    EXPECT_TRUE(a == b);
    const auto pa = asym_power_mc(m, 0.5, 0.5, 0.05, 150'000, 5, 1);
    const auto pb = asym_power_mc(m, 0.5, 0.5, 0.05, 150'000, 5, 3);
    EXPECT_EQ(pa.estimate, pb.estimate);
}

TEST(GaussianLimit, TwoFractionFormMatchesCorollary) {
    // chi^2 limit equals X^2 / (p_theta (1 - p_theta) p (1 - p)).
    std::mt19937_64 gen(17);
    std::normal_distribution<double> z;
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Vector3d g(z(gen), z(gen), z(gen));
        const double p = 0.3, pt = 0.07, d2 = 0.2, d3 = 0.5;
        const double x = pt * g(0) - p * g(1) + (1 - p) * g(2) - (p * d2 - (1 - p) * d3);
        EXPECT_NEAR(limit_chi2_sample(g, d2, d3, p, pt), x * x / (pt * (1 - pt) * p * (1 - p)), 1e-9);
    }
}

TEST(GaussianLimit, MonteCarloRejectMatchesClosedForm) {
    const auto m = derive_moments(get_scenario("ranking").scenario);
    const auto est = asym_reject_mc(m, 0.5, 0.5, 0.05, 500'000, 21);
    EXPECT_NEAR(est.estimate, 0.1795898, 3.5 * est.std_error);
}

TEST(GaussianLimit, PickyPowerIsSmall) {
    const auto m = derive_moments(get_scenario("picky").scenario);
    const auto est = asym_power_mc(m, 0.5, 0.5, 0.05, 1'000'000, 8);
    EXPECT_NEAR(est.estimate, 0.001933, 5e-4);
    EXPECT_THROW(asym_power_mc(m, 0.5, 0.5, 0.05, 0, 8), std::invalid_argument);
}
