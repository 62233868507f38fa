#include "abstrip/asymptotics.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "abstrip/parallel.hpp"
#include "abstrip/rng.hpp"
#include "abstrip/stattest.hpp"

namespace abstrip {

namespace {

constexpr std::int64_t kBlock = std::int64_t{1} << 16;

void require_nondegenerate(const DerivedMoments& m) {
    if (!(m.p_theta > 0.0 && m.p_theta < 1.0))
        throw DegenerateScenario("p_theta must lie strictly between 0 and 1");
    if (!(m.m_eta > 0.0)) throw DegenerateScenario("m^eta must be positive");
}

void require_mixing(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DegenerateScenario("p must lie strictly between 0 and 1");
}

// Visits every draw of block `b` of the sub-stream scheme shared by the
// samplers below.
template <typename F>
void for_each_draw_in_block(const Eigen::Matrix3d& factor, std::uint64_t seed, std::int64_t block,
                            std::int64_t count, F&& visit) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(block)));
    std::normal_distribution<double> normal;
    const std::int64_t begin = block * kBlock;
    const std::int64_t end = std::min(count, begin + kBlock);
    for (std::int64_t i = begin; i < end; ++i) {
        Eigen::Vector3d z;
        z(0) = normal(rng);
        z(1) = normal(rng);
        z(2) = normal(rng);
        visit(i, Eigen::Vector3d(factor * z));
    }
}

std::int64_t block_count(std::int64_t count) { return (count + kBlock - 1) / kBlock; }

template <typename Pred>
McEstimate estimate_event(const GaussianLimit& g, std::int64_t iters, std::uint64_t seed, int threads,
                          Pred&& event) {
    if (iters < 1) throw std::invalid_argument("Monte Carlo needs at least one iteration");
    const auto blocks = block_count(iters);
    std::vector<std::int64_t> hits(static_cast<std::size_t>(blocks), 0);
    parallel_for(blocks, threads, [&](std::int64_t b) {
        std::int64_t local = 0;
        for_each_draw_in_block(g.sqrt_cov, seed, b, iters, [&](std::int64_t, const Eigen::Vector3d& draw) {
            if (event(draw)) ++local;
        });
        hits[static_cast<std::size_t>(b)] = local;
    });
    std::int64_t total = 0;
    for (auto h : hits) total += h;
    McEstimate out;
    out.estimate = static_cast<double>(total) / static_cast<double>(iters);
    out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(iters));
    return out;
}

}  // namespace

double noncentrality(const DerivedMoments& m, double p, double d_inf) {
    require_nondegenerate(m);
    return d_inf * (m.p0 - m.p1) * std::sqrt(p * (1.0 - p)) / (m.m_eta * std::sqrt(m.p_theta * (1.0 - m.p_theta)));
}

double asym_reject_prob(double delta, double alpha) {
    const double root_q = std::sqrt(chi2_1df_quantile(1.0 - alpha));
    // 1 - Phi(root_q - delta) written as Phi(delta - root_q) to keep the tail accurate.
    return std_normal_cdf(delta - root_q) + std_normal_cdf(-root_q - delta);
}

GaussianLimit make_gaussian_limit(const Eigen::Vector4d& drift, const Eigen::Matrix3d& cov) {
    GaussianLimit g;
    g.drift = drift;
    g.cov = cov;
    g.sqrt_cov = psd_factor<3>(cov);
    return g;
}

GaussianLimit make_gaussian_limit(const DerivedMoments& m, double p, double d_inf) {
    const auto [d2, d3] = drift(m, p, d_inf);
    return make_gaussian_limit(Eigen::Vector4d(0.0, 0.0, d2, d3), build_v1(m, p));
}

Eigen::Matrix3Xd sample_gaussian_limit(const GaussianLimit& g, std::uint64_t seed, std::int64_t count, int threads) {
    if (count < 0) throw std::invalid_argument("sample count must be non-negative");
    Eigen::Matrix3Xd out(3, count);
    parallel_for(block_count(count), threads, [&](std::int64_t b) {
        for_each_draw_in_block(g.sqrt_cov, seed, b, count,
                               [&](std::int64_t i, const Eigen::Vector3d& draw) { out.col(i) = draw; });
    });
    return out;
}

double limit_chi2_sample(const Eigen::Vector3d& g, double d2, double d3, double p, double p_theta) {
    if (!(p_theta > 0.0 && p_theta < 1.0)) throw DegenerateScenario("p_theta must lie strictly between 0 and 1");
    require_mixing(p);
    const double total = d2 + d3 + g(1) + g(2);
    const double arm0 = d2 + g(1) - p_theta * g(0) - (1.0 - p) * total;
    const double arm1 = d3 + g(2) + p_theta * g(0) - p * total;
    const double scale = (1.0 - p_theta) * p_theta;
    return arm0 * arm0 / (scale * (1.0 - p)) + arm1 * arm1 / (scale * p);
}

bool limit_arm0_ahead(const Eigen::Vector3d& g, double d2, double d3, double p, double p_theta) {
    return -p_theta * g(0) + p * (d2 + g(1)) - (1.0 - p) * (d3 + g(2)) > 0.0;
}

McEstimate asym_power_mc(const DerivedMoments& m, double p, double d_inf, double alpha, std::int64_t iters,
                         std::uint64_t seed, int threads) {
    require_nondegenerate(m);
    require_mixing(p);
    const auto g = make_gaussian_limit(m, p, d_inf);
    const double q = chi2_1df_quantile(1.0 - alpha);
    const double d2 = g.drift(2), d3 = g.drift(3), pt = m.p_theta;
    return estimate_event(g, iters, seed, threads, [&](const Eigen::Vector3d& draw) {
        return limit_chi2_sample(draw, d2, d3, p, pt) > q && limit_arm0_ahead(draw, d2, d3, p, pt);
    });
}

McEstimate asym_reject_mc(const DerivedMoments& m, double p, double d_inf, double alpha, std::int64_t iters,
                          std::uint64_t seed, int threads) {
    require_nondegenerate(m);
    require_mixing(p);
    const auto g = make_gaussian_limit(m, p, d_inf);
    const double q = chi2_1df_quantile(1.0 - alpha);
    const double d2 = g.drift(2), d3 = g.drift(3), pt = m.p_theta;
    return estimate_event(g, iters, seed, threads, [&](const Eigen::Vector3d& draw) {
        return limit_chi2_sample(draw, d2, d3, p, pt) > q;
    });
}

}  // namespace abstrip
