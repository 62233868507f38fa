#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "abstrip/model.hpp"

namespace abstrip {

/// The scenario makes a limit formula divide by zero (p_theta in {0, 1},
/// m^eta = 0, ...).
class DegenerateScenario : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The critical inventory regime c_inf = 1/m^eta, where no limit is known.
class UnsupportedRegime : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class FactorizationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Matrix7 = Eigen::Matrix<Scalar, 7, 7>;

// ---------------------------------------------------------------------------
// Scalar-generic closed forms. These are exact for rational Scalar types.
// ---------------------------------------------------------------------------

/// Almost-sure limits of L0/n, L1/n and of the conversion rates C0, C1.
template <typename Scalar>
struct SllnLimits {
    Scalar l0_rate{}, l1_rate{};
    Scalar c0{}, c1{};
};

/// Strong-law limits for inventory c_n ~ c_inf * n. With m^eta = 0 the
/// inventory is never sold out and the no-inventory rates apply.
template <typename Scalar>
SllnLimits<Scalar> slln_limits(const BasicDerivedMoments<Scalar>& m, const Scalar& p, const Scalar& c_inf) {
    if (c_inf < Scalar(0)) throw std::domain_error("slln_limits: c_inf must be >= 0");
    const Scalar one(1);
    SllnLimits<Scalar> out;
    const Scalar scaled = c_inf * m.m_eta;  // c_inf relative to the critical 1/m^eta
    bool critical;
    if constexpr (std::is_floating_point_v<Scalar>)
        critical = m.m_eta > Scalar(0) && std::abs(scaled - one) <= Scalar(1e-12);
    else
        critical = m.m_eta > Scalar(0) && scaled == one;
    if (critical) throw UnsupportedRegime("slln_limits: c_inf = 1/m^eta is the critical regime");

    if (m.m_eta == Scalar(0) || scaled > one) {
        out.l0_rate = (one - p) * m.p0;
        out.l1_rate = p * m.p1;
    } else {
        out.l0_rate = (one - p) * m.p_theta + c_inf * (one - p) * (m.p0 - m.p_theta) / m.m_eta;
        out.l1_rate = p * m.p_theta + c_inf * p * (m.p1 - m.p_theta) / m.m_eta;
    }
    out.c0 = out.l0_rate / (one - p);
    out.c1 = out.l1_rate / p;
    return out;
}

/// Mean shifts (d2, d3) of the sqrt(n)-scaled purchase counts for
/// c_n ~ d_inf * sqrt(n).
template <typename Scalar>
std::pair<Scalar, Scalar> drift(const BasicDerivedMoments<Scalar>& m, const Scalar& p, const Scalar& d_inf) {
    if (!(m.m_eta > Scalar(0))) throw DegenerateScenario("drift: m^eta must be positive");
    const Scalar one(1);
    Scalar d2 = d_inf * (one - p) * (m.p0 - m.p_theta) / m.m_eta;
    Scalar d3 = d_inf * p * (m.p1 - m.p_theta) / m.m_eta;
    return {d2, d3};
}

/// Mean and variance of the limit of (L_n - n p_theta)/sqrt(n) when only arm
/// `arm` is shown.
template <typename Scalar>
std::pair<Scalar, Scalar> marginal_conv_rate_limit(const BasicDerivedMoments<Scalar>& m, int arm,
                                                   const Scalar& d_inf) {
    if (arm != 0 && arm != 1) throw std::invalid_argument("marginal_conv_rate_limit: arm must be 0 or 1");
    const Scalar& rate = arm == 0 ? m.p0 : m.p1;
    const Scalar& m_eta = arm == 0 ? m.m0_eta : m.m1_eta;
    if (!(m_eta > Scalar(0))) throw DegenerateScenario("marginal_conv_rate_limit: arm has m^eta = 0");
    Scalar mean = d_inf * (rate - m.p_theta) / m_eta;
    Scalar variance = m.p_theta * (Scalar(1) - m.p_theta);
    return {mean, variance};
}

/// Covariance V1 of (G1, G2, G3) in the joint limit of
/// ((N0 - (1-p)n)/sqrt(n), (L0 - n(1-p)p_theta)/sqrt(n), (L1 - n p p_theta)/sqrt(n)).
template <typename Scalar>
Matrix3<Scalar> build_v1(const BasicDerivedMoments<Scalar>& m, const Scalar& p) {
    const Scalar one(1);
    const Scalar& pt = m.p_theta;
    const Scalar pq = p * (one - p);
    Matrix3<Scalar> v;
    v(0, 0) = pq;
    v(0, 1) = pq * pt;
    v(0, 2) = -(pq * pt);
    v(1, 1) = pt * (one - p) * (one - pt * (one - p));
    v(1, 2) = -(pq * pt * pt);
    v(2, 2) = p * pt * (one - p * pt);
    v(1, 0) = v(0, 1);
    v(2, 0) = v(0, 2);
    v(2, 1) = v(1, 2);
    return v;
}

/// Covariance of the per-visitor increment
/// (1{xi+eta>0, I=0}, 1{xi+eta>0, I=1}, I, xi, eta, 1{theta>0, I=0}, 1{theta>0, I=1}).
template <typename Scalar>
Matrix7<Scalar> build_v(const BasicDerivedMoments<Scalar>& m, const Scalar& p) {
    const Scalar one(1);
    const Scalar q = one - p;  // probability of arm 0
    const Scalar& p0 = m.p0;
    const Scalar& p1 = m.p1;
    const Scalar& pt = m.p_theta;
    Matrix7<Scalar> v;
    // Upper triangle, row by row.
    v(0, 0) = p0 * q * (one - p0 * q);
    v(0, 1) = -(p0 * p1 * p * q);
    v(0, 2) = -(p0 * q * p);
    v(0, 3) = q * (m.m0_xi - m.m_xi * p0);
    v(0, 4) = q * (m.m0_eta - m.m_eta * p0);
    v(0, 5) = p0 * q * p * pt;
    v(0, 6) = -(p0 * p * q * pt);

    v(1, 1) = p * p1 * (one - p * p1);
    v(1, 2) = p * p1 * q;
    v(1, 3) = p * (m.m1_xi - p1 * m.m_xi);
    v(1, 4) = p * (m.m1_eta - p1 * m.m_eta);
    v(1, 5) = -(p1 * p * q * pt);
    v(1, 6) = p * p1 * q * pt;

    v(2, 2) = p * q;
    v(2, 3) = p * (m.m1_xi - m.m_xi);
    v(2, 4) = p * (m.m1_eta - m.m_eta);
    v(2, 5) = -(p * q * pt);
    v(2, 6) = p * q * pt;

    v(3, 3) = m.sigma_xi2;
    v(3, 4) = m.rho_xieta;
    v(3, 5) = q * pt * (m.m0_xi - m.m_xi);
    v(3, 6) = p * pt * (m.m1_xi - m.m_xi);

    v(4, 4) = m.sigma_eta2;
    v(4, 5) = q * pt * (m.m0_eta - m.m_eta);
    v(4, 6) = p * pt * (m.m1_eta - m.m_eta);

    v(5, 5) = pt * q * (one - pt * q);
    v(5, 6) = -(p * q * pt * pt);

    v(6, 6) = p * pt * (one - p * pt);

    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < i; ++j) v(i, j) = v(j, i);
    return v;
}

/// Selector with (G1, G2, G3) = (-B3, B6, B7): S V S^T = V1.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 7> limit_selector() {
    Eigen::Matrix<Scalar, 3, 7> s = Eigen::Matrix<Scalar, 3, 7>::Zero();
    s(0, 2) = Scalar(-1);
    s(1, 5) = Scalar(1);
    s(2, 6) = Scalar(1);
    return s;
}

// ---------------------------------------------------------------------------
// Floating-point theory.
// ---------------------------------------------------------------------------

/// Noncentrality delta of the limit (N - delta)^2 of the chi-squared statistic.
double noncentrality(const DerivedMoments& m, double p, double d_inf);

/// Asymptotic rejection probability P((N - delta)^2 > q_{1-alpha}).
double asym_reject_prob(double delta, double alpha);

/// A matrix F with F F^T = cov. Cholesky first; otherwise a symmetric
/// eigendecomposition with eigenvalues in [-1e-10, 0] clipped to zero.
template <int N>
Eigen::Matrix<double, N, N> psd_factor(const Eigen::Matrix<double, N, N>& cov) {
    using Mat = Eigen::Matrix<double, N, N>;
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw FactorizationError("psd_factor: matrix is not symmetric");
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() == Eigen::Success) {
        Mat l = llt.matrixL();
        if (((l * l.transpose()) - cov).cwiseAbs().maxCoeff() <= 1e-10) return l;
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
    if (eig.info() != Eigen::Success) throw FactorizationError("psd_factor: eigendecomposition failed");
    auto values = eig.eigenvalues().eval();
    if (values.minCoeff() < -1e-10) throw FactorizationError("psd_factor: matrix is not positive semi-definite");
    values = values.cwiseMax(0.0);
    return eig.eigenvectors() * values.cwiseSqrt().asDiagonal();
}

/// Drift (0, 0, d2, d3) and covariance V1 of the Gaussian limit of
/// (N0, N1, L0, L1), with a factor for sampling.
struct GaussianLimit {
    Eigen::Vector4d drift = Eigen::Vector4d::Zero();
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d sqrt_cov = Eigen::Matrix3d::Zero();
};

/// From moments; throws DegenerateScenario when m^eta = 0.
GaussianLimit make_gaussian_limit(const DerivedMoments& m, double p, double d_inf);

/// From explicit parts; factors `cov` (FactorizationError if not PSD).
GaussianLimit make_gaussian_limit(const Eigen::Vector4d& drift, const Eigen::Matrix3d& cov);

/// `count` i.i.d. draws of (G1, G2, G3) as columns. Draws come in fixed blocks
/// with one sub-stream per block, so the result does not depend on `threads`.
Eigen::Matrix3Xd sample_gaussian_limit(const GaussianLimit& g, std::uint64_t seed, std::int64_t count,
                                       int threads = 1);

/// The two-fraction limit of the chi-squared statistic evaluated at one draw.
double limit_chi2_sample(const Eigen::Vector3d& g, double d2, double d3, double p, double p_theta);

/// Limit of the event C0 > C1 at one draw:
/// -p_theta G1 + p (d2 + G2) - (1 - p)(d3 + G3) > 0.
bool limit_arm0_ahead(const Eigen::Vector3d& g, double d2, double d3, double p, double p_theta);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo of lim P(chi^2 > q_{1-alpha}, C0 > C1), the asymptotic power
/// to declare arm 0 better.
McEstimate asym_power_mc(const DerivedMoments& m, double p, double d_inf, double alpha, std::int64_t iters,
                         std::uint64_t seed, int threads = 1);

/// Monte Carlo of lim P(chi^2 > q_{1-alpha}) from the two-fraction form.
McEstimate asym_reject_mc(const DerivedMoments& m, double p, double d_inf, double alpha, std::int64_t iters,
                          std::uint64_t seed, int threads = 1);

}  // namespace abstrip
