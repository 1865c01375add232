#pragma once

#include <atomic>
#include <cmath>
#include <vector>

#include "infinet/covariance.hpp"
#include "infinet/kernel_core.hpp"
#include "infinet/linalg.hpp"
#include "infinet/parallel.hpp"

namespace infinet {

// Two-layer stochastic kernels
//   k2_f(xi,xj) = E_{u~GP(C)}[f(<phi_xi,u>) f(<phi_xj,u>)]
// computed by reducing (z1,z2) = (<phi_xi,u>, <phi_xj,u>) to a bivariate
// Gaussian with covariance Sigma, then taking bivariate_expectation. Three
// routes build Sigma: a generic Monte-Carlo estimate over Gaussian weight
// pairs, a Bochner cosine-feature estimate for shift-invariant C, and a
// closed form for the squared-exponential C.

struct SigmaEstimate {
    CovBlock sigma;
    double stderr11 = 0.0;
    double stderr12 = 0.0;
    double stderr22 = 0.0;
    std::size_t n = 0;
};

/// Sigma entries as expectations over independent w1, w2 ~ N(0,I):
///   Sigma_rs = E[ f(<w1,x_r>) C(w1,w2) f(<w2,x_s>) ],
/// the three distinct entries sharing the same (w1,w2) draws.
inline SigmaEstimate sigma_pair_mc(const Vec& xi, const Vec& xj, Activation activation,
                                       const GpCovariance& covariance, std::size_t n_samples,
                                       std::uint64_t seed, int shards = kDefaultShards) {
    if (xi.size() != xj.size()) throw DataError("sigma_pair_mc: dimension mismatch");
    const long d = xi.size();
    auto stats = mc_estimate<3>(n_samples, seed, shards, [&](Rng& rng, std::array<double, 3>& v) {
        thread_local Vec w1, w2;
        w1.resize(d);
        w2.resize(d);
        rng.fill_normal(w1);
        rng.fill_normal(w2);
        const double c = covariance(w1, w2);
        const double f1i = activation_apply(activation, w1.dot(xi));
        const double f2i = activation_apply(activation, w2.dot(xi));
        const double f1j = activation_apply(activation, w1.dot(xj));
        const double f2j = activation_apply(activation, w2.dot(xj));
        v[0] = f1i * c * f2i;
        v[1] = f1i * c * f2j;
        v[2] = f1j * c * f2j;
    });
    SigmaEstimate out;
    out.sigma = CovBlock::make(std::max(0.0, stats.mean[0]), stats.mean[1],
                               std::max(0.0, stats.mean[2]));
    out.stderr11 = stats.stderr_[0];
    out.stderr12 = stats.stderr_[1];
    out.stderr22 = stats.stderr_[2];
    out.n = stats.n;
    return out;
}

/// Closed-form Sigma for the squared-exponential covariance
/// C(w1,w2) = (1+2a)^(1+d/2) exp(-a|w1-w2|^2/2).
///
/// ReLU absorbs the prefactor through degree-2 homogeneity of h_relu, giving
/// the sqrt(1+a)|x| arguments; for Step the prefactor rescales Sigma
/// uniformly and cancels in the outer correlation, so it is dropped here.
inline CovBlock two_layer_analytic_se_sigma(const Vec& xi, const Vec& xj, Activation activation,
                                            double alpha) {
    if (!(alpha > 0.0)) throw ConfigError("two_layer_analytic_se: alpha must be > 0");
    if (xi.size() != xj.size()) throw DataError("two_layer_analytic_se: dimension mismatch");
    const double ni = xi.norm();
    const double nj = xj.norm();
    if (ni == 0.0 || nj == 0.0)
        throw NumericError("two_layer_analytic_se: zero vector rejected");
    const double rho_ij = detail::clamp_correlation(xi.dot(xj) / (ni * nj));
    const double rho_in = alpha / (1.0 + alpha);
    if (activation == Activation::ReLU) {
        const double scale = std::sqrt(1.0 + alpha);
        return CovBlock::make(h_relu(scale * ni, scale * ni, rho_in),
                              h_relu(scale * ni, scale * nj, rho_in * rho_ij),
                              h_relu(scale * nj, scale * nj, rho_in));
    }
    return CovBlock::make(h_step(rho_in), h_step(rho_in * rho_ij), h_step(rho_in));
}

/// Analytic two-layer kernel for the squared-exponential covariance:
/// a nested application of the h primitives.
inline double two_layer_analytic_se(const Vec& xi, const Vec& xj, Activation activation,
                                    double alpha) {
    return bivariate_expectation(two_layer_analytic_se_sigma(xi, xj, activation, alpha),
                                 activation);
}

/// Closed form for the constant covariance C == c: the process is a single
/// shared Gaussian amplitude, so (z1, z2) is rank one with correlation 1 and
/// the expectation factorizes through the first-layer means
/// E[f(<w,x>)] (|x|/sqrt(2 pi) for ReLU, 1/2 for Step).
inline double two_layer_constant(const Vec& xi, const Vec& xj, Activation activation, double c) {
    if (!(c > 0.0)) throw ConfigError("two_layer_constant: c must be > 0");
    if (xi.size() != xj.size()) throw DataError("two_layer_constant: dimension mismatch");
    if (activation == Activation::Step)
        return (xi.norm() == 0.0 && xj.norm() == 0.0) ? 1.0 : 0.5;
    const double mean_i = xi.norm() / std::sqrt(kTwoPi);
    const double mean_j = xj.norm() / std::sqrt(kTwoPi);
    return c * mean_i * mean_j / 2.0;
}

/// Frequency/phase sampler realizing a shift-invariant covariance as
/// amplitude * E_{w,b}[g(<w1,w>+b) g(<w2,w>+b)], g(t) = sqrt(2) cos(t),
/// b ~ U[0,2pi). The frequency law is the Bochner dual of C/amplitude:
/// Gaussian N(0, alpha I) for the squared exponential, per-coordinate
/// standard Cauchy for Ornstein-Uhlenbeck, a point mass at the origin for
/// the constant covariance.
struct BochnerSampler {
    enum class FrequencyLaw { Gaussian, Cauchy, PointMass };

    FrequencyLaw law = FrequencyLaw::Gaussian;
    double gaussian_std = 1.0;
    double amplitude = 1.0;
    long dim = 0;

    static BochnerSampler for_covariance(const GpCovariance& covariance, long dim) {
        if (!covariance.shift_invariant())
            throw ConfigError("Bochner sampler requires a shift-invariant covariance");
        BochnerSampler s;
        s.dim = dim;
        s.amplitude = covariance.amplitude(dim);
        switch (covariance.kind) {
            case GpCovariance::Kind::SquaredExponential:
                s.law = FrequencyLaw::Gaussian;
                s.gaussian_std = std::sqrt(covariance.alpha);
                break;
            case GpCovariance::Kind::OrnsteinUhlenbeck:
                s.law = FrequencyLaw::Cauchy;
                break;
            case GpCovariance::Kind::Constant:
                s.law = FrequencyLaw::PointMass;
                break;
            case GpCovariance::Kind::Custom:
                throw ConfigError("Bochner sampler requires a shift-invariant covariance");
        }
        return s;
    }

    void draw_frequency(Rng& rng, Vec& out) const {
        out.resize(dim);
        switch (law) {
            case FrequencyLaw::Gaussian:
                for (long i = 0; i < dim; ++i) out[i] = gaussian_std * rng.normal();
                break;
            case FrequencyLaw::Cauchy:
                for (long i = 0; i < dim; ++i) out[i] = rng.cauchy();
                break;
            case FrequencyLaw::PointMass:
                out.setZero();
                break;
        }
    }
};

struct BochnerResult {
    double value = 0.0;
    SigmaEstimate sigma;
    bool floored = false;  ///< a sampled 6-dim covariance needed eigenvalue flooring
};

/// Bochner-path two-layer kernel. Per sample: draw frequency w and phase b,
/// draw zhat ~ N(0, Gram(xi,w,xj) kron I2) ordered
///   (zhat1..zhat6) = (<w1,xi>, <w2,xi>, <w1,w>, <w2,w>, <w1,xj>, <w2,xj>),
/// and accumulate
///   s11 += f(z1) f(z2) G,  s12 += f(z1) f(z6) G,  s22 += f(z5) f(z6) G,
/// G = amplitude * g(z3+b) g(z4+b). Finishes with bivariate_expectation on
/// the averaged Sigma.
inline BochnerResult two_layer_bochner(const Vec& xi, const Vec& xj, Activation activation,
                                       const BochnerSampler& sampler, std::size_t n_samples,
                                       std::uint64_t seed, int shards = kDefaultShards) {
    if (xi.size() != xj.size()) throw DataError("two_layer_bochner: dimension mismatch");
    if (sampler.dim != xi.size()) throw ConfigError("two_layer_bochner: sampler dimension mismatch");

    const double xii = xi.squaredNorm();
    const double xjj = xj.squaredNorm();
    const double xij = xi.dot(xj);

    std::atomic<bool> floored{false};
    auto stats = mc_estimate<3>(n_samples, seed, shards, [&](Rng& rng, std::array<double, 3>& v) {
        thread_local Vec w;
        sampler.draw_frequency(rng, w);
        const double b = rng.uniform(0.0, kTwoPi);

        Eigen::Matrix3d gram3;
        gram3 << xii, xi.dot(w), xij,
                 xi.dot(w), w.squaredNorm(), w.dot(xj),
                 xij, w.dot(xj), xjj;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
        eig.computeDirect(gram3);
        Eigen::Vector3d lambda = eig.eigenvalues();
        const double lmax = std::max(1e-300, std::abs(lambda.maxCoeff()));
        if (lambda.minCoeff() < -1e-10 * lmax) floored.store(true, std::memory_order_relaxed);
        for (int k = 0; k < 3; ++k) lambda[k] = std::sqrt(std::max(0.0, lambda[k]));
        const Eigen::Matrix3d root =
            eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();

        // zhat = (root kron I2) * eta: slot a (odd positions) carries w1,
        // slot b carries w2, matching the proof's variable order.
        double eta[6];
        for (double& e : eta) e = rng.normal();
        double z[6];
        for (int r = 0; r < 3; ++r)
            for (int a = 0; a < 2; ++a)
                z[2 * r + a] = root(r, 0) * eta[a] + root(r, 1) * eta[2 + a] + root(r, 2) * eta[4 + a];

        const double g = sampler.amplitude * 2.0 * std::cos(z[2] + b) * std::cos(z[3] + b);
        const double f1i = activation_apply(activation, z[0]);
        const double f2i = activation_apply(activation, z[1]);
        const double f1j = activation_apply(activation, z[4]);
        const double f2j = activation_apply(activation, z[5]);
        v[0] = f1i * f2i * g;
        v[1] = f1i * f2j * g;
        v[2] = f1j * f2j * g;
    });

    BochnerResult out;
    out.sigma.sigma = CovBlock::make(std::max(0.0, stats.mean[0]), stats.mean[1],
                                     std::max(0.0, stats.mean[2]));
    out.sigma.stderr11 = stats.stderr_[0];
    out.sigma.stderr12 = stats.stderr_[1];
    out.sigma.stderr22 = stats.stderr_[2];
    out.sigma.n = stats.n;
    out.floored = floored.load();
    out.value = bivariate_expectation(out.sigma.sigma, activation);
    return out;
}

struct IdentityCheckRow {
    double covariance_value = 0.0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    double z_score = 0.0;
};

struct IdentityCheckReport {
    std::vector<IdentityCheckRow> rows;
    std::size_t outside_3se = 0;
    bool pass = false;  ///< at most 1% of pairs outside 3 standard errors
};

/// Verifies the Bochner representation: for random (w1,w2), the sample mean
/// of amplitude * g(<w1,w>+b) g(<w2,w>+b) must match C(w1,w2) within noise.
inline IdentityCheckReport covariance_identity_check(const BochnerSampler& sampler,
                                                     const GpCovariance& covariance, long dim,
                                                     int n_pairs, std::size_t n_samples,
                                                     std::uint64_t seed,
                                                     int shards = kDefaultShards) {
    if (!covariance.shift_invariant())
        throw ConfigError("covariance_identity_check: covariance must be shift-invariant");
    IdentityCheckReport report;
    Rng pair_rng(derive_seed(seed, 0x0b5e55ed));
    for (int p = 0; p < n_pairs; ++p) {
        Vec w1(dim), w2(dim);
        pair_rng.fill_normal(w1);
        pair_rng.fill_normal(w2);
        const double truth = covariance(w1, w2);
        auto stats = mc_estimate<1>(n_samples, derive_seed(seed, 1 + static_cast<std::uint64_t>(p)),
                                    shards, [&](Rng& rng, std::array<double, 1>& v) {
            thread_local Vec w;
            sampler.draw_frequency(rng, w);
            const double b = rng.uniform(0.0, kTwoPi);
            v[0] = sampler.amplitude * 2.0 * std::cos(w1.dot(w) + b) * std::cos(w2.dot(w) + b);
        });
        IdentityCheckRow row;
        row.covariance_value = truth;
        row.estimate = stats.mean[0];
        row.stderr_ = stats.stderr_[0];
        row.z_score = row.stderr_ > 0.0 ? (row.estimate - truth) / row.stderr_
                                        : (row.estimate == truth ? 0.0 : INFINITY);
        if (std::abs(row.z_score) > 3.0) ++report.outside_3se;
        report.rows.push_back(row);
    }
    report.pass = static_cast<double>(report.outside_3se) <=
                  0.01 * static_cast<double>(std::max(1, n_pairs));
    return report;
}

/// Numeric check of the density identity behind the analytic squared-
/// exponential route: log[g_I(w1) g_I(w2) C(w1,w2)] against
/// log[(1+2a) g_Sigma(w)], Sigma = [[1+a,a],[a,1+a]] kron I_d / (1+2a).
/// Returns the largest absolute log-difference over n random (w1,w2).
inline double se_density_identity_max_error(double alpha, long dim, int n_points,
                                            std::uint64_t seed) {
    if (!(alpha > 0.0)) throw ConfigError("se_density_identity: alpha must be > 0");
    Rng rng(seed);
    const double d = static_cast<double>(dim);
    double worst = 0.0;
    for (int p = 0; p < n_points; ++p) {
        Vec w1(dim), w2(dim);
        rng.fill_normal(w1);
        rng.fill_normal(w2);
        // left: two iid N(0,I_d) densities times the covariance
        const double log_left = -d * std::log(kTwoPi) - 0.5 * (w1.squaredNorm() + w2.squaredNorm()) +
                                (1.0 + 0.5 * d) * std::log1p(2.0 * alpha) -
                                0.5 * alpha * (w1 - w2).squaredNorm();
        // right: (1+2a) times the 2d-dim N(0, Sigma) density; Sigma^{-1} is
        // [[1+a,-a],[-a,1+a]] kron I_d and det(Sigma) = (1+2a)^{-d}
        const double quad = (1.0 + alpha) * (w1.squaredNorm() + w2.squaredNorm()) -
                            2.0 * alpha * w1.dot(w2);
        const double log_right = std::log1p(2.0 * alpha) - d * std::log(kTwoPi) +
                                 0.5 * d * std::log1p(2.0 * alpha) - 0.5 * quad;
        worst = std::max(worst, std::abs(log_left - log_right));
    }
    return worst;
}

}  // namespace infinet
