#pragma once

#include <cmath>
#include <string>

#include "infinet/activation.hpp"
#include "infinet/common.hpp"
#include "infinet/linalg.hpp"
#include "infinet/parallel.hpp"
#include "infinet/rng.hpp"

namespace infinet {

// Single-layer kernels k_f(x,y) = E_{w~N(0,I)}[f(<x,w>) f(<y,w>)] and the
// bivariate-Gaussian expectation primitives they reduce to. The canonical
// forms below are the exact Gaussian expectations; the unnormalized
// convention is the same value times a per-activation constant (2 for ReLU,
// 2*pi for Step), matching the constants older arc-cosine write-ups drop.

/// Whether kernel values carry the exact Gaussian-measure normalization
/// (Canonical) or the unnormalized textbook constants (Unnormalized).
enum class ScaleConvention { Canonical, Unnormalized };

inline double unnormalized_factor(Activation a) {
    return a == Activation::ReLU ? 2.0 : kTwoPi;
}

inline const char* scale_convention_name(ScaleConvention s) {
    return s == ScaleConvention::Canonical ? "canonical" : "unnormalized";
}

namespace detail {

/// Correlations computed from floating-point dot products may stick out of
/// [-1,1] by rounding; anything beyond `tol` indicates broken inputs.
inline double clamp_correlation(double rho, double tol = 1e-6) {
    if (!std::isfinite(rho)) throw NumericError("correlation is not finite");
    if (rho > 1.0 + tol || rho < -1.0 - tol)
        throw NumericError("correlation " + std::to_string(rho) + " outside [-1,1] beyond tolerance");
    return rho > 1.0 ? 1.0 : (rho < -1.0 ? -1.0 : rho);
}

}  // namespace detail

/// E[relu(z1) relu(z2)] for zero-mean bivariate Gaussian z with stdevs
/// sigma1, sigma2 and correlation rho:
///   h_relu = (sigma1*sigma2 / 2pi) * (sin(theta) + (pi - theta)*rho),
/// theta = arccos(rho). Lies in [0, sigma1*sigma2/2], nondecreasing in rho.
inline double h_relu(double sigma1, double sigma2, double rho) {
    require_finite(sigma1, "h_relu sigma1");
    require_finite(sigma2, "h_relu sigma2");
    if (sigma1 < 0.0 || sigma2 < 0.0) throw NumericError("h_relu: negative standard deviation");
    rho = detail::clamp_correlation(rho);
    const double theta = std::acos(rho);
    return sigma1 * sigma2 / kTwoPi * (std::sin(theta) + (kPi - theta) * rho);
}

/// E[step(z1) step(z2)] = P(z1 >= 0, z2 >= 0) for correlation rho:
///   h_step = (pi - arccos(rho)) / 2pi.  Lies in [0, 1/2].
inline double h_step(double rho) {
    rho = detail::clamp_correlation(rho);
    return (kPi - std::acos(rho)) / kTwoPi;
}

/// 2x2 covariance of the bivariate Gaussian (z1, z2) of the two-layer
/// reduction. `clamped` records that an MC-estimated correlation had to be
/// truncated to [-1,1] by more than rounding noise.
struct CovBlock {
    double s11 = 0.0;
    double s12 = 0.0;
    double s22 = 0.0;
    bool clamped = false;

    static CovBlock make(double s11, double s12, double s22, double tol = 1e-6) {
        require_finite(s11, "CovBlock s11");
        require_finite(s12, "CovBlock s12");
        require_finite(s22, "CovBlock s22");
        if (s11 < 0.0 || s22 < 0.0) throw NumericError("CovBlock: negative variance");
        CovBlock out{s11, s12, s22, false};
        const double bound = std::sqrt(s11 * s22);
        if (std::abs(s12) > bound) {
            out.clamped = std::abs(s12) > bound * (1.0 + tol) + tol * 1e-12;
            out.s12 = s12 > 0.0 ? bound : -bound;
        }
        return out;
    }

    /// s12 / sqrt(s11*s22), clamped to [-1,1]; 0 when either variance vanishes.
    /// Equal variances with |s12| equal to them give exactly +-1, independent
    /// of sqrt rounding, so perfectly correlated blocks stay perfectly
    /// correlated (the two-layer Step diagonal depends on this).
    double correlation() const {
        if (s11 == s22 && std::abs(s12) == s11) return s12 >= 0.0 ? 1.0 : -1.0;
        const double denom = std::sqrt(s11 * s22);
        if (denom == 0.0) return 0.0;
        const double rho = s12 / denom;
        return rho > 1.0 ? 1.0 : (rho < -1.0 ? -1.0 : rho);
    }
};

/// E_{z~N(0,Sigma)}[f(z1) f(z2)].
///
/// Degenerate variances: a zero-variance coordinate is z == 0 almost surely,
/// so ReLU contributes factor 0 and Step contributes factor step(0) = 1.
/// Hence ReLU -> 0; Step -> 1 if both variances vanish, 1/2 if exactly one does.
inline double bivariate_expectation(const CovBlock& sigma, Activation activation) {
    if (sigma.s11 == 0.0 || sigma.s22 == 0.0) {
        if (activation == Activation::ReLU) return 0.0;
        return (sigma.s11 == 0.0 && sigma.s22 == 0.0) ? 1.0 : 0.5;
    }
    const double rho = sigma.correlation();
    if (activation == Activation::ReLU)
        return h_relu(std::sqrt(sigma.s11), std::sqrt(sigma.s22), rho);
    return h_step(rho);
}

/// Single-layer infinite-network kernel
///   k_f(xi,xj) = E_{w~N(0,I)}[f(<xi,w>) f(<xj,w>)].
/// ReLU: h_relu(|xi|, |xj|, rho); Step: h_step(rho); rho the cosine of the
/// angle between the inputs. Step is undefined at zero vectors (<x,w> == 0
/// almost never fixes the sign) and rejects them.
inline double single_layer_kernel(const Vec& xi, const Vec& xj, Activation activation,
                                  ScaleConvention scale = ScaleConvention::Canonical) {
    if (xi.size() != xj.size())
        throw DataError("single_layer_kernel: dimension mismatch (" +
                        std::to_string(xi.size()) + " vs " + std::to_string(xj.size()) + ")");
    const double ni = xi.norm();
    const double nj = xj.norm();
    double value = 0.0;
    if (activation == Activation::Step) {
        if (ni == 0.0 || nj == 0.0)
            throw NumericError("single_layer_kernel: zero vector is degenerate for the Step kernel");
        value = h_step(detail::clamp_correlation(xi.dot(xj) / (ni * nj)));
    } else {
        if (ni == 0.0 || nj == 0.0) {
            value = 0.0;
        } else {
            value = h_relu(ni, nj, detail::clamp_correlation(xi.dot(xj) / (ni * nj)));
        }
    }
    if (scale == ScaleConvention::Unnormalized) value *= unnormalized_factor(activation);
    return value;
}

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

/// Monte-Carlo oracle for the single-layer kernel: the sample mean of
/// f(<xi,w>) f(<xj,w>) over w ~ N(0,I). Deterministic for a fixed
/// (seed, n_samples, shards) triple.
inline McEstimate mc_oracle_pairwise(const Vec& xi, const Vec& xj, Activation activation,
                                     std::size_t n_samples, std::uint64_t seed,
                                     int shards = kDefaultShards) {
    if (xi.size() != xj.size()) throw DataError("mc_oracle_pairwise: dimension mismatch");
    const long d = xi.size();
    auto stats = mc_estimate<1>(n_samples, seed, shards, [&](Rng& rng, std::array<double, 1>& v) {
        double di = 0.0, dj = 0.0;
        for (long k = 0; k < d; ++k) {
            const double w = rng.normal();
            di += w * xi[k];
            dj += w * xj[k];
        }
        v[0] = activation_apply(activation, di) * activation_apply(activation, dj);
    });
    return McEstimate{stats.mean[0], stats.stderr_[0], stats.n};
}

}  // namespace infinet
