#pragma once

#include <optional>
#include <sstream>
#include <string>

#include "infinet/conv_kernel.hpp"
#include "infinet/covariance.hpp"
#include "infinet/deep_kernel.hpp"
#include "infinet/kernel_core.hpp"

namespace infinet {

/// Which kernel to evaluate: activation, depth, GP covariance (depth 2),
/// estimator path, scale convention, and MC controls. `patches` switches the
/// depth-1 kernel to its patch-based convolutional variant.
struct KernelSpec {
    enum class Estimator { Analytic, DirectMC, BochnerMC };

    Activation activation = Activation::ReLU;
    int depth = 1;
    std::optional<GpCovariance> covariance;
    Estimator estimator = Estimator::Analytic;
    ScaleConvention scale = ScaleConvention::Canonical;
    std::size_t mc_samples = 100000;
    std::uint64_t seed = 0;
    int mc_shards = kDefaultShards;
    std::optional<PatchScheme> patches;

    void validate() const {
        if (depth != 1 && depth != 2) throw ConfigError("KernelSpec: depth must be 1 or 2");
        if (mc_samples < 1) throw ConfigError("KernelSpec: mc_samples must be >= 1");
        if (depth == 2) {
            if (!covariance) throw ConfigError("KernelSpec: depth 2 requires a covariance");
            if (patches) throw ConfigError("KernelSpec: patch kernels are first-layer only");
            if (estimator == Estimator::Analytic &&
                covariance->kind != GpCovariance::Kind::SquaredExponential)
                throw ConfigError(
                    "KernelSpec: the analytic depth-2 path requires the squared-exponential covariance");
            if (estimator == Estimator::BochnerMC && !covariance->shift_invariant())
                throw ConfigError("KernelSpec: BochnerMC requires a shift-invariant covariance");
        } else if (estimator == Estimator::BochnerMC) {
            throw ConfigError("KernelSpec: BochnerMC applies to depth-2 kernels only");
        }
        if (patches) {
            if (estimator != Estimator::Analytic)
                throw ConfigError("KernelSpec: patch kernels have only the analytic path");
            patches->validate();
        }
    }

    static const char* estimator_name(Estimator e) {
        switch (e) {
            case Estimator::Analytic: return "analytic";
            case Estimator::DirectMC: return "direct";
            case Estimator::BochnerMC: return "bochner";
        }
        return "?";
    }

    /// Canonical key string; hashed into the fingerprint and stored next to
    /// every persisted Gram so a stale matrix cannot silently feed a model.
    std::string key() const {
        std::ostringstream out;
        out << "act=" << activation_name(activation) << ";depth=" << depth;
        out << ";cov=" << (covariance ? covariance->name() : "none");
        out << ";est=" << estimator_name(estimator);
        out << ";scale=" << scale_convention_name(scale);
        out << ";mc=" << mc_samples << ";seed=" << seed << ";shards=" << mc_shards;
        out << ";patches=" << (patches ? patches->describe() : "none");
        return out.str();
    }

    std::string fingerprint() const { return to_hex(fnv1a64(key())); }
};

/// Evaluates the kernel selected by `spec` on one input pair. MC estimator
/// paths use derive_seed(spec.seed, pair_stream) so that every pair of a
/// Gram matrix has its own reproducible stream.
inline double kernel_value(const Vec& xi, const Vec& xj, const KernelSpec& spec,
                           std::uint64_t pair_stream = 0) {
    spec.validate();
    if (spec.patches)
        return conv_single_layer_kernel(xi, xj, *spec.patches, spec.activation, spec.scale);
    const std::uint64_t seed = derive_seed(spec.seed, pair_stream);
    if (spec.depth == 1) {
        if (spec.estimator == KernelSpec::Estimator::Analytic)
            return single_layer_kernel(xi, xj, spec.activation, spec.scale);
        double value =
            mc_oracle_pairwise(xi, xj, spec.activation, spec.mc_samples, seed, spec.mc_shards)
                .value;
        if (spec.scale == ScaleConvention::Unnormalized)
            value *= unnormalized_factor(spec.activation);
        return value;
    }
    double value = 0.0;
    switch (spec.estimator) {
        case KernelSpec::Estimator::Analytic:
            value = two_layer_analytic_se(xi, xj, spec.activation, spec.covariance->alpha);
            break;
        case KernelSpec::Estimator::DirectMC: {
            auto est = sigma_pair_mc(xi, xj, spec.activation, *spec.covariance,
                                         spec.mc_samples, seed, spec.mc_shards);
            value = bivariate_expectation(est.sigma, spec.activation);
            break;
        }
        case KernelSpec::Estimator::BochnerMC: {
            auto sampler = BochnerSampler::for_covariance(*spec.covariance, xi.size());
            value = two_layer_bochner(xi, xj, spec.activation, sampler, spec.mc_samples, seed,
                                      spec.mc_shards)
                        .value;
            break;
        }
    }
    if (spec.scale == ScaleConvention::Unnormalized) value *= unnormalized_factor(spec.activation);
    return value;
}

}  // namespace infinet
