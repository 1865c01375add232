#pragma once

#include <string>

#include "infinet/dataset.hpp"
#include "infinet/rng.hpp"

namespace infinet {

/// Synthetic benchmark: K Gaussian blobs around well-separated unit
/// directions. Labels follow the blob, classes as balanced as n allows,
/// everything driven by the seed. With small `spread` the classes are
/// separable with a margin under the single-layer kernels, which is what
/// the optimizer and stability tests need.
inline Dataset make_blobs(long n, long dim, int k, double spread, std::uint64_t seed,
                          Normalization normalization = Normalization::UnitNorm) {
    if (n < 1 || dim < 1 || k < 1) throw ConfigError("make_blobs: n, dim, k must be positive");
    if (k > 1 && dim < 2) throw ConfigError("make_blobs: need dim >= 2 for distinct centers");
    Rng rng(seed);

    // centers: random unit directions, resampled until pairwise separated
    Mat centers(k, dim);
    for (int c = 0; c < k; ++c) {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            Vec v(dim);
            rng.fill_normal(v);
            v.normalize();
            bool far_enough = true;
            for (int prev = 0; prev < c && far_enough; ++prev)
                if (v.dot(centers.row(prev)) > 0.3) far_enough = false;
            if (far_enough || attempt == 999) {
                centers.row(c) = v;
                break;
            }
        }
    }

    Dataset out;
    out.instances.resize(n, dim);
    out.labels.resize(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % k);
        Vec x = centers.row(label);
        for (long j = 0; j < dim; ++j) x[j] += spread * rng.normal();
        out.instances.row(i) = x;
        out.labels[static_cast<std::size_t>(i)] = label;
    }
    out.num_classes = k;
    out.provenance = "blobs(n=" + std::to_string(n) + ",d=" + std::to_string(dim) + ",k=" +
                     std::to_string(k) + ",spread=" + std::to_string(spread) + ",seed=" +
                     std::to_string(seed) + ")";
    if (normalization == Normalization::UnitNorm) out.unit_normalize();
    out.validate();
    return out;
}

}  // namespace infinet
