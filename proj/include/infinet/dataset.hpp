#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "infinet/common.hpp"
#include "infinet/linalg.hpp"
#include "infinet/rng.hpp"

namespace infinet {

enum class Normalization { None, UnitNorm, Scale255 };

inline const char* normalization_name(Normalization n) {
    switch (n) {
        case Normalization::None: return "none";
        case Normalization::UnitNorm: return "unit";
        case Normalization::Scale255: return "scale255";
    }
    return "?";
}

inline Normalization normalization_from_name(const std::string& name) {
    if (name == "none") return Normalization::None;
    if (name == "unit") return Normalization::UnitNorm;
    if (name == "scale255") return Normalization::Scale255;
    throw ConfigError("unknown normalization '" + name + "' (expected none|unit|scale255)");
}

/// Labeled instances x_i in R^d with labels in {0..K-1} and a record of the
/// normalization applied on ingest.
struct Dataset {
    Mat instances;              // n x d, row per instance
    std::vector<int> labels;    // size n
    int num_classes = 0;
    Normalization normalization = Normalization::None;
    std::string provenance;

    long size() const { return instances.rows(); }
    long dim() const { return instances.cols(); }

    void validate() const {
        if (instances.rows() != static_cast<long>(labels.size()))
            throw DataError("Dataset: instance/label count mismatch");
        if (!instances.allFinite()) throw DataError("Dataset: non-finite feature value");
        for (int y : labels)
            if (y < 0 || y >= num_classes)
                throw DataError("Dataset: label " + std::to_string(y) + " outside [0," +
                                std::to_string(num_classes) + ")");
        if (normalization == Normalization::UnitNorm)
            for (long i = 0; i < instances.rows(); ++i)
                if (std::abs(instances.row(i).norm() - 1.0) > 1e-10)
                    throw DataError("Dataset: UnitNorm row " + std::to_string(i) +
                                    " does not have unit norm");
    }

    /// Scales every row to unit norm. Idempotent; rejects zero rows.
    void unit_normalize() {
        for (long i = 0; i < instances.rows(); ++i) {
            const double norm = instances.row(i).norm();
            if (norm == 0.0)
                throw DataError("unit_normalize: row " + std::to_string(i) + " is the zero vector");
            instances.row(i) /= norm;
        }
        normalization = Normalization::UnitNorm;
    }

    Dataset subset(const std::vector<long>& indices) const {
        Dataset out;
        out.instances.resize(static_cast<long>(indices.size()), instances.cols());
        out.labels.reserve(indices.size());
        long row = 0;
        for (long idx : indices) {
            if (idx < 0 || idx >= size()) throw DataError("subset: index out of range");
            out.instances.row(row++) = instances.row(idx);
            out.labels.push_back(labels[static_cast<std::size_t>(idx)]);
        }
        out.num_classes = num_classes;
        out.normalization = normalization;
        out.provenance = provenance + ";subset(n=" + std::to_string(indices.size()) + ")";
        return out;
    }
};

/// Stable hash of instances and labels; ties persisted models to the exact
/// training sample they were fit on.
inline std::string dataset_content_hash(const Dataset& data) {
    std::uint64_t h = fnv1a64(data.instances.data(),
                              static_cast<std::size_t>(data.instances.size()) * sizeof(double));
    h = fnv1a64(data.labels.data(), data.labels.size() * sizeof(int), h);
    return to_hex(h);
}

/// Seeded sample of `count` distinct indices out of [0, n) (partial
/// Fisher-Yates over an index array).
inline std::vector<long> sample_indices(long n, long count, std::uint64_t seed) {
    if (count > n) throw ConfigError("sample_indices: requested more indices than available");
    std::vector<long> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0L);
    Rng rng(seed);
    for (long i = 0; i < count; ++i) {
        const long j = i + static_cast<long>(rng.next_u64() % static_cast<std::uint64_t>(n - i));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(count));
    return idx;
}

/// Disjoint seeded train/test split.
inline std::pair<Dataset, Dataset> split_train_test(const Dataset& data, long n_train, long n_test,
                                                    std::uint64_t seed) {
    if (n_train + n_test > data.size())
        throw ConfigError("split_train_test: split sizes exceed dataset size");
    auto idx = sample_indices(data.size(), n_train + n_test, seed);
    std::vector<long> train_idx(idx.begin(), idx.begin() + n_train);
    std::vector<long> test_idx(idx.begin() + n_train, idx.end());
    return {data.subset(train_idx), data.subset(test_idx)};
}

}  // namespace infinet
