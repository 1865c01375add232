#pragma once

#include <string>

#include "infinet/dataset.hpp"
#include "infinet/kernel_spec.hpp"
#include "infinet/linalg.hpp"
#include "infinet/parallel.hpp"

namespace infinet {

/// Symmetric matrix of pairwise kernel values plus the fingerprint of the
/// KernelSpec that produced it.
struct GramMatrix {
    Mat values;
    std::string fingerprint;

    long size() const { return values.rows(); }
};

/// Materializes the kernel over a dataset. Only entries with i <= j are
/// evaluated and mirrored, so symmetry is exact by construction. Pairs are
/// computed concurrently; MC paths derive a per-pair seed from the
/// KernelSpec seed, so the result is independent of scheduling.
inline GramMatrix gram(const Dataset& dataset, const KernelSpec& spec) {
    spec.validate();
    const long n = dataset.size();
    if (n == 0) throw DataError("gram: empty dataset");
    GramMatrix out;
    out.fingerprint = spec.fingerprint();
    out.values.resize(n, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        for (std::size_t row = begin; row < end; ++row) {
            const long i = static_cast<long>(row);
            for (long j = i; j < n; ++j) {
                try {
                    const double v = kernel_value(dataset.instances.row(i),
                                                  dataset.instances.row(j), spec,
                                                  static_cast<std::uint64_t>(i) * n + j);
                    out.values(i, j) = v;
                    out.values(j, i) = v;
                } catch (const std::exception& e) {
                    throw NumericError("gram entry (" + std::to_string(i) + "," +
                                       std::to_string(j) + "): " + e.what());
                }
            }
        }
    });
    return out;
}

/// Kernel values of each eval instance against every training instance
/// (n_eval x n_train). Uses a seed stream disjoint from the square Gram's.
inline Mat cross_gram(const Dataset& eval_set, const Dataset& train_set, const KernelSpec& spec) {
    spec.validate();
    if (eval_set.dim() != train_set.dim()) throw DataError("cross_gram: dimension mismatch");
    const long ne = eval_set.size();
    const long nt = train_set.size();
    Mat out(ne, nt);
    parallel_for(static_cast<std::size_t>(ne), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            for (long j = 0; j < nt; ++j) {
                const std::uint64_t stream =
                    0x8000000000000000ULL + static_cast<std::uint64_t>(i) * nt + j;
                try {
                    out(static_cast<long>(i), j) =
                        kernel_value(eval_set.instances.row(static_cast<long>(i)),
                                     train_set.instances.row(j), spec, stream);
                } catch (const std::exception& e) {
                    throw NumericError("cross_gram entry (" + std::to_string(i) + "," +
                                       std::to_string(j) + "): " + e.what());
                }
            }
        }
    });
    return out;
}

}  // namespace infinet
