#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "infinet/common.hpp"
#include "infinet/rng.hpp"

namespace infinet {

/// Number of OS threads to use: hardware concurrency capped by INFINET_THREADS.
inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("INFINET_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
    }
    return hw;
}

/// Runs fn(begin, end) over [0, n) in contiguous chunks across worker threads.
/// The partition depends only on n and the worker count, never on scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const unsigned workers = std::min<std::size_t>(worker_count(), n == 0 ? 1 : n);
    if (workers <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min<std::size_t>(n, w * chunk);
        const std::size_t end = std::min<std::size_t>(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline constexpr int kDefaultShards = 16;

template <int N>
struct McStatsN {
    std::array<double, N> mean{};
    std::array<double, N> stderr_{};
    std::size_t n = 0;
};

/// Sharded Monte-Carlo estimator for N jointly sampled statistics.
///
/// Samples are split over `shards` fixed shards regardless of thread count;
/// shard s uses Rng(derive_seed(seed, s)) and partial sums are reduced in
/// shard order, so the result is bit-identical for a given (seed, n, shards).
/// `sample` fills an N-array from one draw.
template <int N, typename SampleFn>
McStatsN<N> mc_estimate(std::size_t n_samples, std::uint64_t seed, int shards,
                        SampleFn&& sample) {
    if (n_samples < 2) throw ConfigError("mc_estimate: need at least 2 samples");
    if (shards < 1) throw ConfigError("mc_estimate: shard count must be >= 1");
    const auto s_count = static_cast<std::size_t>(shards);

    struct Partial {
        std::array<double, N> sum{};
        std::array<double, N> sumsq{};
    };
    std::vector<Partial> partials(s_count);
    const std::size_t per_shard = n_samples / s_count;
    const std::size_t remainder = n_samples % s_count;

    parallel_for(s_count, [&](std::size_t begin, std::size_t end) {
        std::array<double, N> value{};
        for (std::size_t s = begin; s < end; ++s) {
            Rng rng(derive_seed(seed, s));
            Partial& p = partials[s];
            const std::size_t count = per_shard + (s < remainder ? 1 : 0);
            for (std::size_t i = 0; i < count; ++i) {
                sample(rng, value);
                for (int k = 0; k < N; ++k) {
                    p.sum[k] += value[k];
                    p.sumsq[k] += value[k] * value[k];
                }
            }
        }
    });

    std::array<double, N> sum{};
    std::array<double, N> sumsq{};
    for (const Partial& p : partials)
        for (int k = 0; k < N; ++k) {
            sum[k] += p.sum[k];
            sumsq[k] += p.sumsq[k];
        }

    McStatsN<N> out;
    out.n = n_samples;
    const auto n = static_cast<double>(n_samples);
    for (int k = 0; k < N; ++k) {
        out.mean[k] = sum[k] / n;
        const double var = std::max(0.0, (sumsq[k] - n * out.mean[k] * out.mean[k]) / (n - 1.0));
        out.stderr_[k] = std::sqrt(var / n);
    }
    return out;
}

struct McStats {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

template <typename SampleFn>
McStats mc_estimate_scalar(std::size_t n_samples, std::uint64_t seed, int shards,
                           SampleFn&& sample) {
    auto stats = mc_estimate<1>(n_samples, seed, shards,
                                [&](Rng& rng, std::array<double, 1>& v) { v[0] = sample(rng); });
    return McStats{stats.mean[0], stats.stderr_[0], stats.n};
}

}  // namespace infinet
