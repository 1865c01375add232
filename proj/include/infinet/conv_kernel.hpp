#pragma once

#include <string>
#include <vector>

#include "infinet/kernel_core.hpp"
#include "infinet/linalg.hpp"

namespace infinet {

// Patch-based first-layer kernel: the input is viewed as overlapping subsets
// x^(1)..x^(P), every patch feeds the same infinite bank of responses
// f(<w, x^(p)>) over a shared Gaussian measure on R^d1, and the kernel is the
// inner product of the stacked P-dimensional feature maps. Patches share one
// measure (weight sharing); per-patch independent measures would be a
// block-diagonal construction, not a convolution.

struct PatchScheme {
    enum class Aggregation { Sum, Mean };

    long rows = 1;
    long cols = 0;
    long patch_rows = 1;
    long patch_cols = 0;
    long stride = 1;
    Aggregation aggregation = Aggregation::Sum;

    /// 1-D scheme: windows of `patch_len` over a flat vector.
    static PatchScheme flat(long length, long patch_len, long stride,
                            Aggregation agg = Aggregation::Sum) {
        PatchScheme s{1, length, 1, patch_len, stride, agg};
        s.validate();
        return s;
    }

    /// 2-D scheme: square side-by-side windows over a row-major image.
    static PatchScheme image(long height, long width, long patch_side, long stride,
                             Aggregation agg = Aggregation::Sum) {
        PatchScheme s{height, width, patch_side, patch_side, stride, agg};
        s.validate();
        return s;
    }

    long input_dim() const { return rows * cols; }
    long patch_dim() const { return patch_rows * patch_cols; }

    long patches_per_row() const { return (cols - patch_cols) / stride + 1; }
    long patches_per_col() const { return (rows - patch_rows) / stride + 1; }
    long patch_count() const { return patches_per_row() * patches_per_col(); }

    void validate() const {
        if (rows < 1 || cols < 1) throw ConfigError("PatchScheme: empty input shape");
        if (patch_rows < 1 || patch_cols < 1) throw ConfigError("PatchScheme: empty patch");
        if (stride < 1) throw ConfigError("PatchScheme: stride must be positive");
        if (patch_rows > rows || patch_cols > cols)
            throw ConfigError("PatchScheme: patch exceeds input shape");
    }

    std::string describe() const {
        return std::to_string(rows) + "x" + std::to_string(cols) + ",patch=" +
               std::to_string(patch_rows) + "x" + std::to_string(patch_cols) + ",stride=" +
               std::to_string(stride) + "," +
               (aggregation == Aggregation::Sum ? "sum" : "mean");
    }

    bool operator==(const PatchScheme& o) const {
        return rows == o.rows && cols == o.cols && patch_rows == o.patch_rows &&
               patch_cols == o.patch_cols && stride == o.stride && aggregation == o.aggregation;
    }
};

/// Row-major enumeration of the patches of x; overlapping windows copy the
/// shared underlying values.
inline std::vector<Vec> extract_patches(const Vec& x, const PatchScheme& scheme) {
    scheme.validate();
    if (x.size() != scheme.input_dim())
        throw DataError("extract_patches: input length " + std::to_string(x.size()) +
                        " does not match scheme shape " + scheme.describe());
    std::vector<Vec> patches;
    patches.reserve(static_cast<std::size_t>(scheme.patch_count()));
    for (long r = 0; r + scheme.patch_rows <= scheme.rows; r += scheme.stride) {
        for (long c = 0; c + scheme.patch_cols <= scheme.cols; c += scheme.stride) {
            Vec p(scheme.patch_dim());
            long idx = 0;
            for (long pr = 0; pr < scheme.patch_rows; ++pr)
                for (long pc = 0; pc < scheme.patch_cols; ++pc)
                    p[idx++] = x[(r + pr) * scheme.cols + (c + pc)];
            patches.push_back(std::move(p));
        }
    }
    return patches;
}

struct ConvDiagnostics {
    long skipped_zero_patch_pairs = 0;
};

/// Sum over patches of the single-layer kernel on aligned patch pairs
/// (divided by P under Mean aggregation). A Step patch pair containing a
/// zero patch has no defined angle; it is skipped and counted rather than
/// failing the whole kernel, since blank image regions are common.
inline double conv_single_layer_kernel(const Vec& xi, const Vec& xj, const PatchScheme& scheme,
                                       Activation activation,
                                       ScaleConvention scale = ScaleConvention::Canonical,
                                       ConvDiagnostics* diag = nullptr) {
    const auto pi = extract_patches(xi, scheme);
    const auto pj = extract_patches(xj, scheme);
    double total = 0.0;
    long skipped = 0;
    for (std::size_t p = 0; p < pi.size(); ++p) {
        if (activation == Activation::Step &&
            (pi[p].norm() == 0.0 || pj[p].norm() == 0.0)) {
            ++skipped;
            continue;
        }
        total += single_layer_kernel(pi[p], pj[p], activation, scale);
    }
    if (diag) diag->skipped_zero_patch_pairs = skipped;
    if (scheme.aggregation == PatchScheme::Aggregation::Mean)
        total /= static_cast<double>(scheme.patch_count());
    return total;
}

}  // namespace infinet
