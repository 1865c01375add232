#pragma once

#include <vector>

#include "infinet/gram.hpp"

namespace infinet {

struct PaResult {
    Mat coeffs;  // m x K dual coefficients of v_k = sum_j coeffs(j,k) psi_{x_j}
    std::size_t update_count = 0;
    std::vector<double> margin_trace;  // margin s_y - max_{r!=y} s_r per visit
};

/// Online multiclass passive-aggressive over the training sequence. On a
/// unit-margin violation (score_y < 1 + best other score) it applies the
/// closed-form update tau = loss / (2 G_tt) to the true and the violating
/// class, entirely in dual coefficients. Returns the total update count; in
/// the margin-separable regime this is bounded by R^2 sum_k |v*_k|^2.
inline PaResult train_pa(const GramMatrix& gram, const std::vector<int>& labels, double r_bound,
                         int passes = 1, int num_classes = 0) {
    const long m = gram.size();
    if (m == 0) throw DataError("train_pa: empty Gram");
    if (static_cast<long>(labels.size()) != m) throw DataError("train_pa: label count mismatch");
    if (passes < 1) throw ConfigError("train_pa: passes must be >= 1");
    if (num_classes == 0)
        for (int y : labels) num_classes = std::max(num_classes, y + 1);
    if (num_classes < 2) throw DataError("train_pa: need at least two classes");

    const Mat& g = gram.values;
    for (long t = 0; t < m; ++t) {
        if (g(t, t) > r_bound * r_bound + 1e-12)
            throw ConfigError("train_pa: Gram diagonal exceeds R^2 at index " + std::to_string(t));
        if (g(t, t) <= 0.0)
            throw NumericError("train_pa: nonpositive Gram diagonal at index " + std::to_string(t));
    }

    PaResult out;
    out.coeffs = Mat::Zero(m, num_classes);
    out.margin_trace.reserve(static_cast<std::size_t>(m) * passes);
    for (int pass = 0; pass < passes; ++pass) {
        for (long t = 0; t < m; ++t) {
            const int y = labels[static_cast<std::size_t>(t)];
            Vec scores = out.coeffs.transpose() * g.col(t);
            int rival = y == 0 ? 1 : 0;
            for (int k = 0; k < num_classes; ++k)
                if (k != y && scores[k] > scores[rival]) rival = k;
            const double margin = scores[y] - scores[rival];
            out.margin_trace.push_back(margin);
            if (margin < 1.0) {
                const double loss = 1.0 - margin;
                const double tau = loss / (2.0 * g(t, t));
                out.coeffs(t, y) += tau;
                out.coeffs(t, rival) -= tau;
                ++out.update_count;
            }
        }
    }
    return out;
}

}  // namespace infinet
