#pragma once

#include <cmath>

#include "infinet/common.hpp"
#include "infinet/linalg.hpp"

namespace infinet {

struct SoftmaxLoss {
    double loss = 0.0;
    Vec gradient;  // p - onehot(label)
};

/// Multiclass logistic loss -log p(label | scores) with its gradient,
/// computed with max-subtraction so saturated scores cannot overflow.
inline SoftmaxLoss softmax_loss(const Vec& scores, int label) {
    if (label < 0 || label >= scores.size()) throw ConfigError("softmax_loss: label out of range");
    if (!scores.allFinite()) throw NumericError("softmax_loss: non-finite score");
    const double max_score = scores.maxCoeff();
    Vec p = (scores.array() - max_score).exp();
    const double z = p.sum();
    p /= z;
    SoftmaxLoss out;
    out.loss = std::log(z) - (scores[label] - max_score);
    out.gradient = p;
    out.gradient[label] -= 1.0;
    return out;
}

/// Log-partition log(sum_k exp(s_k)) with max-subtraction.
inline double log_sum_exp(const Vec& scores) {
    const double max_score = scores.maxCoeff();
    return max_score + std::log((scores.array() - max_score).exp().sum());
}

}  // namespace infinet
