// Test-only reference implementations, kept independent of the library's
// solver path: a gradient-descent minimizer of the finite-dimensional primal
// and a golden-section search for one-dimensional dual problems.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Primal objective F(beta) = (1/m) sum_i [-s_{i,y_i} + log sum_k exp(s_ik)]
/// + (lambda/2) sum_k beta_k' G beta_k, scores s = G beta. Softmax written
/// out directly so this path shares nothing with the library.
inline double primal_objective(const Mat& gram, const std::vector<int>& labels, double lambda,
                               const Mat& beta) {
    const Mat scores = gram * beta;
    const long m = gram.rows();
    double loss = 0.0;
    for (long i = 0; i < m; ++i) {
        const double mx = scores.row(i).maxCoeff();
        double z = 0.0;
        for (long k = 0; k < scores.cols(); ++k) z += std::exp(scores(i, k) - mx);
        loss += mx + std::log(z) - scores(i, labels[static_cast<std::size_t>(i)]);
    }
    double quad = 0.0;
    for (long k = 0; k < beta.cols(); ++k) quad += beta.col(k).dot(gram * beta.col(k));
    return loss / static_cast<double>(m) + 0.5 * lambda * quad;
}

/// Full-batch gradient descent with Armijo backtracking on the primal.
/// Returns the best objective found.
inline double solve_primal_gd(const Mat& gram, const std::vector<int>& labels, double lambda,
                              int num_classes, int max_iters = 200000, double tol = 1e-12) {
    const long m = gram.rows();
    const long k = num_classes;
    Mat beta = Mat::Zero(m, k);
    double f = primal_objective(gram, labels, lambda, beta);
    double step = 1.0;
    for (int it = 0; it < max_iters; ++it) {
        const Mat scores = gram * beta;
        Mat p(m, k);
        for (long i = 0; i < m; ++i) {
            const double mx = scores.row(i).maxCoeff();
            double z = 0.0;
            for (long c = 0; c < k; ++c) {
                p(i, c) = std::exp(scores(i, c) - mx);
                z += p(i, c);
            }
            p.row(i) /= z;
            p(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
        }
        const Mat grad = gram * (p / static_cast<double>(m) + lambda * beta);
        const double gnorm2 = grad.squaredNorm();
        if (gnorm2 < tol * tol) break;

        step *= 2.0;  // allow growth, then backtrack
        double f_next = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            f_next = primal_objective(gram, labels, lambda, beta - step * grad);
            if (f_next <= f - 1e-4 * step * gnorm2) break;
            step *= 0.5;
        }
        if (f - f_next < 1e-16 * std::max(1.0, std::abs(f))) {
            beta -= step * grad;
            f = std::min(f, f_next);
            break;
        }
        beta -= step * grad;
        f = f_next;
    }
    return f;
}

/// Golden-section minimizer on [lo, hi] for smooth unimodal functions.
inline double golden_min(const std::function<double(double)>& fn, double lo, double hi,
                         int iters = 200) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = fn(c), fd = fn(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = fn(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace oracle
