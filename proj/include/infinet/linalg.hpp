#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "infinet/common.hpp"
#include "infinet/rng.hpp"

namespace infinet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr long kExactEigLimit = 400;

/// Minimum eigenvalue of a symmetric matrix. Exact up to kExactEigLimit;
/// beyond that, estimated by power iteration on (c*I - A) with c = max
/// Gershgorin bound, which converges to the smallest eigenvalue from above.
inline double min_eigenvalue(const Mat& a) {
    if (a.rows() != a.cols()) throw NumericError("min_eigenvalue: matrix not square");
    const long n = a.rows();
    if (n == 0) throw NumericError("min_eigenvalue: empty matrix");
    if (n <= kExactEigLimit) {
        Eigen::SelfAdjointEigenSolver<Mat> eig(a, Eigen::EigenvaluesOnly);
        return eig.eigenvalues().minCoeff();
    }
    const double c = a.cwiseAbs().rowwise().sum().maxCoeff();
    Rng rng(0x5ca1ab1eULL);
    Vec v(n);
    rng.fill_normal(v);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        Vec w = c * v - a * v;
        const double norm = w.norm();
        if (norm == 0.0) break;
        w /= norm;
        const double next = norm;
        if (it > 10 && std::abs(next - lambda) <= 1e-12 * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
        v = w;
    }
    return c - lambda;
}

}  // namespace infinet
