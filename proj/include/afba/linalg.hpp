#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "afba/errors.hpp"
#include "afba/rng.hpp"

namespace afba {

// Largest singular value by power iteration on A^T A, started from a fixed
// seeded direction so repeated calls agree bit for bit. The raw estimate
// sequence sigma_n converges geometrically with ratio (sigma2/sigma1)^2;
// the stop rule extrapolates that ratio from consecutive changes so the
// returned value is within roughly tol * sigma of the true norm even when
// the top singular values are close.
inline double spectral_norm(const Eigen::MatrixXd& mat, double tol = 1e-10) {
    if (mat.size() == 0) throw std::invalid_argument("spectral_norm: empty matrix");
    if (!(tol > 0.0)) throw std::invalid_argument("spectral_norm: tol must be positive");
    if (mat.isZero(0.0)) throw std::invalid_argument("spectral_norm: zero matrix");

    Rng rng(0x5eed0001ULL);
    Eigen::VectorXd v = rng.normal_vector(mat.cols());
    v.normalize();

    double sigma_prev = -1.0, change_prev = -1.0;
    for (int iter = 0; iter < 200000; ++iter) {
        const Eigen::VectorXd u = mat * v;
        const double sigma = u.norm();
        if (!(sigma > 0.0))
            throw NumericalError("spectral_norm: start direction fell into the null space");
        if (sigma_prev >= 0.0) {
            const double change = std::abs(sigma - sigma_prev);
            double ratio = (change_prev > 0.0 && change > 0.0) ? change / change_prev : 0.0;
            ratio = std::clamp(ratio, 0.0, 0.995);
            const double err_est = ratio > 0.0 ? change * ratio / (1.0 - ratio) : change;
            if (change <= tol * sigma && err_est <= tol * sigma) return sigma;
            change_prev = change;
        }
        sigma_prev = sigma;
        // v ends normalized; ||A^T u|| > 0 because sigma = ||A v|| > 0 above.
        v = mat.transpose() * u;
        v /= v.norm();
    }
    throw NumericalError("spectral_norm: power iteration did not converge");
}

}  // namespace afba
