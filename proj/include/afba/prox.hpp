#pragma once

#include <stdexcept>

#include <Eigen/Core>

namespace afba {

// Scalar shrinkage: max(|t| - mu, 0) * sign(t), with sign(0) = 0.
inline double soft_threshold(double t, double mu) {
    if (mu < 0.0) throw std::domain_error("soft_threshold: negative threshold");
    if (t > mu) return t - mu;
    if (t < -mu) return t + mu;
    return 0.0;
}

// Componentwise shrinkage; the minimizer of (1/2)||u - v||^2 + mu ||u||_1.
inline Eigen::VectorXd prox_l1(const Eigen::VectorXd& v, double mu) {
    if (mu < 0.0) throw std::domain_error("prox_l1: negative threshold");
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = soft_threshold(v[i], mu);
    return out;
}

// Shrinks every coordinate except the last, which passes through untouched.
// The last slot carries the unpenalized intercept of a linear model.
inline Eigen::VectorXd prox_l1_keep_last(const Eigen::VectorXd& w, double mu) {
    if (w.size() == 0) throw std::invalid_argument("prox_l1_keep_last: empty vector");
    if (mu < 0.0) throw std::domain_error("prox_l1_keep_last: negative threshold");
    Eigen::VectorXd out(w.size());
    const Eigen::Index last = w.size() - 1;
    for (Eigen::Index i = 0; i < last; ++i) out[i] = soft_threshold(w[i], mu);
    out[last] = w[last];
    return out;
}

}  // namespace afba
