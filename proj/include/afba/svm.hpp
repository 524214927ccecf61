#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "afba/dataio.hpp"
#include "afba/errors.hpp"
#include "afba/linalg.hpp"
#include "afba/prox.hpp"
#include "afba/solver.hpp"

namespace afba {

// One-sided quadratic hinge: (1 - t)^2 left of the margin, flat zero past
// it. C^1 with a 2-Lipschitz derivative, which is what gives the data
// term a Lipschitz gradient.
inline double squared_hinge(double t) { return t < 1.0 ? (1.0 - t) * (1.0 - t) : 0.0; }

inline double squared_hinge_deriv(double t) { return t < 1.0 ? 2.0 * (t - 1.0) : 0.0; }

// exp(-gamma ||a_i - b_j||^2) for every row pair, via the expansion
// ||a - b||^2 = ||a||^2 + ||b||^2 - 2 <a, b> with the negative tail
// clamped away. When both arguments are the same matrix the cancellation
// on the diagonal is exact, so K_ii = 1 and K = K^T hold bit for bit.
inline Eigen::MatrixXd gaussian_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                       double gamma) {
    if (a.cols() != b.cols())
        throw std::invalid_argument("gaussian_kernel: point dimensions differ");
    if (!(gamma > 0.0)) throw std::invalid_argument("gaussian_kernel: gamma must be positive");
    Eigen::VectorXd na(a.rows()), nb(b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) na[i] = a.row(i).dot(a.row(i));
    for (Eigen::Index j = 0; j < b.rows(); ++j) nb[j] = b.row(j).dot(b.row(j));
    Eigen::MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const double d2 = std::max(0.0, na[i] + nb[j] - 2.0 * a.row(i).dot(b.row(j)));
            k(i, j) = std::exp(-gamma * d2);
        }
    return k;
}

// Dense row-per-sample matrix with dim columns; indices past dim are an
// error, missing ones are zero.
inline Eigen::MatrixXd dense_points(const SparseDataset& ds, Eigen::Index dim) {
    Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.samples.size()), dim);
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
        for (const SparseFeature& f : ds.samples[i].features) {
            if (f.index > dim)
                throw DataError("sample feature index " + std::to_string(f.index) +
                                " exceeds dimension " + std::to_string(dim));
            pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f.index - 1)) = f.value;
        }
    return pts;
}

// Kernel model state for the sparse soft-margin classifier
//   min_w  sum_i h((Y [K 1] w)_i) + lambda ||w_{1..m}||_1
// where h is the quadratic hinge, K the Gaussian Gram matrix of the
// training points and w = (alpha, intercept) has length m + 1. Only the
// m kernel coefficients are penalized; the intercept rides along free.
struct SvmModel {
    double gamma = 0.0;
    double lambda = 0.0;
    Eigen::Index m = 0;             // training samples
    Eigen::MatrixXd train_points;   // m x d
    Eigen::VectorXd labels;         // entries in {-1, +1}
    Eigen::MatrixXd kernel;         // K, m x m
    Eigen::MatrixXd design;         // B = Y [K 1], m x (m + 1)
    double design_norm = 0.0;       // ||B||_2
    double lipschitz = 0.0;         // 2 ||B||_2^2, padded upward a hair
};

// Builds the model and the composite objective over w in R^{m+1}.
// The gradient bound 2 sigma^2 is padded by a relative 1e-4 so the
// spectral-norm estimate erring low can never push beta = 1/L past the
// true 1/L.
inline std::pair<std::shared_ptr<const SvmModel>, Problem> build_svm_problem(
    const SparseDataset& train, double gamma, double lambda) {
    if (!(gamma > 0.0)) throw std::invalid_argument("build_svm_problem: gamma must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("build_svm_problem: lambda must be positive");
    const Eigen::Index m = static_cast<Eigen::Index>(train.samples.size());
    if (m < 2) throw DataError("build_svm_problem: need at least two training samples");
    if (train.num_features < 1) throw DataError("build_svm_problem: training set has no features");

    auto model = std::make_shared<SvmModel>();
    model->gamma = gamma;
    model->lambda = lambda;
    model->m = m;
    model->train_points = dense_points(train, train.num_features);
    model->labels.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const int lab = train.samples[static_cast<std::size_t>(i)].label;
        if (lab != -1 && lab != 1)
            throw DataError("build_svm_problem: labels must be -1 or +1");
        model->labels[i] = lab;
    }
    model->kernel = gaussian_kernel(model->train_points, model->train_points, gamma);
    model->design.resize(m, m + 1);
    model->design.leftCols(m) = model->kernel;
    model->design.col(m).setOnes();
    model->design.array().colwise() *= model->labels.array();
    model->design_norm = spectral_norm(model->design, 1e-6);
    model->lipschitz = 2.0 * model->design_norm * model->design_norm * (1.0 + 1e-4);

    Problem p;
    p.dimension = m + 1;
    p.lipschitz = model->lipschitz;
    std::shared_ptr<const SvmModel> hold = model;
    p.smooth_value = [hold](const Vector& w) {
        const Vector u = hold->design * w;
        double s = 0.0;
        for (Eigen::Index i = 0; i < u.size(); ++i) s += squared_hinge(u[i]);
        return s;
    };
    p.smooth_grad = [hold](const Vector& w) {
        Vector u = hold->design * w;
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = squared_hinge_deriv(u[i]);
        return Vector(hold->design.transpose() * u);
    };
    const double lam = lambda;
    p.nonsmooth_value = [lam](const Vector& w) {
        return lam * w.head(w.size() - 1).lpNorm<1>();
    };
    p.nonsmooth_prox = [lam](const Vector& w, double scale) {
        return prox_l1_keep_last(w, scale * lam);
    };
    return {std::move(model), std::move(p)};
}

// Kernel values of each query point against the training set; rows follow
// the query order. Queries may use fewer features than the training data
// (absent ones are zero) but never more.
inline Eigen::MatrixXd cross_kernel(const SvmModel& model, const SparseDataset& points) {
    if (points.num_features > model.train_points.cols())
        throw DataError("cross_kernel: query uses feature index " +
                        std::to_string(points.num_features) + " but the model has only " +
                        std::to_string(model.train_points.cols()));
    const Eigen::MatrixXd pts = dense_points(points, model.train_points.cols());
    return gaussian_kernel(pts, model.train_points, model.gamma);
}

// sign(sum_j alpha_j K(x_j, x) + intercept) with sign(0) taken as +1.
inline std::vector<int> predict(const Vector& w, const SvmModel& model,
                                const SparseDataset& points) {
    if (w.size() != model.m + 1)
        throw std::invalid_argument("predict: weight vector must have length m + 1");
    const Eigen::MatrixXd kc = cross_kernel(model, points);
    Vector dec = kc * w.head(model.m);
    dec.array() += w[model.m];
    std::vector<int> out(points.samples.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = dec[static_cast<Eigen::Index>(i)] >= 0.0 ? 1 : -1;
    return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& actual) {
    if (predicted.size() != actual.size() || predicted.empty())
        throw std::invalid_argument("accuracy: label lists must be nonempty and equal length");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == actual[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(predicted.size());
}

// Per-iterate train/test accuracy with the cross-kernel block computed
// once up front; suitable as a SolveConfig accuracy hook.
class SvmAccuracy {
public:
    SvmAccuracy(std::shared_ptr<const SvmModel> model, const SparseDataset& test)
        : model_(std::move(model)), test_cross_(cross_kernel(*model_, test)) {
        train_labels_.resize(static_cast<std::size_t>(model_->m));
        for (Eigen::Index i = 0; i < model_->m; ++i)
            train_labels_[static_cast<std::size_t>(i)] = static_cast<int>(model_->labels[i]);
        test_labels_.reserve(test.samples.size());
        for (const SparseSample& s : test.samples) test_labels_.push_back(s.label);
    }

    std::pair<double, double> operator()(const Vector& w) const {
        return {side(model_->kernel, train_labels_, w), side(test_cross_, test_labels_, w)};
    }

private:
    double side(const Eigen::MatrixXd& kernel_block, const std::vector<int>& labels,
                const Vector& w) const {
        Vector dec = kernel_block * w.head(model_->m);
        dec.array() += w[model_->m];
        std::size_t hit = 0;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if ((dec[static_cast<Eigen::Index>(i)] >= 0.0 ? 1 : -1) == labels[i]) ++hit;
        return static_cast<double>(hit) / static_cast<double>(labels.size());
    }

    std::shared_ptr<const SvmModel> model_;
    Eigen::MatrixXd test_cross_;
    std::vector<int> train_labels_, test_labels_;
};

}  // namespace afba
