#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>

#include "afba/dataio.hpp"
#include "afba/linalg.hpp"
#include "afba/prox.hpp"
#include "afba/rng.hpp"
#include "afba/solver.hpp"

namespace afba {

// min_x (1/2)||A x - c||^2 + reg ||x||_1 on a seeded Gaussian design with
// a planted sparse signal and mild observation noise. Underdetermined by
// default, so the l1 term actually decides the solution.
struct LassoInstance {
    Eigen::MatrixXd a;
    Vector c;
    double reg = 0.0;
    Problem problem;
};

inline LassoInstance make_lasso(Eigen::Index rows, Eigen::Index cols, double reg,
                                std::uint64_t seed) {
    if (rows < 1 || cols < 2) throw std::invalid_argument("make_lasso: degenerate shape");
    if (!(reg > 0.0)) throw std::invalid_argument("make_lasso: reg must be positive");
    Rng rng(seed);
    LassoInstance inst;
    inst.a = rng.normal_matrix(rows, cols);
    Vector planted = Vector::Zero(cols);
    const Eigen::Index support = std::min<Eigen::Index>(5, cols / 2);
    for (Eigen::Index i = 0; i < support; ++i)
        planted[static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(cols)))] =
            rng.uniform01() < 0.5 ? -1.0 : 1.0;
    inst.c = inst.a * planted + 0.05 * rng.normal_vector(rows);
    inst.reg = reg;

    const double sigma = spectral_norm(inst.a, 1e-12);
    Problem p;
    p.dimension = cols;
    p.lipschitz = sigma * sigma * (1.0 + 1e-9);
    const Eigen::MatrixXd a = inst.a;
    const Vector c = inst.c;
    p.smooth_value = [a, c](const Vector& x) { return 0.5 * (a * x - c).squaredNorm(); };
    p.smooth_grad = [a, c](const Vector& x) { return Vector(a.transpose() * (a * x - c)); };
    p.nonsmooth_value = [reg](const Vector& x) { return reg * x.lpNorm<1>(); };
    p.nonsmooth_prox = [reg](const Vector& x, double scale) { return prox_l1(x, scale * reg); };
    inst.problem = std::move(p);
    return inst;
}

// Separable quadratic (1/2) sum_i w_i (x_i - center_i)^2 with no
// nonsmooth part; the exact minimizer and value F* = 0 are known, which
// makes it the instance of choice for testing reference-based
// diagnostics.
struct QuadraticInstance {
    Vector weights;
    Vector center;
    Problem problem;
};

inline QuadraticInstance make_quadratic(Eigen::Index dim, std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("make_quadratic: dimension must be positive");
    Rng rng(seed);
    QuadraticInstance inst;
    inst.weights.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) inst.weights[i] = rng.uniform(0.1, 2.0);
    inst.center = 3.0 * rng.normal_vector(dim);

    Problem p;
    p.dimension = dim;
    p.lipschitz = inst.weights.maxCoeff();
    const Vector w = inst.weights, c = inst.center;
    p.smooth_value = [w, c](const Vector& x) {
        return 0.5 * (w.array() * (x - c).array().square()).sum();
    };
    p.smooth_grad = [w, c](const Vector& x) { return Vector(w.array() * (x - c).array()); };
    p.nonsmooth_value = [](const Vector&) { return 0.0; };
    p.nonsmooth_prox = [](const Vector& x, double) { return x; };
    inst.problem = std::move(p);
    return inst;
}

// Two mirrored Gaussian clumps written as a dense sparse-format dataset.
// Labels alternate with the row index, so an order-preserving split keeps
// the classes balanced. `separation` is the distance between the class
// centers, `spread` the within-class standard deviation.
inline SparseDataset make_blobs(std::int64_t count, std::int64_t dim, double spread,
                                double separation, std::uint64_t seed) {
    if (count < 2 || dim < 1) throw std::invalid_argument("make_blobs: degenerate shape");
    Rng rng(seed);
    Vector dir = rng.normal_vector(dim);
    dir.normalize();
    const Vector center = (separation / 2.0) * dir;

    SparseDataset ds;
    ds.num_features = dim;
    ds.samples.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        const Vector x = label * center + spread * rng.normal_vector(dim);
        SparseSample s;
        s.label = label;
        s.features.reserve(static_cast<std::size_t>(dim));
        for (std::int64_t j = 0; j < dim; ++j)
            s.features.push_back(SparseFeature{j + 1, x[static_cast<Eigen::Index>(j)]});
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace afba
