#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "afba/errors.hpp"
#include "afba/momentum.hpp"

namespace afba {

using Vector = Eigen::VectorXd;

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Composite objective F = f + g: a smooth part with an L-Lipschitz
// gradient plus a nonsmooth part carried by its proximity operator.
struct Problem {
    std::function<double(const Vector&)> smooth_value;
    std::function<Vector(const Vector&)> smooth_grad;
    double lipschitz = 0.0;  // upper bound L on the gradient's Lipschitz constant
    std::function<double(const Vector&)> nonsmooth_value;
    // prox of (scale * g); scale is the step size beta.
    std::function<Vector(const Vector&, double)> nonsmooth_prox;
    Eigen::Index dimension = 0;

    double value(const Vector& x) const { return smooth_value(x) + nonsmooth_value(x); }
};

inline void check_step(const Problem& p, double beta) {
    if (!(p.lipschitz > 0.0))
        throw std::invalid_argument("problem needs a positive Lipschitz bound");
    if (!(beta > 0.0) || beta > (1.0 + 1e-12) / p.lipschitz)
        throw std::invalid_argument("step size must lie in (0, 1/L]");
}

// One forward-backward application: gradient step on f, prox step on g.
inline Vector fb_operator(const Problem& p, double beta, const Vector& y) {
    if (y.size() != p.dimension)
        throw std::invalid_argument("fb_operator: dimension mismatch");
    check_step(p, beta);
    return p.nonsmooth_prox(y - beta * p.smooth_grad(y), beta);
}

// One recorded iteration. Quantities that are unavailable for the run
// (no reference value, no accuracy hook, ...) stay NaN and serialize to
// empty CSV cells.
struct TraceRow {
    std::int64_t k = 0;
    double fv = kMissing;          // F(x^k)
    double nofv = kMissing;        // (F(x^k) - F_ref) / (F(x^0) - F_ref)
    double eta = kMissing;         // F(x^k) - F_ref
    double tau = kMissing;         // ||x^k - x^{k-1}||^2 / (2 beta)
    double dci = kMissing;         // ||x^k - x^{k-1}||
    double scaled_fv = kMissing;   // t_{k-1}^2 * eta
    double scaled_dci = kMissing;  // t_{k-1} * dci
    double epsilon = kMissing;     // 2 beta t_{k-1}^2 eta + ||t_k y^k + (1 - t_k) x^k - x_ref||^2
    double train_acc = kMissing;
    double test_acc = kMissing;
};

struct SolverTrace {
    std::vector<TraceRow> rows;
    double f_ref = kMissing;  // reference objective used for eta/nofv, NaN if none
    double fv0 = kMissing;    // F(x^0)
};

using AccuracyFn = std::function<std::pair<double, double>(const Vector&)>;

struct SolveConfig {
    double beta = 0.0;
    MomentumSchedule schedule = MomentumSchedule::none();
    std::int64_t max_iters = 1000;
    double fixed_point_tol = 0.0;  // 0 disables the early stopping test
    Vector x0, x1;                 // empty means the zero vector
    std::int64_t trace_every = 1;
    std::optional<double> f_ref;
    std::optional<Vector> x_ref;
    AccuracyFn accuracy;  // optional (train, test) accuracy of an iterate
};

struct SolveResult {
    Vector solution;
    SolverTrace trace;
    std::int64_t iterations = 0;        // index of the final iterate
    double fixed_point_residual = kMissing;  // ||T(x_final) - x_final||
};

struct IterSnapshot {
    std::int64_t k = 0;
    const Vector& x;       // x^k
    const Vector& x_prev;  // x^{k-1}
    const Vector& y;       // y^k
};

// Diagnostics for one iterate. eta and everything scaled by it need a
// reference objective; epsilon additionally needs a reference point.
inline TraceRow compute_trace_row(const Problem& p, const IterSnapshot& s,
                                  const MomentumSchedule& sched, double beta, double fv0,
                                  const std::optional<double>& f_ref,
                                  const std::optional<Vector>& x_ref,
                                  const AccuracyFn& accuracy) {
    TraceRow row;
    row.k = s.k;
    row.fv = p.value(s.x);
    row.dci = (s.x - s.x_prev).norm();
    row.tau = row.dci * row.dci / (2.0 * beta);
    if (f_ref) {
        const double t_prev = sched.t(s.k - 1);
        row.eta = row.fv - *f_ref;
        if (fv0 != *f_ref) row.nofv = (row.fv - *f_ref) / (fv0 - *f_ref);
        row.scaled_fv = t_prev * t_prev * row.eta;
        row.scaled_dci = t_prev * row.dci;
        if (x_ref) {
            const double t_k = sched.t(s.k);
            row.epsilon = 2.0 * beta * t_prev * t_prev * row.eta +
                          (t_k * s.y + (1.0 - t_k) * s.x - *x_ref).squaredNorm();
        }
    }
    if (accuracy) {
        const auto [train, test] = accuracy(s.x);
        row.train_acc = train;
        row.test_acc = test;
    }
    return row;
}

// Accelerated forward-backward iteration
//   y^k     = x^k + theta_k (x^k - x^{k-1})
//   x^{k+1} = prox_{beta g}(y^k - beta grad f(y^k))
// started from x^0 = x0, x^1 = x1. Trace rows are recorded at the start of
// each traced iteration (so y^k belongs to the same k as the row) plus one
// final row for the last iterate. With trace_every = 1 the rows cover
// every k, which the rate diagnostics rely on.
inline SolveResult solve(const Problem& p, const SolveConfig& cfg) {
    check_step(p, cfg.beta);
    if (cfg.max_iters < 1) throw std::invalid_argument("solve: max_iters must be positive");
    if (cfg.trace_every < 1) throw std::invalid_argument("solve: trace_every must be positive");
    if (p.dimension < 1) throw std::invalid_argument("solve: problem dimension must be positive");
    cfg.schedule.ensure_nonzero(cfg.max_iters + 1);

    Vector x_prev = cfg.x0.size() ? cfg.x0 : Vector::Zero(p.dimension);
    Vector x = cfg.x1.size() ? cfg.x1 : Vector::Zero(p.dimension);
    if (x_prev.size() != p.dimension || x.size() != p.dimension)
        throw std::invalid_argument("solve: start vectors have the wrong dimension");

    SolveResult res;
    res.trace.f_ref = cfg.f_ref ? *cfg.f_ref : kMissing;
    res.trace.fv0 = p.value(x_prev);

    const auto record = [&](std::int64_t k, const Vector& xk, const Vector& xp, const Vector& yk) {
        res.trace.rows.push_back(compute_trace_row(p, IterSnapshot{k, xk, xp, yk}, cfg.schedule,
                                                   cfg.beta, res.trace.fv0, cfg.f_ref, cfg.x_ref,
                                                   cfg.accuracy));
    };

    Vector y(p.dimension), x_next(p.dimension);
    std::int64_t k = 1;
    for (;; ++k) {
        y = x + cfg.schedule.theta(k) * (x - x_prev);
        if ((k - 1) % cfg.trace_every == 0) record(k, x, x_prev, y);
        x_next = p.nonsmooth_prox(y - cfg.beta * p.smooth_grad(y), cfg.beta);
        if (!x_next.allFinite())
            throw NumericalError("solve: non-finite iterate at iteration " + std::to_string(k + 1));
        const double step = (x_next - x).norm();
        const bool stop =
            cfg.fixed_point_tol > 0.0 && step <= cfg.fixed_point_tol * (1.0 + x.norm());
        x_prev.swap(x);
        x.swap(x_next);
        if (stop || k == cfg.max_iters) break;
    }

    y = x + cfg.schedule.theta(k + 1) * (x - x_prev);
    record(k + 1, x, x_prev, y);

    res.iterations = k + 1;
    res.solution = x;
    res.fixed_point_residual = (fb_operator(p, cfg.beta, x) - x).norm();
    return res;
}

// Shortest-round-trip decimal; NaN becomes an empty cell.
inline std::string csv_cell(double v) {
    if (std::isnan(v)) return std::string();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_trace_csv(std::ostream& os, const SolverTrace& trace) {
    os << "k,fv,nofv,eta,tau,dci,scaled_fv,scaled_dci,epsilon,train_acc,test_acc\n";
    for (const TraceRow& r : trace.rows) {
        os << r.k << ',' << csv_cell(r.fv) << ',' << csv_cell(r.nofv) << ',' << csv_cell(r.eta)
           << ',' << csv_cell(r.tau) << ',' << csv_cell(r.dci) << ',' << csv_cell(r.scaled_fv)
           << ',' << csv_cell(r.scaled_dci) << ',' << csv_cell(r.epsilon) << ','
           << csv_cell(r.train_acc) << ',' << csv_cell(r.test_acc) << '\n';
    }
}

}  // namespace afba
