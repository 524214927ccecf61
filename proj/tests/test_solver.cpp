#include <cmath>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "afba/momentum.hpp"
#include "afba/prox.hpp"
#include "afba/solver.hpp"
#include "afba/synthetic.hpp"
#include "support.hpp"

using afba::check_momentum_condition;
using afba::compute_trace_row;
using afba::fb_operator;
using afba::IterSnapshot;
using afba::make_lasso;
using afba::make_quadratic;
using afba::MomentumSchedule;
using afba::Problem;
using afba::solve;
using afba::SolveConfig;
using afba::SolveResult;
using afba::TraceRow;
using afba::Vector;

namespace {

// f(x) = (1/2)(x - 4)^2, g(x) = |x|; minimizer 3 in one dimension.
Problem shifted_scalar_problem() {
    Problem p;
    p.dimension = 1;
    p.lipschitz = 1.0;
    p.smooth_value = [](const Vector& x) { return 0.5 * (x[0] - 4.0) * (x[0] - 4.0); };
    p.smooth_grad = [](const Vector& x) { return Vector::Constant(1, x[0] - 4.0); };
    p.nonsmooth_value = [](const Vector& x) { return std::abs(x[0]); };
    p.nonsmooth_prox = [](const Vector& x, double scale) { return afba::prox_l1(x, scale); };
    return p;
}

}  // namespace

TEST_CASE("one forward-backward application on worked examples") {
    const Problem p = shifted_scalar_problem();

    // Full step: the gradient step lands on 4 regardless of y, then the
    // prox pulls it to 3.
    CHECK(fb_operator(p, 1.0, Vector::Zero(1))[0] == 3.0);
    CHECK(fb_operator(p, 1.0, Vector::Constant(1, -7.5))[0] == 3.0);
    // Half step from y = 0: shrink(0.5 * 0 + 2, 0.5) = 1.5.
    CHECK(fb_operator(p, 0.5, Vector::Zero(1))[0] == 1.5);

    // Two dimensions, f = (1/2)||x - c||^2, g = ||.||_1, beta = 1:
    // the operator is shrinkage of c.
    Problem q;
    q.dimension = 2;
    q.lipschitz = 1.0;
    Vector c(2);
    c << 3.0, -3.0;
    q.smooth_value = [c](const Vector& x) { return 0.5 * (x - c).squaredNorm(); };
    q.smooth_grad = [c](const Vector& x) { return Vector(x - c); };
    q.nonsmooth_value = [](const Vector& x) { return x.lpNorm<1>(); };
    q.nonsmooth_prox = [](const Vector& x, double scale) { return afba::prox_l1(x, scale); };
    const Vector got = fb_operator(q, 1.0, Vector::Zero(2));
    CHECK(got[0] == 2.0);
    CHECK(got[1] == -2.0);
}

TEST_CASE("step and dimension preconditions") {
    const Problem p = shifted_scalar_problem();
    CHECK_THROWS_AS(fb_operator(p, 0.0, Vector::Zero(1)), std::invalid_argument);
    CHECK_THROWS_AS(fb_operator(p, -0.5, Vector::Zero(1)), std::invalid_argument);
    CHECK_THROWS_AS(fb_operator(p, 1.5, Vector::Zero(1)), std::invalid_argument);
    CHECK_THROWS_AS(fb_operator(p, 1.0, Vector::Zero(2)), std::invalid_argument);
    CHECK_NOTHROW(fb_operator(p, 1.0, Vector::Zero(1)));  // beta = 1/L is allowed

    SolveConfig cfg;
    cfg.beta = 0.5;
    cfg.max_iters = 0;
    CHECK_THROWS_AS(solve(p, cfg), std::invalid_argument);
    cfg.max_iters = 10;
    cfg.trace_every = 0;
    CHECK_THROWS_AS(solve(p, cfg), std::invalid_argument);
    cfg.trace_every = 1;
    cfg.x0 = Vector::Zero(3);
    CHECK_THROWS_AS(solve(p, cfg), std::invalid_argument);
}

TEST_CASE("one-dimensional composite solve") {
    const Problem p = shifted_scalar_problem();
    SolveConfig cfg;
    cfg.beta = 0.5;
    cfg.max_iters = 60;
    cfg.fixed_point_tol = 1e-12;
    const SolveResult res = solve(p, cfg);
    CHECK(std::abs(res.solution[0] - 3.0) < 1e-8);
    CHECK(res.iterations <= 61);
    CHECK(res.fixed_point_residual < 1e-8);
}

TEST_CASE("separable quadratic reaches its center under every schedule") {
    const auto inst = make_quadratic(12, 7);
    for (const auto& sched : {MomentumSchedule::none(), MomentumSchedule::nesterov(),
                              MomentumSchedule::chambolle_dossal(3.01),
                              MomentumSchedule::generalized(0.5, 1.0, 1.0)}) {
        SolveConfig cfg;
        cfg.beta = 1.0 / inst.problem.lipschitz;
        cfg.schedule = sched;
        cfg.max_iters = 2000;
        cfg.fixed_point_tol = 1e-13;
        const SolveResult res = solve(inst.problem, cfg);
        CHECK((res.solution - inst.center).norm() < 1e-6);
        CHECK(res.fixed_point_residual < 1e-6);
    }
}

TEST_CASE("an explicit zero start equals the default start") {
    const auto inst = make_quadratic(6, 3);
    SolveConfig a, b;
    a.beta = b.beta = 1.0 / inst.problem.lipschitz;
    a.schedule = b.schedule = MomentumSchedule::nesterov();
    a.max_iters = b.max_iters = 50;
    b.x0 = Vector::Zero(6);
    b.x1 = Vector::Zero(6);
    const SolveResult ra = solve(inst.problem, a);
    const SolveResult rb = solve(inst.problem, b);
    CHECK(ra.solution == rb.solution);
}

TEST_CASE("runaway iterates abort with a numerical error") {
    // A deliberately wrong Lipschitz claim lets an oversized step through;
    // the iteration then doubles off to infinity and must be caught.
    Problem p;
    p.dimension = 1;
    p.lipschitz = 0.01;
    p.smooth_value = [](const Vector& x) { return 0.5 * x[0] * x[0]; };
    p.smooth_grad = [](const Vector& x) { return x; };
    p.nonsmooth_value = [](const Vector&) { return 0.0; };
    p.nonsmooth_prox = [](const Vector& x, double) { return x; };
    SolveConfig cfg;
    cfg.beta = 100.0;
    cfg.max_iters = 10000;
    cfg.x0 = Vector::Constant(1, 1.0);
    cfg.x1 = Vector::Constant(1, 1.0);
    CHECK_THROWS_AS(solve(p, cfg), afba::NumericalError);
}

TEST_CASE("plain iteration descends monotonically") {
    const auto inst = make_lasso(20, 50, 0.01, 1);
    SolveConfig cfg;
    cfg.beta = 1.0 / inst.problem.lipschitz;
    cfg.max_iters = 3000;
    const SolveResult res = solve(inst.problem, cfg);
    for (std::size_t i = 1; i < res.trace.rows.size(); ++i) {
        const double prev = res.trace.rows[i - 1].fv;
        REQUIRE(res.trace.rows[i].fv <= prev + 1e-12 * (1.0 + std::abs(prev)));
    }
}

TEST_CASE("trace cadence records strided rows plus the final iterate") {
    const auto inst = make_quadratic(4, 5);
    SolveConfig cfg;
    cfg.beta = 1.0 / inst.problem.lipschitz;
    cfg.max_iters = 10;
    cfg.trace_every = 3;
    const SolveResult res = solve(inst.problem, cfg);
    REQUIRE(res.trace.rows.size() == 5);
    CHECK(res.trace.rows[0].k == 1);
    CHECK(res.trace.rows[1].k == 4);
    CHECK(res.trace.rows[2].k == 7);
    CHECK(res.trace.rows[3].k == 10);
    CHECK(res.trace.rows[4].k == 11);
}

TEST_CASE("diagnostic row arithmetic on a worked example") {
    // F(x) = (1/2) x^2 in one dimension: pick iterates with known values.
    Problem p;
    p.dimension = 1;
    p.lipschitz = 1.0;
    p.smooth_value = [](const Vector& x) { return 0.5 * x[0] * x[0]; };
    p.smooth_grad = [](const Vector& x) { return x; };
    p.nonsmooth_value = [](const Vector&) { return 0.0; };
    p.nonsmooth_prox = [](const Vector& x, double) { return x; };

    const Vector x = Vector::Constant(1, std::sqrt(8.0));   // F = 4
    const Vector xp = Vector::Constant(1, std::sqrt(8.0));  // same point: dci = 0
    const Vector y = x;
    const double fv0 = 10.0, f_ref = 2.0, beta = 1.0;
    const TraceRow row = compute_trace_row(p, IterSnapshot{3, x, xp, y},
                                           MomentumSchedule::nesterov(), beta, fv0, f_ref,
                                           std::nullopt, nullptr);
    CHECK(row.fv == Catch::Approx(4.0).epsilon(1e-15));
    CHECK(row.eta == Catch::Approx(2.0).epsilon(1e-15));
    CHECK(row.nofv == Catch::Approx(0.25).epsilon(1e-15));  // (4 - 2) / (10 - 2)
    CHECK(row.dci == 0.0);
    CHECK(row.tau == 0.0);
    CHECK(std::isnan(row.epsilon));  // no reference point given

    // A degenerate reference equal to the start leaves the normalized
    // value undefined rather than dividing by zero.
    const TraceRow bad = compute_trace_row(p, IterSnapshot{3, x, xp, y},
                                           MomentumSchedule::nesterov(), beta, 4.0, 4.0,
                                           std::nullopt, nullptr);
    CHECK(std::isnan(bad.nofv));
    CHECK(bad.eta == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("composite energy declines once the gap inequality kicks in") {
    const auto inst = make_quadratic(10, 21);
    const auto sched = MomentumSchedule::generalized(0.5, 1.0, 1.0);
    SolveConfig cfg;
    cfg.beta = 1.0 / inst.problem.lipschitz;
    cfg.schedule = sched;
    cfg.max_iters = 500;
    cfg.f_ref = 0.0;
    cfg.x_ref = inst.center;
    const SolveResult res = solve(inst.problem, cfg);
    const auto audit = check_momentum_condition(sched, 500);
    REQUIRE(audit.gap);
    const double slack = 1e-9 * (1.0 + res.trace.rows.front().epsilon);
    for (std::size_t i = 1; i < res.trace.rows.size(); ++i) {
        if (res.trace.rows[i - 1].k <= audit.K_observed) continue;
        REQUIRE(res.trace.rows[i].epsilon <= res.trace.rows[i - 1].epsilon + slack);
    }
}

TEST_CASE("classic schedule honors its objective-gap bound") {
    const auto inst = make_quadratic(10, 22);
    SolveConfig cfg;
    cfg.beta = 1.0 / inst.problem.lipschitz;
    cfg.schedule = MomentumSchedule::nesterov();
    cfg.max_iters = 2000;
    cfg.f_ref = 0.0;
    cfg.x_ref = inst.center;
    const SolveResult res = solve(inst.problem, cfg);
    const double eps1 = res.trace.rows.front().epsilon;
    for (const TraceRow& row : res.trace.rows) {
        if (row.k < 2) continue;
        const double tprev = cfg.schedule.t(row.k - 1);
        const double bound = eps1 / (2.0 * cfg.beta * tprev * tprev);
        REQUIRE(row.eta <= bound * (1.0 + 1e-9) + 1e-15);
    }
}

TEST_CASE("momentum beats the plain iteration by an order of magnitude") {
    const auto inst = make_lasso(20, 50, 0.01, 1);
    SolveConfig ref;
    ref.beta = 1.0 / inst.problem.lipschitz;
    ref.schedule = MomentumSchedule::nesterov();
    ref.max_iters = 100000;
    ref.trace_every = 100000;
    const double f_star = solve(inst.problem, ref).trace.rows.back().fv;

    const auto gap_at = [&](const MomentumSchedule& s) {
        SolveConfig cfg;
        cfg.beta = ref.beta;
        cfg.schedule = s;
        cfg.max_iters = 5000;
        cfg.trace_every = 5000;
        return solve(inst.problem, cfg).trace.rows.back().fv - f_star;
    };
    const double plain = gap_at(MomentumSchedule::none());
    const double accelerated = gap_at(MomentumSchedule::generalized(1.0, 1.0 / 2.01, 1.0));
    REQUIRE(plain > 0.0);
    CHECK(accelerated < plain / 10.0);
}

TEST_CASE("trace serialization is stable and complete") {
    const auto inst = make_quadratic(5, 9);
    SolveConfig cfg;
    cfg.beta = 1.0 / inst.problem.lipschitz;
    cfg.schedule = MomentumSchedule::nesterov();
    cfg.max_iters = 12;
    cfg.f_ref = 0.0;
    const SolveResult res = solve(inst.problem, cfg);

    std::ostringstream os;
    afba::write_trace_csv(os, res.trace);
    const std::string text = os.str();
    std::istringstream lines(text);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "k,fv,nofv,eta,tau,dci,scaled_fv,scaled_dci,epsilon,train_acc,test_acc");

    std::string line;
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 10);
        // No reference point and no accuracy hook: the last three cells
        // must be empty.
        CHECK(line.substr(line.size() - 3) == ",,,");
        ++rows;
    }
    CHECK(rows == res.trace.rows.size());

    // The printed objective value round-trips to the exact double.
    const std::string first_fv = text.substr(text.find('\n') + 1);
    const std::string cell = first_fv.substr(first_fv.find(',') + 1);
    CHECK(std::stod(cell) == res.trace.rows.front().fv);

    std::ostringstream os2;
    afba::write_trace_csv(os2, res.trace);
    CHECK(os.str() == os2.str());
}
