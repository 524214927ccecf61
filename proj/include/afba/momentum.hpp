#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace afba {

enum class ScheduleKind {
    NoMomentum,           // theta_k = 0: plain forward-backward
    ClassicNesterov,      // t_k = (1 + sqrt(1 + 4 t_{k-1}^2)) / 2, t_0 = 1
    ChambolleDossal,      // theta_k = (k - 1) / (k + alpha - 1), alpha > 3
    GeneralizedNesterov,  // t_k = a k^omega + b, omega in (0, 1], a > 0
};

// Extrapolation weight sequence theta_k = (t_{k-1} - 1) / t_k.
//
// The Chambolle-Dossal sequence is stored in power form (omega = 1,
// a = 1/(alpha - 1), b = 1), which reproduces (k - 1)/(k + alpha - 1)
// exactly, so every variant but the classic recursion shares one
// evaluation path. Immutable after construction; the classic-recursion
// memo table is shared between copies and grown under a lock.
class MomentumSchedule {
public:
    static MomentumSchedule none() { return MomentumSchedule(ScheduleKind::NoMomentum); }

    static MomentumSchedule nesterov() { return MomentumSchedule(ScheduleKind::ClassicNesterov); }

    static MomentumSchedule chambolle_dossal(double alpha) {
        if (!(alpha > 3.0))
            throw std::invalid_argument("chambolle_dossal: alpha must exceed 3");
        MomentumSchedule s(ScheduleKind::ChambolleDossal);
        s.alpha_ = alpha;
        s.omega_ = 1.0;
        s.a_ = 1.0 / (alpha - 1.0);
        s.b_ = 1.0;
        return s;
    }

    static MomentumSchedule generalized(double omega, double a, double b) {
        if (!(omega > 0.0) || omega > 1.0)
            throw std::invalid_argument("generalized: omega must lie in (0, 1]");
        if (!(a > 0.0)) throw std::invalid_argument("generalized: a must be positive");
        MomentumSchedule s(ScheduleKind::GeneralizedNesterov);
        s.omega_ = omega;
        s.a_ = a;
        s.b_ = b;
        return s;
    }

    ScheduleKind kind() const { return kind_; }
    double omega() const { return omega_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double alpha() const { return alpha_; }

    // t_k, k >= 0.
    double t(std::int64_t k) const {
        if (k < 0) throw std::invalid_argument("MomentumSchedule::t: negative index");
        switch (kind_) {
            case ScheduleKind::NoMomentum:
                return 1.0;
            case ScheduleKind::ClassicNesterov:
                return nesterov_t(k);
            default:
                return a_ * std::pow(static_cast<double>(k), omega_) + b_;
        }
    }

    // theta_k, k >= 1. Throws when the denominator t_k vanishes.
    double theta(std::int64_t k) const {
        if (k < 1) throw std::invalid_argument("MomentumSchedule::theta: index must be >= 1");
        if (kind_ == ScheduleKind::NoMomentum) return 0.0;
        const double tk = t(k);
        if (effectively_zero(tk))
            throw std::domain_error("momentum schedule has t_k = 0 at k = " + std::to_string(k));
        return (t(k - 1) - 1.0) / tk;
    }

    // Fail-fast scan for a vanishing t_k over 1..horizon, run before a long
    // solve. Only the power form with b < 0 can cross zero, and it does so
    // near k = (-b/a)^(1/omega), so two candidate indices suffice.
    void ensure_nonzero(std::int64_t horizon) const {
        if (kind_ != ScheduleKind::GeneralizedNesterov || b_ >= 0.0) return;
        const double kstar = std::pow(-b_ / a_, 1.0 / omega_);
        const std::int64_t lo = static_cast<std::int64_t>(std::floor(kstar));
        for (std::int64_t k = lo; k <= lo + 1; ++k) {
            if (k >= 1 && k <= horizon && effectively_zero(t(k)))
                throw std::domain_error("momentum schedule has t_k = 0 at k = " + std::to_string(k));
        }
    }

    // Short tag used to name per-schedule output files.
    std::string id() const {
        char buf[96];
        switch (kind_) {
            case ScheduleKind::NoMomentum:
                return "fba";
            case ScheduleKind::ClassicNesterov:
                return "fista";
            case ScheduleKind::ChambolleDossal:
                std::snprintf(buf, sizeof buf, "cd_a%g", alpha_);
                return buf;
            default:
                std::snprintf(buf, sizeof buf, "gn_w%g_a%g_b%g", omega_, a_, b_);
                return buf;
        }
    }

private:
    explicit MomentumSchedule(ScheduleKind kind) : kind_(kind) {
        if (kind == ScheduleKind::ClassicNesterov) memo_ = std::make_shared<NesterovMemo>();
    }

    static bool effectively_zero(double t) { return std::abs(t) < 1e-9; }

    struct NesterovMemo {
        std::mutex mutex;
        std::vector<double> t{1.0};  // t_0 = 1
    };

    double nesterov_t(std::int64_t k) const {
        std::lock_guard<std::mutex> lock(memo_->mutex);
        auto& tab = memo_->t;
        while (static_cast<std::int64_t>(tab.size()) <= k) {
            const double prev = tab.back();
            tab.push_back(0.5 * (1.0 + std::sqrt(1.0 + 4.0 * prev * prev)));
        }
        return tab[static_cast<std::size_t>(k)];
    }

    ScheduleKind kind_;
    double omega_ = 0.0;
    double a_ = 0.0;
    double b_ = 0.0;
    double alpha_ = 0.0;
    std::shared_ptr<NesterovMemo> memo_;
};

// Empirical witnesses for the four growth hypotheses on {t_k} under which
// the accelerated iteration attains its accelerated objective rate:
//   (i)   t_k never vanishes;
//   (ii)  1 <= t_{k-1} < rho * [t_{k-1}^2 - t_k (t_k - 1)] for all k past
//         some K, for a single constant rho;
//   (iii) t_{k-1}/t_k stays within fixed positive bounds [c1, c2];
//   (iv)  t_k grows without bound while sum 1/t_k diverges.
// A finite scan can only certify these up to `horizon`; (iv) in particular
// is reported as evidence of divergence, never as proof.
struct ConditionReport {
    bool nonzero = false;
    bool gap = false;
    bool ratio = false;
    bool divergence = false;
    bool holds() const { return nonzero && gap && ratio && divergence; }

    std::int64_t K_observed = 0;     // inequality (ii) held for all K_observed < k <= horizon
    double rho_observed = 0.0;       // power-of-two witness for (ii); 0 when none worked
    double c1 = 0.0, c2 = 0.0;       // observed range of t_{k-1}/t_k over the tail half
    std::int64_t horizon = 0;
    std::int64_t witness_k = 0;      // first offending index when a hypothesis fails, else 0
    double inv_t_partial_sum = 0.0;  // sum over k = 1..horizon of 1/t_k
    double tail_sum_fraction = 0.0;  // share of that sum contributed by the second half
};

inline ConditionReport check_momentum_condition(const MomentumSchedule& s, std::int64_t horizon) {
    if (horizon < 10)
        throw std::invalid_argument("check_momentum_condition: horizon must be at least 10");
    ConditionReport rep;
    rep.horizon = horizon;
    const auto note_witness = [&rep](std::int64_t k) {
        if (rep.witness_k == 0) rep.witness_k = k;
    };

    std::vector<double> t(static_cast<std::size_t>(horizon) + 1);
    for (std::int64_t k = 0; k <= horizon; ++k) t[static_cast<std::size_t>(k)] = s.t(k);

    rep.nonzero = true;
    for (std::int64_t k = 1; k <= horizon; ++k) {
        if (std::abs(t[static_cast<std::size_t>(k)]) < 1e-9) {
            rep.nonzero = false;
            note_witness(k);
            break;
        }
    }

    // (ii): search rho over powers of two. A witness counts only if the
    // inequality then holds over at least the tail half of the scan, so a
    // schedule cannot pass by pushing K toward the horizon.
    std::int64_t best_fail = horizon;
    for (double rho = 2.0; rho <= 65536.0; rho *= 2.0) {
        std::int64_t last_fail = 0;
        for (std::int64_t k = 1; k <= horizon; ++k) {
            const double tp = t[static_cast<std::size_t>(k - 1)];
            const double tk = t[static_cast<std::size_t>(k)];
            const double gap = tp * tp - tk * (tk - 1.0);
            if (!(tp >= 1.0 && tp < rho * gap)) last_fail = k;
        }
        if (last_fail * 2 <= horizon) {
            rep.gap = true;
            rep.rho_observed = rho;
            rep.K_observed = last_fail;
            break;
        }
        best_fail = std::min(best_fail, last_fail);
    }
    if (!rep.gap) note_witness(best_fail);

    // (iii): observed ratio bounds over the tail half.
    double c1 = std::numeric_limits<double>::infinity();
    double c2 = -std::numeric_limits<double>::infinity();
    bool ratio_ok = true;
    for (std::int64_t k = horizon / 2 + 1; k <= horizon; ++k) {
        const double tk = t[static_cast<std::size_t>(k)];
        if (!(tk > 0.0)) {
            ratio_ok = false;
            note_witness(k);
            break;
        }
        const double r = t[static_cast<std::size_t>(k - 1)] / tk;
        c1 = std::min(c1, r);
        c2 = std::max(c2, r);
    }
    rep.ratio = ratio_ok && c1 > 0.0;
    if (rep.ratio) {
        rep.c1 = c1;
        rep.c2 = c2;
    }

    // (iv): the sequence must still be growing at the horizon and the
    // partial sums of 1/t_k must not have plateaued.
    double sum_half = 0.0, sum_full = 0.0;
    for (std::int64_t k = 1; k <= horizon; ++k) {
        sum_full += 1.0 / t[static_cast<std::size_t>(k)];
        if (k == horizon / 2) sum_half = sum_full;
    }
    rep.inv_t_partial_sum = sum_full;
    rep.tail_sum_fraction = sum_full != 0.0 ? (sum_full - sum_half) / sum_full : 0.0;
    rep.divergence = t[static_cast<std::size_t>(horizon)] > t[static_cast<std::size_t>(horizon / 2)] &&
                     rep.tail_sum_fraction > 0.01;
    if (!rep.divergence) note_witness(horizon);

    return rep;
}

// d_k = t_{k-1}^2 - t_k (t_k - 1) for t_k = a k^omega + b with omega > 1.
// The sequence runs off to -infinity, which is what rules super-linear
// growth out of the admissible momentum family.
inline std::vector<double> super_linear_divergence(double omega, double a, double b,
                                                   std::int64_t k_max) {
    if (!(omega > 1.0))
        throw std::domain_error("super_linear_divergence: omega must exceed 1");
    if (a == 0.0) throw std::invalid_argument("super_linear_divergence: a must be nonzero");
    if (k_max < 1) throw std::invalid_argument("super_linear_divergence: k_max must be positive");
    std::vector<double> d(static_cast<std::size_t>(k_max));
    double t_prev = b;  // t_0 = a * 0^omega + b
    for (std::int64_t k = 1; k <= k_max; ++k) {
        const double tk = a * std::pow(static_cast<double>(k), omega) + b;
        d[static_cast<std::size_t>(k - 1)] = t_prev * t_prev - tk * (tk - 1.0);
        t_prev = tk;
    }
    return d;
}

}  // namespace afba
