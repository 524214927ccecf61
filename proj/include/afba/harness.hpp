#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "afba/dataio.hpp"
#include "afba/errors.hpp"
#include "afba/momentum.hpp"
#include "afba/solver.hpp"
#include "afba/svm.hpp"
#include "afba/synthetic.hpp"

namespace afba {

// "fba" | "fista" | "cd:<alpha>" | "gn:<omega>,<a>,<b>"
inline MomentumSchedule parse_schedule_spec(const std::string& text) {
    const auto bad = [&text](const std::string& why) {
        return std::invalid_argument("schedule '" + text + "': " + why);
    };
    if (text == "fba") return MomentumSchedule::none();
    if (text == "fista") return MomentumSchedule::nesterov();
    const std::size_t colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if (colon == std::string::npos || colon + 1 == text.size())
        throw bad("expected fba, fista, cd:<alpha> or gn:<omega>,<a>,<b>");
    const std::string args = text.substr(colon + 1);
    if (head == "cd") {
        double alpha = 0.0;
        if (!detail::parse_full_double(args.c_str(), alpha)) throw bad("bad alpha value");
        return MomentumSchedule::chambolle_dossal(alpha);
    }
    if (head == "gn") {
        std::vector<double> vals;
        std::size_t pos = 0;
        while (pos <= args.size()) {
            const std::size_t comma = args.find(',', pos);
            const std::string piece =
                args.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            double v = 0.0;
            if (!detail::parse_full_double(piece.c_str(), v)) throw bad("bad number '" + piece + "'");
            vals.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (vals.size() != 3) throw bad("expected three comma-separated values");
        return MomentumSchedule::generalized(vals[0], vals[1], vals[2]);
    }
    throw bad("unknown scheme '" + head + "'");
}

enum class ProblemKind { Quadratic, Lasso, Svm };

// Everything a run needs, read from a flat "key = value" file. Unknown or
// repeated keys are errors so typos cannot silently change an experiment.
struct ExperimentConfig {
    ProblemKind problem = ProblemKind::Quadratic;
    std::vector<std::string> schedule_texts;

    double beta = 0.0;  // 0 = auto (1/L)
    std::int64_t max_iters = 1000;
    std::int64_t trace_every = 1;
    std::string fref_policy = "auto";  // auto | none | exact | fista:<N>
    std::vector<double> thresholds;
    std::string out_dir = "out";

    std::string data_train, data_test;  // svm inputs, resolved later
    std::int64_t split_train_count = 0;
    std::uint64_t split_seed = 0;
    double svm_gamma = 0.0, svm_lambda = 0.0;

    std::int64_t lasso_rows = 20, lasso_cols = 50;
    double lasso_reg = 0.1;
    std::uint64_t lasso_seed = 1;

    std::int64_t quadratic_dim = 40;
    std::uint64_t quadratic_seed = 1;

    std::string config_path;  // where this was loaded from, for the manifest
};

namespace detail {

inline std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return std::string();
    const std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline std::int64_t require_int(const std::string& key, const std::string& value) {
    std::int64_t v = 0;
    if (!parse_full_int(value.c_str(), v))
        throw std::invalid_argument("config key '" + key + "': bad integer '" + value + "'");
    return v;
}

inline double require_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    if (!parse_full_double(value.c_str(), v))
        throw std::invalid_argument("config key '" + key + "': bad number '" + value + "'");
    return v;
}

}  // namespace detail

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);

    std::map<std::string, std::string> kv;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ParseError(line_no, "expected 'key = value'");
        const std::string key = detail::trim(body.substr(0, eq));
        const std::string value = detail::trim(body.substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "empty key");
        if (!kv.emplace(key, value).second)
            throw ParseError(line_no, "duplicate key '" + key + "'");
    }

    ExperimentConfig cfg;
    cfg.config_path = path;
    const auto take = [&kv](const std::string& key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    const auto problem = take("problem");
    if (!problem) throw std::invalid_argument("config is missing the 'problem' key");
    if (*problem == "quadratic")
        cfg.problem = ProblemKind::Quadratic;
    else if (*problem == "lasso")
        cfg.problem = ProblemKind::Lasso;
    else if (*problem == "svm")
        cfg.problem = ProblemKind::Svm;
    else
        throw std::invalid_argument("unknown problem '" + *problem + "'");

    const auto schedules = take("schedules");
    if (!schedules) throw std::invalid_argument("config is missing the 'schedules' key");
    cfg.schedule_texts = detail::split_ws(*schedules);
    if (cfg.schedule_texts.empty())
        throw std::invalid_argument("config lists no schedules");
    for (const std::string& s : cfg.schedule_texts) parse_schedule_spec(s);  // validate early

    if (const auto v = take("beta")) {
        if (*v != "auto") {
            cfg.beta = detail::require_double("beta", *v);
            if (!(cfg.beta > 0.0)) throw std::invalid_argument("beta must be positive or 'auto'");
        }
    }
    if (const auto v = take("max_iters")) {
        cfg.max_iters = detail::require_int("max_iters", *v);
        if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    }
    if (const auto v = take("trace_every")) {
        cfg.trace_every = detail::require_int("trace_every", *v);
        if (cfg.trace_every < 1) throw std::invalid_argument("trace_every must be positive");
    }
    if (const auto v = take("fref")) cfg.fref_policy = *v;
    if (const auto v = take("thresholds")) {
        for (const std::string& tok : detail::split_ws(*v)) {
            const double t = detail::require_double("thresholds", tok);
            if (!(t > 0.0) || t > 1.0)
                throw std::invalid_argument("thresholds must lie in (0, 1]");
            cfg.thresholds.push_back(t);
        }
    }
    if (const auto v = take("out")) cfg.out_dir = *v;

    if (const auto v = take("data.train")) cfg.data_train = *v;
    if (const auto v = take("data.test")) cfg.data_test = *v;
    if (const auto v = take("split.train_count"))
        cfg.split_train_count = detail::require_int("split.train_count", *v);
    if (const auto v = take("split.seed"))
        cfg.split_seed = static_cast<std::uint64_t>(detail::require_int("split.seed", *v));
    if (const auto v = take("svm.gamma")) cfg.svm_gamma = detail::require_double("svm.gamma", *v);
    if (const auto v = take("svm.lambda"))
        cfg.svm_lambda = detail::require_double("svm.lambda", *v);

    if (const auto v = take("lasso.rows")) cfg.lasso_rows = detail::require_int("lasso.rows", *v);
    if (const auto v = take("lasso.cols")) cfg.lasso_cols = detail::require_int("lasso.cols", *v);
    if (const auto v = take("lasso.reg")) cfg.lasso_reg = detail::require_double("lasso.reg", *v);
    if (const auto v = take("lasso.seed"))
        cfg.lasso_seed = static_cast<std::uint64_t>(detail::require_int("lasso.seed", *v));
    if (const auto v = take("quadratic.dim"))
        cfg.quadratic_dim = detail::require_int("quadratic.dim", *v);
    if (const auto v = take("quadratic.seed"))
        cfg.quadratic_seed = static_cast<std::uint64_t>(detail::require_int("quadratic.seed", *v));

    if (!kv.empty())
        throw std::invalid_argument("unknown config key '" + kv.begin()->first + "'");

    if (cfg.problem == ProblemKind::Svm) {
        if (cfg.data_train.empty())
            throw std::invalid_argument("svm problems need 'data.train'");
        if (!(cfg.svm_gamma > 0.0) || !(cfg.svm_lambda > 0.0))
            throw std::invalid_argument("svm problems need positive 'svm.gamma' and 'svm.lambda'");
        if (cfg.data_test.empty() && cfg.split_train_count <= 0)
            throw std::invalid_argument(
                "svm problems need either 'data.test' or a positive 'split.train_count'");
    } else if (!cfg.thresholds.empty()) {
        throw std::invalid_argument("accuracy thresholds make sense only for svm problems");
    }
    return cfg;
}

inline std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for hashing: " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256: digest initialization failed");
    }
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        char b[3];
        std::snprintf(b, sizeof b, "%02x", digest[i]);
        hex += b;
    }
    return hex;
}

// Problem plus everything derived from the config that every schedule
// shares: step size, reference value/point, accuracy hook, input hashes.
struct PreparedExperiment {
    Problem problem;
    std::shared_ptr<const SvmModel> svm;  // null unless the problem is svm
    SparseDataset train, test;            // populated for svm
    double beta = 0.0;
    std::optional<double> f_ref;
    std::optional<Vector> x_ref;
    std::string fref_note;  // resolved policy: exact | fista:<N> | none
    AccuracyFn accuracy;
    std::vector<std::pair<std::string, std::string>> manifest_extra;  // key, value
};

namespace detail {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace detail

inline std::string resolve_data_path(const std::string& value, const std::string& data_dir) {
    if (value.empty() || value.front() == '/') return value;
    return data_dir.empty() ? value : data_dir + "/" + value;
}

inline PreparedExperiment prepare(const ExperimentConfig& cfg, const std::string& data_dir) {
    PreparedExperiment prep;
    auto& extra = prep.manifest_extra;

    switch (cfg.problem) {
        case ProblemKind::Quadratic: {
            QuadraticInstance inst = make_quadratic(cfg.quadratic_dim, cfg.quadratic_seed);
            prep.problem = inst.problem;
            extra.emplace_back("quadratic.dim", std::to_string(cfg.quadratic_dim));
            extra.emplace_back("quadratic.seed", std::to_string(cfg.quadratic_seed));
            if (cfg.fref_policy == "auto" || cfg.fref_policy == "exact") {
                prep.f_ref = 0.0;
                prep.x_ref = inst.center;
                prep.fref_note = "exact";
            }
            break;
        }
        case ProblemKind::Lasso: {
            LassoInstance inst =
                make_lasso(cfg.lasso_rows, cfg.lasso_cols, cfg.lasso_reg, cfg.lasso_seed);
            prep.problem = inst.problem;
            extra.emplace_back("lasso.rows", std::to_string(cfg.lasso_rows));
            extra.emplace_back("lasso.cols", std::to_string(cfg.lasso_cols));
            extra.emplace_back("lasso.reg", detail::fmt_g17(cfg.lasso_reg));
            extra.emplace_back("lasso.seed", std::to_string(cfg.lasso_seed));
            if (cfg.fref_policy == "exact")
                throw std::invalid_argument("fref = exact needs a problem with a known optimum");
            break;
        }
        case ProblemKind::Svm: {
            const std::string train_path = resolve_data_path(cfg.data_train, data_dir);
            extra.emplace_back("data.train", train_path);
            extra.emplace_back("data.train.sha256", sha256_file(train_path));
            if (!cfg.data_test.empty()) {
                const std::string test_path = resolve_data_path(cfg.data_test, data_dir);
                prep.train = parse_libsvm_file(train_path);
                prep.test = parse_libsvm_file(test_path);
                // Queries may not introduce feature indices the model never saw.
                if (prep.test.num_features > prep.train.num_features)
                    throw DataError("test set uses feature index " +
                                    std::to_string(prep.test.num_features) +
                                    " beyond the training dimension " +
                                    std::to_string(prep.train.num_features));
                prep.test.num_features = prep.train.num_features;
                extra.emplace_back("data.test", test_path);
                extra.emplace_back("data.test.sha256", sha256_file(test_path));
            } else {
                const SparseDataset whole = parse_libsvm_file(train_path);
                auto parts = split(whole, cfg.split_train_count, cfg.split_seed);
                prep.train = std::move(parts.first);
                prep.test = std::move(parts.second);
                extra.emplace_back("split.train_count", std::to_string(cfg.split_train_count));
                extra.emplace_back("split.seed", std::to_string(cfg.split_seed));
            }
            extra.emplace_back("svm.gamma", detail::fmt_g17(cfg.svm_gamma));
            extra.emplace_back("svm.lambda", detail::fmt_g17(cfg.svm_lambda));
            auto [model, problem] = build_svm_problem(prep.train, cfg.svm_gamma, cfg.svm_lambda);
            prep.svm = model;
            prep.problem = std::move(problem);
            prep.accuracy = SvmAccuracy(model, prep.test);
            if (cfg.fref_policy == "exact")
                throw std::invalid_argument("fref = exact needs a problem with a known optimum");
            break;
        }
    }

    prep.beta = cfg.beta > 0.0 ? cfg.beta : 1.0 / prep.problem.lipschitz;
    check_step(prep.problem, prep.beta);

    // A reference objective from a long plain accelerated run, used to
    // normalize objective curves. The reference iterate doubles as the
    // reference point for lasso, where the long run converges tightly;
    // for svm the iterate is not trustworthy as a near-optimum, so only
    // the value is kept.
    if (prep.fref_note.empty()) {
        std::string policy = cfg.fref_policy;
        if (policy == "auto") policy = "fista:20000";
        if (policy == "none") {
            prep.fref_note = "none";
        } else if (policy.rfind("fista:", 0) == 0) {
            std::int64_t n = 0;
            if (!detail::parse_full_int(policy.substr(6).c_str(), n) || n < 1)
                throw std::invalid_argument("bad fref policy '" + cfg.fref_policy + "'");
            SolveConfig ref;
            ref.beta = prep.beta;
            ref.schedule = MomentumSchedule::nesterov();
            ref.max_iters = n;
            ref.trace_every = n;
            SolveResult res = solve(prep.problem, ref);
            prep.f_ref = res.trace.rows.back().fv;
            if (cfg.problem == ProblemKind::Lasso) prep.x_ref = res.solution;
            prep.fref_note = policy;
        } else {
            throw std::invalid_argument("bad fref policy '" + cfg.fref_policy + "'");
        }
    }
    return prep;
}

struct ScheduleRun {
    std::string text;  // as written in the config
    MomentumSchedule schedule = MomentumSchedule::none();
    SolveResult result;
};

// First trace k whose test accuracy reaches each threshold; -1 when the
// run never gets there.
inline std::vector<std::int64_t> iterations_to_accuracy(const SolverTrace& trace,
                                                        const std::vector<double>& thresholds) {
    std::vector<std::int64_t> out(thresholds.size(), -1);
    for (std::size_t t = 0; t < thresholds.size(); ++t)
        for (const TraceRow& r : trace.rows)
            if (!std::isnan(r.test_acc) && r.test_acc >= thresholds[t]) {
                out[t] = r.k;
                break;
            }
    return out;
}

inline void write_condition_report(std::ostream& os, const std::string& label,
                                   const ConditionReport& rep) {
    const auto yn = [](bool b) { return b ? "yes" : "no"; };
    os << "schedule = " << label << '\n';
    os << "horizon = " << rep.horizon << '\n';
    os << "nonzero = " << yn(rep.nonzero) << '\n';
    os << "gap = " << yn(rep.gap);
    if (rep.gap)
        os << " (rho = " << detail::fmt_g(rep.rho_observed) << ", K = " << rep.K_observed << ")";
    os << '\n';
    os << "ratio = " << yn(rep.ratio);
    if (rep.ratio)
        os << " (c1 = " << detail::fmt_g(rep.c1) << ", c2 = " << detail::fmt_g(rep.c2) << ")";
    os << '\n';
    os << "divergence = " << yn(rep.divergence) << " (partial sum = "
       << detail::fmt_g(rep.inv_t_partial_sum)
       << ", tail fraction = " << detail::fmt_g(rep.tail_sum_fraction) << ")\n";
    if (!rep.holds() && rep.witness_k > 0) os << "witness_k = " << rep.witness_k << '\n';
    os << "holds = " << yn(rep.holds()) << '\n';
}

namespace detail {

inline double median_of(std::vector<double> v) {
    if (v.empty()) return kMissing;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Convergence-rate digest of one traced run: decile medians of the scaled
// objective gap t_{k-1}^2 eta_k and scaled step t_{k-1} dci_k (both should
// drift toward zero when the momentum hypotheses hold), plus a
// monotonicity audit of the composite energy when a reference point was
// available. Needs trace_every = 1 to be meaningful.
inline void write_rate_report(std::ostream& os, const ScheduleRun& run) {
    const SolverTrace& trace = run.result.trace;
    os << "schedule = " << run.text << '\n';
    os << "iterations = " << run.result.iterations << '\n';
    if (!trace.rows.empty()) os << "final_fv = " << csv_cell(trace.rows.back().fv) << '\n';

    const std::int64_t horizon =
        std::max<std::int64_t>(10, run.result.iterations);
    const ConditionReport rep = check_momentum_condition(run.schedule, horizon);
    write_condition_report(os, run.text, rep);

    std::vector<double> sfv, sdci, eps;
    std::vector<std::int64_t> eps_k;
    for (const TraceRow& r : trace.rows) {
        if (!std::isnan(r.scaled_fv)) sfv.push_back(r.scaled_fv);
        if (!std::isnan(r.scaled_dci)) sdci.push_back(r.scaled_dci);
        if (!std::isnan(r.epsilon)) {
            eps.push_back(r.epsilon);
            eps_k.push_back(r.k);
        }
    }
    if (sfv.size() >= 20) {
        const std::size_t dec = sfv.size() / 10;
        const double fv_first = detail::median_of({sfv.begin(), sfv.begin() + dec});
        const double fv_last = detail::median_of({sfv.end() - dec, sfv.end()});
        const double dci_first = detail::median_of({sdci.begin(), sdci.begin() + dec});
        const double dci_last = detail::median_of({sdci.end() - dec, sdci.end()});
        os << "scaled_fv_decile_medians = " << detail::fmt_g(fv_first) << " -> "
           << detail::fmt_g(fv_last) << '\n';
        os << "scaled_dci_decile_medians = " << detail::fmt_g(dci_first) << " -> "
           << detail::fmt_g(dci_last) << '\n';
        os << "scaled_fv_shrinks = " << (fv_last <= 0.5 * fv_first ? "yes" : "no") << '\n';
        os << "scaled_dci_shrinks = " << (dci_last <= 0.5 * dci_first ? "yes" : "no") << '\n';
    } else {
        os << "scaled_diagnostics = unavailable (need a reference value and >= 20 traced rows)\n";
    }
    if (eps.size() >= 3) {
        // Adjacent rows only; with a sparser trace the audit is skipped.
        bool adjacent = true;
        for (std::size_t i = 1; i < eps_k.size(); ++i)
            if (eps_k[i] != eps_k[i - 1] + 1) adjacent = false;
        if (adjacent) {
            const double slack = 1e-9 * (1.0 + std::abs(eps.front()));
            double worst = 0.0;
            std::int64_t worst_k = 0;
            for (std::size_t i = 1; i < eps.size(); ++i) {
                if (eps_k[i - 1] <= rep.K_observed) continue;
                const double rise = eps[i] - eps[i - 1];
                if (rise > worst) {
                    worst = rise;
                    worst_k = eps_k[i];
                }
            }
            os << "energy_monotone = " << (worst <= slack ? "yes" : "no")
               << " (max rise = " << detail::fmt_g(worst);
            if (worst_k > 0) os << " at k = " << worst_k;
            os << ")\n";
        }
    }
}

enum class RunMode { Solve, Compare, Table, Rates };

struct HarnessResult {
    std::vector<ScheduleRun> runs;
    PreparedExperiment prep;
    std::vector<std::string> written;  // file paths, in write order
};

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << content;
    out.flush();
    if (!out) throw DataError("write failed for " + path);
}

}  // namespace detail

// Runs every schedule in the config sequentially (determinism beats
// parallel speed here), writes one trace CSV per schedule plus the
// mode-specific outputs and a manifest of resolved parameters and input
// hashes. Identical configs and flags produce byte-identical files.
inline HarnessResult run_harness(const ExperimentConfig& cfg_in, const std::string& data_dir,
                                 RunMode mode) {
    ExperimentConfig cfg = cfg_in;
    if (mode == RunMode::Solve && cfg.schedule_texts.size() != 1)
        throw std::invalid_argument("solve runs exactly one schedule; use compare for several");
    if (mode == RunMode::Table || mode == RunMode::Rates) cfg.trace_every = 1;
    if (mode == RunMode::Table) {
        if (cfg.problem != ProblemKind::Svm)
            throw std::invalid_argument("table needs an svm problem with accuracy thresholds");
        if (cfg.thresholds.empty())
            throw std::invalid_argument("table needs a nonempty 'thresholds' list");
    }

    {
        std::vector<std::string> ids;
        for (const std::string& text : cfg.schedule_texts)
            ids.push_back(parse_schedule_spec(text).id());
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            throw std::invalid_argument("schedule list contains duplicates");
    }

    HarnessResult out;
    out.prep = prepare(cfg, data_dir);
    const PreparedExperiment& prep = out.prep;

    std::filesystem::create_directories(cfg.out_dir);

    const bool want_accuracy = static_cast<bool>(prep.accuracy);
    for (const std::string& text : cfg.schedule_texts) {
        ScheduleRun run;
        run.text = text;
        run.schedule = parse_schedule_spec(text);
        SolveConfig sc;
        sc.beta = prep.beta;
        sc.schedule = run.schedule;
        sc.max_iters = cfg.max_iters;
        sc.trace_every = cfg.trace_every;
        sc.f_ref = prep.f_ref;
        sc.x_ref = prep.x_ref;
        if (want_accuracy) sc.accuracy = prep.accuracy;
        run.result = solve(prep.problem, sc);
        out.runs.push_back(std::move(run));
    }

    // The normalization target must not sit above anything a run reached,
    // else every normalized curve is anchored to a false zero.
    if (prep.f_ref) {
        double best = std::numeric_limits<double>::infinity();
        for (const ScheduleRun& r : out.runs)
            best = std::min(best, r.result.trace.rows.back().fv);
        if (best < *prep.f_ref - 1e-6 * (1.0 + std::abs(*prep.f_ref)))
            throw NumericalError("reference objective " + detail::fmt_g17(*prep.f_ref) +
                                 " sits above a reached value " + detail::fmt_g17(best) +
                                 "; rerun with a longer fref policy");
    }

    const auto emit = [&out](const std::string& path, const std::string& content) {
        detail::write_text_file(path, content);
        out.written.push_back(path);
    };

    for (const ScheduleRun& run : out.runs) {
        std::ostringstream os;
        write_trace_csv(os, run.result.trace);
        emit(cfg.out_dir + "/trace_" + run.schedule.id() + ".csv", os.str());
    }

    if (mode == RunMode::Compare || mode == RunMode::Solve) {
        std::ostringstream os;
        os << "schedule_id,final_fv,final_nofv,final_dci,iters_run";
        for (const double t : cfg.thresholds) os << ",k_at_" << detail::fmt_g(t);
        os << '\n';
        for (const ScheduleRun& run : out.runs) {
            const TraceRow& last = run.result.trace.rows.back();
            os << run.schedule.id() << ',' << csv_cell(last.fv) << ','
               << (std::isnan(last.nofv) ? "-" : csv_cell(last.nofv)) << ','
               << csv_cell(last.dci) << ',' << run.result.iterations;
            const auto ks = iterations_to_accuracy(run.result.trace, cfg.thresholds);
            for (const std::int64_t k : ks)
                os << ',' << (k < 0 ? std::string("-") : std::to_string(k));
            os << '\n';
        }
        emit(cfg.out_dir + "/summary.csv", os.str());
    }

    if (mode == RunMode::Table) {
        std::ostringstream os;
        os << "schedule_id";
        for (const double t : cfg.thresholds) os << ",k_at_" << detail::fmt_g(t);
        os << '\n';
        for (const ScheduleRun& run : out.runs) {
            os << run.schedule.id();
            const auto ks = iterations_to_accuracy(run.result.trace, cfg.thresholds);
            for (const std::int64_t k : ks)
                os << ',' << (k < 0 ? std::string("-") : std::to_string(k));
            os << '\n';
        }
        emit(cfg.out_dir + "/table.csv", os.str());
    }

    if (mode == RunMode::Rates) {
        for (const ScheduleRun& run : out.runs) {
            std::ostringstream os;
            write_rate_report(os, run);
            emit(cfg.out_dir + "/rates_" + run.schedule.id() + ".txt", os.str());
        }
    }

    {
        std::ostringstream os;
        const char* mode_name = mode == RunMode::Solve    ? "solve"
                                : mode == RunMode::Compare ? "compare"
                                : mode == RunMode::Table   ? "table"
                                                           : "rates";
        os << "command = " << mode_name << '\n';
        os << "config = " << cfg.config_path << '\n';
        if (!cfg.config_path.empty())
            os << "config.sha256 = " << sha256_file(cfg.config_path) << '\n';
        os << "problem = "
           << (cfg.problem == ProblemKind::Quadratic ? "quadratic"
               : cfg.problem == ProblemKind::Lasso   ? "lasso"
                                                     : "svm")
           << '\n';
        for (const auto& [k, v] : prep.manifest_extra) os << k << " = " << v << '\n';
        os << "schedules =";
        for (const std::string& s : cfg.schedule_texts) os << ' ' << s;
        os << '\n';
        os << "beta = " << detail::fmt_g17(prep.beta) << '\n';
        os << "lipschitz = " << detail::fmt_g17(prep.problem.lipschitz) << '\n';
        os << "f_ref = " << (prep.f_ref ? detail::fmt_g17(*prep.f_ref) : "none") << '\n';
        os << "f_ref.policy = " << prep.fref_note << '\n';
        os << "max_iters = " << cfg.max_iters << '\n';
        os << "trace_every = " << cfg.trace_every << '\n';
        os << "thresholds =";
        if (cfg.thresholds.empty())
            os << " none";
        else
            for (const double t : cfg.thresholds) os << ' ' << detail::fmt_g(t);
        os << '\n';
        emit(cfg.out_dir + "/manifest.txt", os.str());
    }

    return out;
}

}  // namespace afba
