// Command line front end for the accelerated forward-backward harness.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "afba/afba.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string data_dir = "data";
    std::string out_dir;
    std::int64_t max_iters = -1;
    std::int64_t trace_every = -1;
    std::int64_t seed = -1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("config", args.config, "experiment config file (key = value lines)")
        ->required();
    sub->add_option("--data-dir", args.data_dir,
                    "directory that relative data paths resolve against");
    sub->add_option("--out-dir", args.out_dir, "overrides the config's output directory");
    sub->add_option("--max-iters", args.max_iters, "overrides the config's iteration budget");
    sub->add_option("--trace-every", args.trace_every, "overrides the config's trace stride");
    sub->add_option("--seed", args.seed,
                    "overrides the problem seed (split.seed, lasso.seed or quadratic.seed)");
}

int run_mode(const CommonArgs& args, afba::RunMode mode) {
    afba::ExperimentConfig cfg = afba::load_config(args.config);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.max_iters >= 0) cfg.max_iters = args.max_iters;
    if (args.trace_every >= 0) cfg.trace_every = args.trace_every;
    if (args.seed >= 0) {
        const auto s = static_cast<std::uint64_t>(args.seed);
        switch (cfg.problem) {
            case afba::ProblemKind::Svm: cfg.split_seed = s; break;
            case afba::ProblemKind::Lasso: cfg.lasso_seed = s; break;
            case afba::ProblemKind::Quadratic: cfg.quadratic_seed = s; break;
        }
    }

    const afba::HarnessResult res = afba::run_harness(cfg, args.data_dir, mode);
    for (const afba::ScheduleRun& run : res.runs) {
        const afba::TraceRow& last = run.result.trace.rows.back();
        std::cout << run.schedule.id() << ": iters=" << run.result.iterations
                  << " final_fv=" << afba::csv_cell(last.fv);
        if (!std::isnan(last.nofv)) std::cout << " final_nofv=" << afba::csv_cell(last.nofv);
        if (!std::isnan(last.test_acc))
            std::cout << " test_acc=" << afba::csv_cell(last.test_acc);
        std::cout << '\n';
    }
    for (const std::string& path : res.written) std::cout << "wrote " << path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"accelerated forward-backward solver and experiment harness"};
    app.require_subcommand(1);

    CommonArgs solve_args, compare_args, table_args, rates_args;
    CLI::App* solve = app.add_subcommand("solve", "run the single configured schedule");
    add_common(solve, solve_args);
    CLI::App* compare = app.add_subcommand("compare", "run every configured schedule");
    add_common(compare, compare_args);
    CLI::App* table =
        app.add_subcommand("table", "iterations needed to reach each accuracy threshold");
    add_common(table, table_args);
    CLI::App* rates = app.add_subcommand("rates", "per-schedule convergence-rate reports");
    add_common(rates, rates_args);

    std::string spec;
    std::int64_t horizon = 10000;
    CLI::App* check =
        app.add_subcommand("check-schedule", "audit a momentum schedule's growth hypotheses");
    check->add_option("schedule", spec, "fba | fista | cd:<alpha> | gn:<omega>,<a>,<b>")
        ->required();
    check->add_option("--horizon", horizon, "scan length (default 10000)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed()) return run_mode(solve_args, afba::RunMode::Solve);
        if (compare->parsed()) return run_mode(compare_args, afba::RunMode::Compare);
        if (table->parsed()) return run_mode(table_args, afba::RunMode::Table);
        if (rates->parsed()) return run_mode(rates_args, afba::RunMode::Rates);
        if (check->parsed()) {
            const afba::MomentumSchedule sched = afba::parse_schedule_spec(spec);
            const afba::ConditionReport rep = afba::check_momentum_condition(sched, horizon);
            std::ostringstream os;
            afba::write_condition_report(os, spec, rep);
            std::cout << os.str();
            return 0;
        }
    } catch (const afba::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const afba::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const afba::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
