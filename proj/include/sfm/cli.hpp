#pragma once

// `sfm` command dispatch. run_command never writes to the process streams;
// the caller decides where the payload and diagnostics go.

#include <cmath>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "sfm/classify.hpp"
#include "sfm/dataset.hpp"
#include "sfm/mc.hpp"
#include "sfm/moments.hpp"
#include "sfm/report.hpp"
#include "sfm/solver.hpp"

#ifndef SFM_DEFAULT_DATA
#define SFM_DEFAULT_DATA "data/mp_1889_1978.csv"
#endif

namespace sfm::cli {

enum ExitCode : int { ok = 0, usage_error = 1, data_error = 2, numerical_failure = 3 };

struct CommandOutcome {
    int exit_code = ok;
    std::string out;
    std::string err;
};

namespace detail {

struct Common {
    std::string data;
    std::string variance = "sample";
    std::string eq3 = "printed";
    std::string lnex = "arithmetic";
    std::string format = "table";
};

inline void add_model_flags(CLI::App* cmd, Common& c) {
    cmd->add_option("--variance", c.variance, "Variance convention")
        ->check(CLI::IsMember({"sample", "population"}));
    cmd->add_option("--eq3", c.eq3, "Equity Euler equation variant")->check(CLI::IsMember({"printed", "rederived"}));
    cmd->add_option("--lnex", c.lnex, "ln E(x) evaluation")->check(CLI::IsMember({"arithmetic", "lognormal"}));
}

inline void add_format_flag(CLI::App* cmd, Common& c) {
    cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"table", "json"}));
}

inline ModelOptions model_options(const Common& c) { return {parse_eq3_variant(c.eq3), parse_lnex_mode(c.lnex)}; }

inline MomentSet load_moments(const Common& c) {
    return estimate_moments(growth_series(load_series(c.data)), parse_variance_convention(c.variance));
}

inline double effective_gap(const MomentSet& m, const ModelOptions& o) {
    return o.lnex == LnExMode::arithmetic ? lognormality_gap(m) : 0.0;
}

}  // namespace detail

/// argv without the program name, e.g. {"solve", "--data", "file.csv"}.
inline CommandOutcome run_command(const std::vector<std::string>& argv) {
    CLI::App app{"Sufficiency factor model calibration", "sfm"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    detail::Common common;

    auto* moments_cmd = app.add_subcommand("moments", "Estimate sample moments and the lognormality gap (JSON)");
    moments_cmd->add_option("--data", common.data, "Canonical CSV file")->required();
    moments_cmd->add_option("--variance", common.variance, "Variance convention")
        ->check(CLI::IsMember({"sample", "population"}));

    ModelParams initial{0.99, 1.0, 1.0, 2.0};
    auto* solve_cmd = app.add_subcommand("solve", "Solve the four-equation system by damped least squares");
    solve_cmd->add_option("--data", common.data, "Canonical CSV file")->required();
    solve_cmd->add_option("--beta0", initial.beta, "Initial discount factor");
    solve_cmd->add_option("--omega0", initial.omega, "Initial risk-free sufficiency factor");
    solve_cmd->add_option("--delta0", initial.delta, "Initial equity sufficiency factor");
    solve_cmd->add_option("--tau0", initial.tau, "Initial relative risk aversion");
    detail::add_model_flags(solve_cmd, common);
    detail::add_format_flag(solve_cmd, common);

    double tau_min = 0.5, tau_max = 5.0;
    std::size_t steps = 450;
    auto* manifold_cmd = app.add_subcommand("manifold", "Trace the one-parameter solution family over tau");
    manifold_cmd->add_option("--data", common.data, "Canonical CSV file")->required();
    manifold_cmd->add_option("--tau-min", tau_min, "Lower end of the tau grid")->required();
    manifold_cmd->add_option("--tau-max", tau_max, "Upper end of the tau grid")->required();
    manifold_cmd->add_option("--steps", steps, "Number of grid intervals")->required()->check(CLI::PositiveNumber);
    detail::add_model_flags(manifold_cmd, common);
    detail::add_format_flag(manifold_cmd, common);

    std::size_t draws = 1000000;
    std::uint64_t seed = 42;
    auto* validate_cmd = app.add_subcommand("validate", "Monte Carlo check of the lognormal covariance identities");
    validate_cmd->add_option("--draws", draws, "Draws per identity case");
    validate_cmd->add_option("--seed", seed, "Random seed");
    validate_cmd->add_option("--data", common.data, "CSV supplying the MRS cases (defaults to the bundled series)");
    validate_cmd->add_option("--variance", common.variance, "Variance convention")
        ->check(CLI::IsMember({"sample", "population"}));
    detail::add_format_flag(validate_cmd, common);

    ClassifyInputs ci;
    std::string scenarios = "returns";
    auto* classify_cmd = app.add_subcommand("classify", "Certain/uncertain utility and risk-attitude labels");
    classify_cmd->add_option("--data", common.data, "Canonical CSV file")->required();
    classify_cmd->add_option("--year", ci.year, "Calendar year")->required();
    classify_cmd->add_option("--beta", ci.beta, "Discount factor")->required();
    classify_cmd->add_option("--tau", ci.tau, "Relative risk aversion")->required();
    classify_cmd->add_option("--sfom-equity", ci.sfom_equity, "Equity sufficiency factor")->required();
    classify_cmd->add_option("--sfom-riskfree", ci.sfom_riskfree, "Risk-free sufficiency factor")->required();
    classify_cmd->add_option("--scenarios", scenarios, "Uncertain-utility scenarios")
        ->check(CLI::IsMember({"returns", "growth"}));
    detail::add_format_flag(classify_cmd, common);

    CommandOutcome res;
    try {
        std::vector<std::string> reversed(argv.rbegin(), argv.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        res.out = app.help();
        return res;
    } catch (const CLI::CallForAllHelp&) {
        res.out = app.help("", CLI::AppFormatMode::All);
        return res;
    } catch (const CLI::ParseError& e) {
        res.exit_code = usage_error;
        res.err = std::string("error: ") + e.what() + "\nRun with --help for usage.\n";
        return res;
    }

    const bool json = common.format == "json";
    try {
        if (moments_cmd->parsed()) {
            res.out = dump_json(to_json(detail::load_moments(common)));
        } else if (solve_cmd->parsed()) {
            const ModelOptions opts = detail::model_options(common);
            SolverConfig cfg;
            cfg.initial = initial;
            cfg.options = opts;
            initial.validate();
            const MomentSet m = detail::load_moments(common);
            const Solution s = solve(m, cfg);
            const double gap = detail::effective_gap(m, opts);
            res.out = json ? dump_json(to_json(s, gap)) : solution_table(s, gap, rank_diagnostics(m, s.params, opts));
        } else if (manifold_cmd->parsed()) {
            const ModelOptions opts = detail::model_options(common);
            const MomentSet m = detail::load_moments(common);
            const auto pts = trace_manifold(m, tau_grid(tau_min, tau_max, steps + 1), opts);
            if (json) {
                Json arr = Json::array();
                for (const auto& p : pts) arr.push_back(to_json(p));
                res.out = dump_json(arr);
            } else {
                res.out = manifold_table(pts);
            }
        } else if (validate_cmd->parsed()) {
            if (common.data.empty()) common.data = SFM_DEFAULT_DATA;
            const MomentSet m = detail::load_moments(common);
            const auto rep = mc::validate_identities(draws, seed, m);
            const std::string payload = json ? dump_json(to_json(rep)) : validation_table(rep);
            if (rep.all_pass()) {
                res.out = payload;
            } else {
                res.exit_code = numerical_failure;
                res.err = payload + "error: at least one identity is outside the acceptance band\n";
            }
        } else if (classify_cmd->parsed()) {
            ci.scenarios = parse_scenario_source(scenarios);
            const MarketSeries series = load_series(common.data);
            const auto rows = investor_reports(series, ci);
            if (json) {
                Json arr = Json::array();
                for (const auto& r : rows) arr.push_back(to_json(r));
                res.out = dump_json(arr);
            } else {
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    if (i > 0) res.out += "\n";
                    res.out += investor_table(rows[i]);
                }
            }
        }
    } catch (const DataError& e) {
        res = {data_error, "", std::string("data error: ") + e.what() + "\n"};
    } catch (const SolverError& e) {
        res = {numerical_failure, "", std::string("solver error: ") + e.what() + "\n"};
    } catch (const SingularSubsystemError& e) {
        res = {numerical_failure, "", std::string("numerical error: ") + e.what() + "\n"};
    } catch (const DomainError& e) {
        res = {usage_error, "", std::string("error: ") + e.what() + "\n"};
    }
    return res;
}

}  // namespace sfm::cli
