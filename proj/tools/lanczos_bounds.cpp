#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lanczos_opt/acceptance.hpp"
#include "lanczos_opt/experiment.hpp"
#include "lanczos_opt/figures.hpp"

namespace fs = std::filesystem;
using namespace lanczos_opt;

namespace {

enum Exit : int { ok = 0, verification_failed = 1, config_error = 2, numerical_failure = 3 };

struct RunArgs {
    std::string config;
    std::string out;
    std::optional<std::size_t> m_max;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> bounds;
    std::optional<double> quad_rel_tol;
    std::optional<double> breakdown_tol;
};

int cmd_run(const RunArgs& a) {
    ExperimentConfig cfg = ExperimentConfig::load(a.config);
    if (a.m_max) cfg.m_max = *a.m_max;
    if (a.seed) {
        if (!cfg.b.is_object()) throw ConfigError("--seed needs b to be an object with a seed");
        cfg.b["seed"] = *a.seed;
    }
    if (!a.bounds.empty()) cfg.bounds = a.bounds;
    if (a.quad_rel_tol) cfg.quad_rel_tol = *a.quad_rel_tol;
    if (a.breakdown_tol) cfg.breakdown_tol = *a.breakdown_tol;
    // Re-validate after the overrides.
    cfg = ExperimentConfig::from_json(cfg.to_json(), cfg.base_dir);

    const Problem p = build_problem(cfg);
    const ExperimentResult r = run_problem(p, RunOptions::from_config(cfg));
    fs::path target;
    if (!a.out.empty())
        target = fs::path(a.out) / (cfg.name + ".csv");
    else if (!cfg.output.empty())
        target = cfg.output;
    if (target.empty()) {
        write_csv(std::cout, r, cfg.to_json(), p.seed);
    } else {
        write_csv_file(target, r, cfg.to_json(), p.seed);
        std::cerr << "wrote " << target.string() << " (" << r.records.size() << " iterations, M = " << r.invariance_index
                  << ")\n";
    }
    return ok;
}

int cmd_figure(const std::string& name, const std::string& out) {
    std::vector<std::string> figs;
    if (name == "all")
        figs = figure_names();
    else
        figs.push_back(name);
    for (const auto& f : figs) {
        const FigureOutput o = make_figure(f, out);
        std::cerr << "wrote " << o.svg_file.string();
        for (const auto& c : o.csv_files) std::cerr << ", " << c.filename().string();
        std::cerr << '\n';
    }
    return ok;
}

int cmd_verify(const std::string& filter, const std::string& json_path, bool verbose) {
    AcceptanceContext ctx;
    const auto results = run_checks(all_checks(), filter, ctx);
    if (results.empty()) throw ConfigError("no check matches filter \"" + filter + "\"");
    const bool json_stdout = json_path == "-";
    std::size_t failed = 0;
    for (const auto& r : results) {
        if (!r.passed) ++failed;
        if (json_stdout) continue;
        std::cout << result_line(r) << '\n';
        if (verbose || !r.passed)
            for (const auto& d : r.details) std::cout << "      " << d << '\n';
    }
    const json summary = results_json(results);
    if (json_stdout) {
        std::cout << summary.dump(2) << '\n';
    } else {
        std::cout << (results.size() - failed) << " of " << results.size() << " checks passed\n";
        if (!json_path.empty()) {
            std::ofstream out(json_path);
            if (!out) throw ConfigError("cannot write " + json_path);
            out << summary.dump(2) << '\n';
        }
    }
    return failed == 0 ? ok : verification_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lanczos approximation of Stieltjes matrix functions: error bounds and experiments"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run one experiment and write its CSV");
    run->add_option("--config", run_args.config, "experiment config (JSON)")->required();
    run->add_option("--out", run_args.out, "output directory; the file is <name>.csv");
    run->add_option("--m-max", run_args.m_max, "override m_max");
    run->add_option("--seed", run_args.seed, "override the seed of b");
    run->add_option("--bounds", run_args.bounds, "override the bounds list");
    run->add_option("--quad-rel-tol", run_args.quad_rel_tol, "override quad_rel_tol");
    run->add_option("--breakdown-tol", run_args.breakdown_tol, "override breakdown_tol");

    std::string fig_name;
    std::string fig_out = "figures";
    auto* figure = app.add_subcommand("figure", "run a figure recipe, writing CSV and SVG files");
    figure->add_option("name", fig_name, "fig1, fig2, fig3, fig4 or all")->required();
    figure->add_option("--out", fig_out, "output directory");

    std::string filter;
    std::string json_path;
    bool verbose = false;
    auto* verify = app.add_subcommand("verify", "run invariant suites and acceptance criteria");
    verify->add_option("--filter", filter, "exact check id or substring of a title; 'acceptance' or 'invariants' select a group");
    verify->add_option("--json", json_path, "write the JSON summary to a file, or '-' for stdout only");
    verify->add_flag("--verbose,-v", verbose, "print details of passing checks too");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config_error;
    }

    try {
        if (*run) return cmd_run(run_args);
        if (*figure) return cmd_figure(fig_name, fig_out);
        if (*verify) return cmd_verify(filter, json_path, verbose);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config_error;
    } catch (const ArgumentError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config_error;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return numerical_failure;
    }
    return ok;
}
