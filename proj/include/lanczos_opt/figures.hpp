#pragma once

// Figure recipes: each runs a fixed set of experiments, writes one CSV per
// run and one SVG with a panel per run.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lanczos_opt/experiment.hpp"
#include "lanczos_opt/plot.hpp"

namespace lanczos_opt {

inline constexpr std::uint64_t figure_seed = 42;

struct FigureOutput {
    std::vector<std::filesystem::path> csv_files;
    std::filesystem::path svg_file;
    std::vector<ExperimentResult> results;
};

inline const std::vector<std::string>& figure_names() {
    static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4"};
    return names;
}

namespace detail {

inline Series record_series(const ExperimentResult& r, const std::string& label,
                            const std::function<std::optional<double>(const ConvergenceRecord&)>& get, bool dashed = false) {
    Series s{label, {}, {}, dashed};
    for (const auto& rec : r.records) {
        const auto v = get(rec);
        if (!v) continue;
        s.x.push_back(static_cast<double>(rec.m));
        s.y.push_back(*v);
    }
    return s;
}

inline Series bound_series(const ExperimentResult& r, const std::string& name, const std::string& label) {
    return record_series(r, label, [&](const ConvergenceRecord& rec) { return rec.bound(name); }, true);
}

inline Series err_lan_series(const ExperimentResult& r) {
    return record_series(r, "Lanczos error", [](const ConvergenceRecord& rec) { return std::optional<double>(rec.err_lan); });
}

inline Series err_opt_series(const ExperimentResult& r) {
    return record_series(r, "optimal error", [](const ConvergenceRecord& rec) { return std::optional<double>(rec.err_opt); });
}

inline ExperimentConfig figure_config(const std::string& name, const std::string& matrix, const std::string& function,
                                      std::vector<std::string> bounds, json b = json{{"type", "gaussian"}, {"seed", figure_seed}}) {
    ExperimentConfig c;
    c.name = name;
    c.matrix = matrix;
    c.function = function;
    c.b = std::move(b);
    c.bounds = std::move(bounds);
    return c;
}

inline std::vector<ExperimentConfig> figure_configs(const std::string& fig) {
    std::vector<ExperimentConfig> v;
    if (fig == "fig1" || fig == "fig3") {
        const std::vector<std::string> bounds = fig == "fig1" ? std::vector<std::string>{"beta", "kappa_squared", "split", "delta0"}
                                                              : std::vector<std::string>{"beta", "fov", "spectrum"};
        for (const char* m : {"A1", "A2"})
            for (const char* f : {"inv_sqrt", "sqrt"})
                v.push_back(figure_config(fig + "_" + m + "_" + f, m, f, bounds));
    } else if (fig == "fig2") {
        for (const char* m : {"A1", "A2"}) v.push_back(figure_config(fig + "_" + m + "_inv_sqrt", m, "inv_sqrt", {}));
    } else if (fig == "fig4") {
        for (const char* m : {"A1", "A2"})
            v.push_back(figure_config(fig + "_" + m + "_supported", m, "inv_sqrt", {"beta", "beta_effective"},
                                      json{{"type", "gaussian_supported"}, {"seed", figure_seed}, {"lo", 26}, {"hi", 75}}));
    } else {
        throw ConfigError("unknown figure \"" + fig + "\" (expected fig1, fig2, fig3 or fig4)");
    }
    return v;
}

inline std::vector<Panel> figure_panels(const std::string& fig, const ExperimentResult& r) {
    const std::string title = r.label + ", f = " + r.function_name;
    Panel p{title, "m", "error", true, {}, {}};
    p.series.push_back(err_lan_series(r));
    if (fig == "fig1") {
        p.series.push_back(err_opt_series(r));
        p.series.push_back(bound_series(r, "split", "split bound"));
        p.series.push_back(bound_series(r, "delta0", "delta(0) bound"));
        p.series.push_back(bound_series(r, "beta", "beta bound"));
        p.series.push_back(bound_series(r, "kappa_squared", "kappa^2 bound"));
        return {p};
    }
    if (fig == "fig3") {
        p.series.push_back(bound_series(r, "beta", "beta bound"));
        p.series.push_back(bound_series(r, "fov", "FOV bound"));
        p.series.push_back(bound_series(r, "spectrum", "spectrum bound"));
        return {p};
    }
    if (fig == "fig4") {
        p.series.push_back(err_opt_series(r));
        p.series.push_back(bound_series(r, "beta", "beta bound"));
        p.series.push_back(bound_series(r, "beta_effective", "effective bound"));
        return {p};
    }
    p.y_label = "norm";
    p.series.push_back(record_series(r, "head norm", [](const ConvergenceRecord& rec) { return rec.head_norm; }, true));
    p.series.push_back(record_series(r, "tail norm", [](const ConvergenceRecord& rec) { return rec.tail_norm; }, true));
    Panel q{title + ", head/tail", "m", "ratio", false, {}, {0.5, 2.0}};
    q.series.push_back(record_series(r, "head/tail", [](const ConvergenceRecord& rec) { return rec.component_ratio; }));
    return {p, q};
}

}  // namespace detail

/// Runs a recipe, stopping each run at the precision floor or m = M.
inline FigureOutput make_figure(const std::string& fig, const std::filesystem::path& out_dir) {
    FigureOutput out;
    std::vector<Panel> panels;
    for (const ExperimentConfig& cfg : detail::figure_configs(fig)) {
        const Problem p = build_problem(cfg);
        RunOptions o = RunOptions::from_config(cfg);
        o.stop_at_floor = true;
        ExperimentResult r = run_problem(p, o);
        const auto csv = out_dir / (cfg.name + ".csv");
        write_csv_file(csv, r, cfg.to_json(), p.seed);
        out.csv_files.push_back(csv);
        for (auto& panel : detail::figure_panels(fig, r)) panels.push_back(std::move(panel));
        out.results.push_back(std::move(r));
    }
    out.svg_file = out_dir / (fig + ".svg");
    write_svg(out.svg_file, panels);
    return out;
}

}  // namespace lanczos_opt
