#pragma once

// Experiment harness: test problems (matrix, function, starting vector), the
// per-iteration convergence records with all requested bounds, and CSV output.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "lanczos_opt/approx.hpp"
#include "lanczos_opt/bounds.hpp"
#include "lanczos_opt/errors.hpp"
#include "lanczos_opt/kernels.hpp"
#include "lanczos_opt/krylov.hpp"
#include "lanczos_opt/linalg.hpp"
#include "lanczos_opt/rng.hpp"
#include "lanczos_opt/stieltjes.hpp"

namespace lanczos_opt {

using json = nlohmann::ordered_json;

/// Relative level (to |f(A) b|) below which optimal errors count as rounding noise.
inline constexpr double precision_floor = 1e-12;

/// Bound identifiers in CSV column order.
inline const std::vector<std::string>& known_bounds() {
    static const std::vector<std::string> names{"beta",  "kappa_squared", "split", "delta0",        "fov",
                                                "spectrum", "cg",          "rational", "beta_effective"};
    return names;
}

// ---------------------------------------------------------------- problems

inline double eta_spacing(std::size_t i, std::size_t n, double lo, double hi, double rho) {
    // i is 1-based; eta_1 = lo, eta_n = hi
    if (n == 1) return lo;
    const double e = static_cast<double>(i - 1) / static_cast<double>(n - 1);
    return lo + (hi - lo) * (1.0 - std::pow(rho, e)) / (1.0 - rho);
}

inline Vector read_numbers(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file " + path.string());
    Vector v;
    std::string tok;
    while (in >> tok) {
        if (tok.front() == '#') {
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        double x = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw ConfigError("non-numeric entry '" + tok + "' in " + path.string());
        v.push_back(x);
    }
    if (v.empty()) throw ConfigError("data file " + path.string() + " holds no numbers");
    return v;
}

namespace detail {

inline json as_object(const json& spec, const char* what) {
    if (spec.is_string()) return json{{"type", spec.get<std::string>()}};
    if (spec.is_object() && spec.contains("type") && spec["type"].is_string()) return spec;
    throw ConfigError(std::string(what) + " must be a name or an object with a \"type\" field");
}

template <class T>
T field(const json& obj, const char* key, const char* what) {
    if (!obj.contains(key)) throw ConfigError(std::string(what) + ": missing field \"" + key + "\"");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(what) + ": field \"" + key + "\" has the wrong type");
    }
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace detail

/// A1 = diag(1..100); A2 = eta spacing on [1, 100] with rho = 1e-3; A3 = linspace(1.1, 110, 100);
/// A4 = eta spacing on [1.1, 110]; custom(n, linear|geometric, lo, hi); diag(file).
inline SpectralMatrix build_matrix(const json& spec_in, const std::filesystem::path& base_dir = {}) {
    const json spec = detail::as_object(spec_in, "matrix");
    const std::string type = spec["type"].get<std::string>();
    constexpr double rho = 1e-3;
    Vector ev;
    if (type == "A1") {
        for (int i = 1; i <= 100; ++i) ev.push_back(i);
    } else if (type == "A2") {
        for (std::size_t i = 1; i <= 100; ++i) ev.push_back(eta_spacing(i, 100, 1.0, 100.0, rho));
    } else if (type == "A3") {
        for (std::size_t i = 0; i < 100; ++i) ev.push_back(1.1 + (110.0 - 1.1) * static_cast<double>(i) / 99.0);
        ev.back() = 110.0;
    } else if (type == "A4") {
        for (std::size_t i = 1; i <= 100; ++i) ev.push_back(eta_spacing(i, 100, 1.1, 110.0, rho));
    } else if (type == "custom") {
        const auto n = detail::field<std::size_t>(spec, "n", "matrix custom");
        const auto spacing = detail::field<std::string>(spec, "spacing", "matrix custom");
        const auto lo = detail::field<double>(spec, "lo", "matrix custom");
        const auto hi = detail::field<double>(spec, "hi", "matrix custom");
        if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("matrix custom: need n >= 1 and hi >= lo > 0");
        for (std::size_t i = 0; i < n; ++i) {
            const double s = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
            if (spacing == "linear") ev.push_back(lo + (hi - lo) * s);
            else if (spacing == "geometric") ev.push_back(lo * std::pow(hi / lo, s));
            else throw ConfigError("matrix custom: spacing must be \"linear\" or \"geometric\"");
        }
        ev.back() = hi;
    } else if (type == "diag") {
        ev = read_numbers(detail::resolve(base_dir, detail::field<std::string>(spec, "file", "matrix diag")));
        std::sort(ev.begin(), ev.end());
    } else {
        throw ConfigError("unknown matrix \"" + type + "\"");
    }
    try {
        return SpectralMatrix(std::move(ev));
    } catch (const Error& e) {
        throw ConfigError(std::string("matrix: ") + e.what());
    }
}

/// Function to apply plus the shift of the matrix it acts on (log_shifted uses B = A - I).
struct FunctionSpec {
    StieltjesFunction function;
    double shift = 0.0;
    std::string label;
    std::optional<SpectrumBoundKind> spectrum_kind;
    bool is_inverse = false;
};

inline FunctionSpec build_function(const json& spec_in, const std::filesystem::path& base_dir = {}) {
    const json spec = detail::as_object(spec_in, "function");
    const std::string type = spec["type"].get<std::string>();
    try {
        if (type == "inv_sqrt") return {make_inv_sqrt(), 0.0, type, SpectrumBoundKind::inv_sqrt, false};
        if (type == "sqrt") return {make_sqrt(), 0.0, type, SpectrumBoundKind::sqrt, false};
        if (type == "inverse") return {make_inverse(), 0.0, type, std::nullopt, true};
        if (type == "inv_power") {
            const double alpha = detail::field<double>(spec, "alpha", "function inv_power");
            return {make_inv_power(alpha), 0.0, type, std::nullopt, false};
        }
        if (type == "log1p_over_z") return {make_log1p_over_z(), 0.0, type, std::nullopt, false};
        if (type == "log_shifted") return {make_log1p_over_z(Transform::times_z), 1.0, type, std::nullopt, false};
        if (type == "partial_fraction") {
            json data;
            if (spec.contains("file")) {
                const auto path = detail::resolve(base_dir, detail::field<std::string>(spec, "file", "partial_fraction"));
                std::ifstream in(path);
                if (!in) throw ConfigError("cannot open partial fraction file " + path.string());
                try {
                    data = json::parse(in);
                } catch (const json::exception& e) {
                    throw ConfigError("partial fraction file " + path.string() + ": " + e.what());
                }
            } else {
                data = spec;
            }
            auto w = detail::field<Vector>(data, "weights", "partial_fraction");
            auto p = detail::field<Vector>(data, "poles", "partial_fraction");
            if (w.size() != p.size() || w.empty()) throw ConfigError("partial_fraction: weights and poles must match");
            return {make_partial_fraction(std::move(w), std::move(p)), 0.0, type, std::nullopt, false};
        }
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("function: ") + e.what());
    }
    throw ConfigError("unknown function \"" + type + "\"");
}

/// gaussian(seed) | gaussian_supported(seed, lo, hi), 1-based inclusive support | file; unit norm.
inline Vector build_vector(const json& spec_in, std::size_t n, const std::filesystem::path& base_dir = {}) {
    const json spec = detail::as_object(spec_in, "b");
    const std::string type = spec["type"].get<std::string>();
    Vector b;
    if (type == "gaussian" || type == "gaussian_supported") {
        const auto seed = detail::field<std::uint64_t>(spec, "seed", "b");
        NormalStream rng(seed);
        b = rng.vector(n);
        if (type == "gaussian_supported") {
            const auto lo = detail::field<std::size_t>(spec, "lo", "b gaussian_supported");
            const auto hi = detail::field<std::size_t>(spec, "hi", "b gaussian_supported");
            if (lo < 1 || hi < lo || hi > n) throw ConfigError("b gaussian_supported: need 1 <= lo <= hi <= n");
            for (std::size_t i = 0; i < n; ++i)
                if (i + 1 < lo || i + 1 > hi) b[i] = 0.0;
        }
    } else if (type == "file") {
        b = read_numbers(detail::resolve(base_dir, detail::field<std::string>(spec, "path", "b file")));
        if (b.size() != n) throw ConfigError("b file: length does not match the matrix dimension");
    } else {
        throw ConfigError("unknown b \"" + type + "\"");
    }
    const double nb = norm2(b);
    if (!(nb > 0.0)) throw ConfigError("b: vector is zero (empty support)");
    for (double& x : b) x /= nb;
    return b;
}

struct ExperimentConfig {
    json matrix = "A1";
    json function = "inv_sqrt";
    json b = json{{"type", "gaussian"}, {"seed", 42}};
    /// 0 runs to the invariance index.
    std::size_t m_max = 0;
    std::vector<std::string> bounds{"beta", "kappa_squared"};
    double quad_rel_tol = 1e-12;
    std::optional<double> breakdown_tol;
    std::size_t remez_grid = default_interval_grid;
    std::size_t rational_nodes = 10;
    double effective_drop_tol = 0.0;
    std::string output;
    std::string name = "experiment";
    std::filesystem::path base_dir;

    json to_json() const {
        json j;
        j["name"] = name;
        j["matrix"] = matrix;
        j["function"] = function;
        j["b"] = b;
        j["m_max"] = m_max;
        j["bounds"] = bounds;
        j["quad_rel_tol"] = quad_rel_tol;
        j["breakdown_tol"] = breakdown_tol ? json(*breakdown_tol) : json(nullptr);
        j["remez_grid"] = remez_grid;
        j["rational_nodes"] = rational_nodes;
        j["effective_drop_tol"] = effective_drop_tol;
        j["output"] = output;
        return j;
    }

    static ExperimentConfig from_json(const json& j, const std::filesystem::path& base_dir = {}) {
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        static const std::vector<std::string> keys{"name",           "matrix",       "function",           "b",
                                                   "m_max",          "bounds",       "quad_rel_tol",       "breakdown_tol",
                                                   "remez_grid",     "rational_nodes", "effective_drop_tol", "output"};
        for (const auto& [k, v] : j.items())
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown config field \"" + k + "\"");
        ExperimentConfig c;
        c.base_dir = base_dir;
        try {
            if (j.contains("name")) c.name = j["name"].get<std::string>();
            if (j.contains("matrix")) c.matrix = j["matrix"];
            if (j.contains("function")) c.function = j["function"];
            if (j.contains("b")) c.b = j["b"];
            if (j.contains("m_max")) c.m_max = j["m_max"].get<std::size_t>();
            if (j.contains("bounds")) c.bounds = j["bounds"].get<std::vector<std::string>>();
            if (j.contains("quad_rel_tol")) c.quad_rel_tol = j["quad_rel_tol"].get<double>();
            if (j.contains("breakdown_tol") && !j["breakdown_tol"].is_null())
                c.breakdown_tol = j["breakdown_tol"].get<double>();
            if (j.contains("remez_grid")) c.remez_grid = j["remez_grid"].get<std::size_t>();
            if (j.contains("rational_nodes")) c.rational_nodes = j["rational_nodes"].get<std::size_t>();
            if (j.contains("effective_drop_tol")) c.effective_drop_tol = j["effective_drop_tol"].get<double>();
            if (j.contains("output")) c.output = j["output"].get<std::string>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config field has the wrong type: ") + e.what());
        }
        for (const auto& name : c.bounds)
            if (std::find(known_bounds().begin(), known_bounds().end(), name) == known_bounds().end())
                throw ConfigError("unknown bound \"" + name + "\"");
        if (!(c.quad_rel_tol > 0.0)) throw ConfigError("quad_rel_tol must be positive");
        if (c.rational_nodes < 1) throw ConfigError("rational_nodes must be at least 1");
        return c;
    }

    static ExperimentConfig load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config " + path.string());
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
        }
        return from_json(j, path.parent_path());
    }
};

struct Problem {
    std::string label;
    SpectralMatrix matrix;
    FunctionSpec function;
    Vector b;
    /// Seed of a generated b, echoed into headers.
    std::optional<std::uint64_t> seed;
};

inline Problem build_problem(const ExperimentConfig& cfg) {
    FunctionSpec fs = build_function(cfg.function, cfg.base_dir);
    SpectralMatrix a = build_matrix(cfg.matrix, cfg.base_dir);
    if (fs.shift != 0.0) {
        try {
            a = a.shifted(fs.shift);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("shifted matrix is not positive definite: ") + e.what());
        }
    }
    Vector b = build_vector(cfg.b, a.size(), cfg.base_dir);
    std::optional<std::uint64_t> seed;
    const json bs = detail::as_object(cfg.b, "b");
    if (bs.contains("seed")) seed = bs["seed"].get<std::uint64_t>();
    return Problem{cfg.name, std::move(a), std::move(fs), std::move(b), seed};
}

// ---------------------------------------------------------------- records

/// Per-iteration quantities that are checked but not written to CSV.
struct RecordDiagnostics {
    bool kernels_evaluated = false;
    /// err_lan computed from the vectors even where the record reports 0.
    double raw_err_lan = 0.0;
    double pythagorean_rel = 0.0;
    double projection_rel = 0.0;
    double head_quadrature_rel = 0.0;
    double tail_quadrature_rel = 0.0;
    double head_quadrature_norm = 0.0;
    double tail_quadrature_norm = 0.0;
    std::size_t quadrature_nodes = 0;
    /// det X < 0, Rayleigh enclosures and coefficient signs at every node.
    PropertyReport node_structure;
    /// constant sign and monotone magnitude of f1, f2 on a 50-point grid.
    PropertyReport sign_monotonicity;
    double beta_factor = 1.0;
    double effective_beta_factor = 1.0;
};

struct ConvergenceRecord {
    std::size_t m = 0;
    double beta_next = 0.0;
    double err_lan = 0.0;
    double err_opt = 0.0;
    std::optional<double> ratio_lan_opt;
    std::optional<double> head_norm;
    std::optional<double> tail_norm;
    std::optional<double> component_ratio;
    std::map<std::string, std::optional<double>> bounds;
    std::optional<double> rational_err_lan;
    std::optional<double> rational_err_opt;
    bool floor_flag = false;
    RecordDiagnostics diagnostics;

    std::optional<double> bound(const std::string& name) const {
        auto it = bounds.find(name);
        return it == bounds.end() ? std::nullopt : it->second;
    }
};

struct RunOptions {
    std::size_t m_max = 0;
    std::vector<std::string> bounds{"beta", "kappa_squared"};
    QuadratureConfig quadrature{};
    std::optional<double> breakdown_tol;
    std::size_t remez_grid = default_interval_grid;
    std::size_t rational_nodes = 10;
    double effective_drop_tol = 0.0;
    /// Evaluate kernels, node structure and sign checks at every m above the floor.
    bool kernel_diagnostics = true;
    /// Stop after the first record at or below the precision floor.
    bool stop_at_floor = false;
    std::size_t monotonicity_grid = 50;

    static RunOptions from_config(const ExperimentConfig& c) {
        RunOptions o;
        o.m_max = c.m_max;
        o.bounds = c.bounds;
        o.quadrature.rel_tol = c.quad_rel_tol;
        o.breakdown_tol = c.breakdown_tol;
        o.remez_grid = c.remez_grid;
        o.rational_nodes = c.rational_nodes;
        o.effective_drop_tol = c.effective_drop_tol;
        return o;
    }

    bool wants(const std::string& name) const { return std::find(bounds.begin(), bounds.end(), name) != bounds.end(); }
};

struct ExperimentResult {
    std::string label;
    std::string function_name;
    std::size_t n = 0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
    std::size_t invariance_index = 0;
    double breakdown_tol = 0.0;
    double final_beta = 0.0;
    double exact_norm = 0.0;
    double effective_lo = 0.0;
    double effective_hi = 0.0;
    std::optional<RationalApproximation> rational;
    PropertyReport decomposition;
    std::vector<std::string> columns;
    std::vector<ConvergenceRecord> records;
};

namespace detail {

template <class Fn>
auto staged(std::size_t m, const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (Error& e) {
        std::ostringstream os;
        os << "m = " << m << ", stage " << stage;
        e.add_context(os.str());
        throw;
    }
}

inline Vector log_grid(double lo, double hi, std::size_t count) {
    Vector g(count);
    for (std::size_t k = 0; k < count; ++k)
        g[k] = hi > lo ? lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(count - 1))
                       : lo * (1.0 + static_cast<double>(k) * 1e-6);
    g.front() = lo;
    if (hi > lo) g.back() = hi;
    return g;
}

}  // namespace detail

inline std::vector<std::string> csv_columns(const RunOptions& o) {
    std::vector<std::string> cols{"m",        "beta_next", "err_lan",   "err_opt",
                                  "ratio_lan_opt", "head_norm", "tail_norm", "component_ratio"};
    for (const auto& name : known_bounds()) {
        if (!o.wants(name)) continue;
        cols.push_back("bound_" + name);
        if (name == "beta") cols.push_back("factor_beta");
        if (name == "rational") {
            cols.push_back("rational_err_lan");
            cols.push_back("rational_err_opt");
        }
    }
    cols.push_back("floor_flag");
    return cols;
}

/// Full pipeline on one problem: Lanczos to the invariance index, exact f(A) b,
/// and one record per m = 1 .. min(m_max, M).
inline ExperimentResult run_problem(const Problem& p, const RunOptions& opt) {
    const SpectralMatrix& a = p.matrix;
    const StieltjesFunction& f = p.function.function;
    ExperimentResult res;
    res.label = p.label;
    res.function_name = f.name();
    res.n = a.size();
    res.lambda_min = a.lambda_min();
    res.lambda_max = a.lambda_max();
    res.kappa = a.condition_number();
    res.columns = csv_columns(opt);
    if (opt.wants("cg") && !p.function.is_inverse) throw ConfigError("bound cg applies only to the inverse function");
    if (opt.wants("spectrum") && !p.function.spectrum_kind)
        throw ConfigError("bound spectrum applies only to inv_sqrt and sqrt");

    const double tol = opt.breakdown_tol.value_or(default_breakdown_tol(a));
    const LanczosDecomposition l = detail::staged(0, "lanczos", [&] { return lanczos_run(a, p.b, a.size(), tol); });
    res.invariance_index = l.invariance();
    res.breakdown_tol = tol;
    res.final_beta = l.betas.back();
    res.decomposition = check_decomposition(l, a);
    const Vector exact = detail::staged(0, "exact", [&] { return spectral_apply(a, f, p.b); });
    res.exact_norm = norm2(exact);

    const Vector coeffs = a.to_eigenbasis(p.b);
    std::tie(res.effective_lo, res.effective_hi) = effective_interval(coeffs, a.eigenvalues(), opt.effective_drop_tol);

    std::optional<Vector> r_exact;
    std::vector<double> r_opt_history;  // index k: err_opt of r at k, k = 0 is |r(A) b|
    Vector neg_poles;
    if (opt.wants("rational")) {
        res.rational = detail::staged(0, "rational", [&] {
            return rational_from_quadrature(f, opt.rational_nodes, a.lambda_min(), a.lambda_max());
        });
        r_exact = spectral_apply(a, res.rational->function, p.b);
        r_opt_history.push_back(norm2(*r_exact));
        for (double t : res.rational->function.discrete()->poles) neg_poles.push_back(-t);
    }

    const std::size_t big_m = res.invariance_index;
    const std::size_t last = opt.m_max == 0 ? big_m : std::min(opt.m_max, big_m);
    const Vector grid = detail::log_grid(a.lambda_min(), a.lambda_max(), std::max<std::size_t>(opt.monotonicity_grid, 10));
    const ScalarFunction scalar = [&f](double z) { return f(z); };

    for (std::size_t m = 1; m <= last; ++m) {
        ConvergenceRecord rec;
        rec.m = m;
        rec.beta_next = l.beta_next(m);
        auto& diag = rec.diagnostics;
        const Vector fm = detail::staged(m, "lanczos_approximation", [&] { return lanczos_approximation(l, f, m); });
        const double err_lan = norm2(subtract(exact, fm));
        const double err_opt = optimal_approximation(l, exact, m).error;
        diag.raw_err_lan = err_lan;

        if (r_exact) {
            const Vector rm = lanczos_approximation(l, res.rational->function, m);
            const double r_opt = optimal_approximation(l, *r_exact, m).error;
            r_opt_history.push_back(r_opt);
            rec.rational_err_lan = m == big_m ? 0.0 : norm2(subtract(*r_exact, rm));
            rec.rational_err_opt = m == big_m ? 0.0 : r_opt;
        }

        if (m == big_m) {
            // f_M = f(A) b: the Lanczos and optimal approximations coincide
            rec.err_lan = 0.0;
            rec.err_opt = 0.0;
            rec.floor_flag = true;
            diag.beta_factor = 1.0;
            if (opt.wants("beta")) {
                rec.bounds["beta"] = 0.0;
            }
            if (opt.wants("kappa_squared")) rec.bounds["kappa_squared"] = 0.0;
            if (opt.wants("beta_effective")) rec.bounds["beta_effective"] = 0.0;
            res.records.push_back(std::move(rec));
            break;
        }

        rec.err_lan = err_lan;
        rec.err_opt = err_opt;
        rec.floor_flag = err_opt < precision_floor * res.exact_norm;
        const ErrorSplit split = detail::staged(m, "error_split", [&] { return error_split(l, f, m); });
        const double hn = norm2(split.head);
        const double tn = norm2(split.tail);
        rec.head_norm = hn;
        rec.tail_norm = tn;
        if (tn > 0.0) rec.component_ratio = hn / tn;
        if (err_opt > 0.0) rec.ratio_lan_opt = err_lan / err_opt;
        diag.pythagorean_rel = err_lan > 0.0 ? std::abs(hn * hn + tn * tn - err_lan * err_lan) / (err_lan * err_lan) : 0.0;
        diag.projection_rel = err_opt > 0.0 ? std::abs(tn - err_opt) / err_opt : 0.0;

        const BoundValue beta = bound_beta(rec.beta_next, a.lambda_min(), a.lambda_max(), err_opt, m);
        diag.beta_factor = beta.factor;
        const BoundValue beta_eff = bound_beta(rec.beta_next, res.effective_lo, res.effective_hi, err_opt, m);
        diag.effective_beta_factor = beta_eff.factor;

        if (rec.floor_flag) {
            res.records.push_back(std::move(rec));
            if (opt.stop_at_floor) break;
            continue;
        }

        if (opt.wants("beta")) rec.bounds["beta"] = beta.value;
        if (opt.wants("kappa_squared"))
            rec.bounds["kappa_squared"] = bound_kappa_squared(a.lambda_min(), a.lambda_max(), err_opt, m).value;
        if (opt.wants("beta_effective")) rec.bounds["beta_effective"] = beta_eff.value;

        const bool need_kernels = opt.kernel_diagnostics || opt.wants("split") || opt.wants("delta0");
        if (need_kernels) {
            detail::staged(m, "kernels", [&] {
                const KernelEvaluator k = kernel_evaluator(l, m);
                const ComponentApplication head = f1_apply(k, f, opt.quadrature);
                const ComponentApplication tail = f2_apply(k, f, opt.quadrature);
                diag.kernels_evaluated = true;
                diag.head_quadrature_norm = head.norm();
                diag.tail_quadrature_norm = tail.norm();
                diag.head_quadrature_rel = hn > 0.0 ? norm2(subtract(head.vector, split.head)) / hn : 0.0;
                diag.tail_quadrature_rel = tn > 0.0 ? norm2(subtract(tail.vector, split.tail)) / tn : 0.0;
                diag.quadrature_nodes = head.nodes.size() + tail.nodes.size();
                if (opt.kernel_diagnostics) {
                    diag.node_structure = check_node_structure(k, head, a.lambda_min(), a.lambda_max());
                    diag.node_structure.merge(check_node_structure(k, tail, a.lambda_min(), a.lambda_max()));
                    diag.sign_monotonicity = check_sign_and_monotonicity(head, tail, grid);
                }
                if (opt.wants("split")) rec.bounds["split"] = bound_split(head, tail, err_opt).value;
                if (opt.wants("delta0")) rec.bounds["delta0"] = bound_delta0(k, res.kappa, err_opt).value;
                return 0;
            });
        }
        if (opt.wants("fov"))
            rec.bounds["fov"] = detail::staged(m, "fov", [&] {
                return bound_fov(scalar, a.lambda_min(), a.lambda_max(), m, opt.remez_grid).value;
            });
        if (opt.wants("spectrum") && (m >= 2 || *p.function.spectrum_kind == SpectrumBoundKind::sqrt))
            rec.bounds["spectrum"] = detail::staged(m, "spectrum", [&] {
                return bound_spectrum(*p.function.spectrum_kind, a.eigenvalues(), res.kappa, m).value;
            });
        if (opt.wants("cg")) rec.bounds["cg"] = bound_cg(res.kappa, err_opt, m).value;
        if (opt.wants("rational") && m + 1 >= neg_poles.size()) {
            rec.bounds["rational"] = detail::staged(m, "rational", [&] {
                return bound_rational(neg_poles, a.lambda_min(), a.lambda_max(),
                                      [&](std::size_t k) { return r_opt_history.at(k); }, m)
                    .value;
            });
        }
        res.records.push_back(std::move(rec));
    }
    return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    return run_problem(build_problem(cfg), RunOptions::from_config(cfg));
}

// ---------------------------------------------------------------- CSV

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline void write_csv(std::ostream& out, const ExperimentResult& r, const json& config_echo,
                      const std::optional<std::uint64_t>& seed) {
    out << "# config: " << config_echo.dump() << '\n';
    out << "# seed: " << (seed ? std::to_string(*seed) : std::string("none")) << '\n';
    out << "# function: " << r.function_name << '\n';
    out << "# n: " << r.n << '\n';
    out << "# lambda_min: " << format_double(r.lambda_min) << '\n';
    out << "# lambda_max: " << format_double(r.lambda_max) << '\n';
    out << "# kappa: " << format_double(r.kappa) << '\n';
    out << "# invariance_index: " << r.invariance_index << '\n';
    out << "# breakdown_tol: " << format_double(r.breakdown_tol) << '\n';
    out << "# exact_norm: " << format_double(r.exact_norm) << '\n';
    out << "# effective_interval: " << format_double(r.effective_lo) << ' ' << format_double(r.effective_hi) << '\n';
    if (r.rational) {
        out << "# rational_nodes: " << r.rational->nodes << '\n';
        out << "# rational_max_rel_error: " << format_double(r.rational->max_rel_error) << '\n';
    }
    for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << r.columns[i];
    out << '\n';
    for (const auto& rec : r.records) {
        for (std::size_t i = 0; i < r.columns.size(); ++i) {
            const std::string& c = r.columns[i];
            if (i) out << ',';
            if (c == "m") out << rec.m;
            else if (c == "beta_next") out << format_double(rec.beta_next);
            else if (c == "err_lan") out << format_double(rec.err_lan);
            else if (c == "err_opt") out << format_double(rec.err_opt);
            else if (c == "ratio_lan_opt") out << csv_field(rec.ratio_lan_opt);
            else if (c == "head_norm") out << csv_field(rec.head_norm);
            else if (c == "tail_norm") out << csv_field(rec.tail_norm);
            else if (c == "component_ratio") out << csv_field(rec.component_ratio);
            else if (c == "factor_beta") out << format_double(rec.diagnostics.beta_factor);
            else if (c == "rational_err_lan") out << csv_field(rec.rational_err_lan);
            else if (c == "rational_err_opt") out << csv_field(rec.rational_err_opt);
            else if (c == "floor_flag") out << (rec.floor_flag ? 1 : 0);
            else out << csv_field(rec.bound(c.substr(6)));
        }
        out << '\n';
    }
}

inline std::string csv_string(const ExperimentResult& r, const json& config_echo, const std::optional<std::uint64_t>& seed) {
    std::ostringstream os;
    write_csv(os, r, config_echo, seed);
    return os.str();
}

inline void write_csv_file(const std::filesystem::path& path, const ExperimentResult& r, const json& config_echo,
                           const std::optional<std::uint64_t>& seed) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    write_csv(out, r, config_echo, seed);
}

}  // namespace lanczos_opt
