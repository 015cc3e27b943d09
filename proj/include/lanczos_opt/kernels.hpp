#pragma once

// Resolvent kernels of a split Lanczos matrix
//
//     T_M = [ T_m                 beta e_m e_1^T ]
//           [ beta e_1 e_m^T      S              ]
//
// and the two error components obtained from them. For a shifted inverse
// (z + t)^{-1}, the Woodbury identity gives
//
//     head(t) = c_head(t) (T_m + tI)^{-1} e_m,   c_head = -delta eps / det X
//     tail(t) = c_tail(t) (S + tI)^{-1} e_1,     c_tail = eps / (beta det X)
//
// with gamma = e_m^T (T_m+tI)^{-1} e_m, delta = e_1^T (S+tI)^{-1} e_1,
// eps = e_m^T (T_m+tI)^{-1} e_1 and det X = gamma delta - 1/beta^2.
// Integrating against dmu gives f1(T_m) e_m and f2(S) e_1.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "lanczos_opt/errors.hpp"
#include "lanczos_opt/linalg.hpp"
#include "lanczos_opt/quadrature.hpp"
#include "lanczos_opt/stieltjes.hpp"

namespace lanczos_opt {

struct KernelValues {
    double gamma;
    double delta;
    double epsilon;
    double det_x;
};

class KernelEvaluator {
public:
    KernelEvaluator(SymTridiagonal leading, SymTridiagonal trailing, double beta_next, double breakdown_tol = 0.0)
        : leading_(std::move(leading)), trailing_(std::move(trailing)), beta_next_(beta_next) {
        if (leading_.size() == 0 || trailing_.size() == 0)
            throw ArgumentError("KernelEvaluator: both diagonal blocks must be nonempty");
        if (!(beta_next_ > breakdown_tol) || !(beta_next_ > 0.0)) {
            std::ostringstream os;
            os << "KernelEvaluator: beta_{m+1} = " << beta_next_ << " at or below the breakdown tolerance "
               << breakdown_tol << "; the Krylov space is invariant at m = " << leading_.size();
            throw LuckyBreakdownError(os.str());
        }
        ritz_ = tridiag_eigh(leading_);
    }

    std::size_t m() const noexcept { return leading_.size(); }
    const SymTridiagonal& leading() const noexcept { return leading_; }
    const SymTridiagonal& trailing() const noexcept { return trailing_; }
    double beta_next() const noexcept { return beta_next_; }
    const EigenPairs& ritz() const noexcept { return ritz_; }

    /// (T_m + tI)^{-1} e_m
    Vector leading_resolvent(double t) const {
        Vector em(m(), 0.0);
        em.back() = 1.0;
        return tridiag_shifted_solve(leading_, t, em);
    }

    /// (S + tI)^{-1} e_1
    Vector trailing_resolvent(double t) const {
        Vector e1(trailing_.size(), 0.0);
        e1.front() = 1.0;
        return tridiag_shifted_solve(trailing_, t, e1);
    }

    static KernelValues combine(std::span<const double> lead, std::span<const double> trail, double beta) {
        KernelValues k;
        k.gamma = lead.back();
        k.epsilon = lead.front();  // symmetric: e_m^T R e_1 = e_1^T R e_m
        k.delta = trail.front();
        k.det_x = k.gamma * k.delta - 1.0 / (beta * beta);
        return k;
    }

    KernelValues at(double t) const {
        if (!(t >= 0.0)) throw ArgumentError("kernels_at: t must be nonnegative");
        return combine(leading_resolvent(t), trailing_resolvent(t), beta_next_);
    }

    double head_coefficient(const KernelValues& k) const { return -k.delta * k.epsilon / k.det_x; }
    double tail_coefficient(const KernelValues& k) const { return k.epsilon / (beta_next_ * k.det_x); }

private:
    SymTridiagonal leading_;
    SymTridiagonal trailing_;
    double beta_next_;
    EigenPairs ritz_;
};

inline KernelValues kernels_at(const KernelEvaluator& k, double t) { return k.at(t); }

/// e_m^T (T_m + tI)^{-1} e_1 = (-1)^{m+1} prod(beta_2..beta_m) / prod(theta_i + t),
/// evaluated as interleaved ratios to stay in range.
inline double epsilon_closed_form(std::span<const double> betas, std::span<const double> ritz, double t) {
    const std::size_t m = ritz.size();
    if (m == 0 || betas.size() + 1 != m) throw ArgumentError("epsilon_closed_form: need m Ritz values and m-1 betas");
    double v = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(ritz[i] + t > 0.0)) throw ArgumentError("epsilon_closed_form: theta_i + t must be positive");
        v /= (ritz[i] + t);
        if (i + 1 < m) v *= betas[i];
    }
    return (m % 2 == 1) ? v : -v;
}

enum class Component { head, tail };

/// Per-node record of an error-component quadrature.
struct NodeRecord {
    double t;
    double weight;
    KernelValues kernels;
    /// c_head(t) or c_tail(t) of the plain Stieltjes function g.
    double coefficient;
};

/// f1(T_m) e_m (head) or f2(S) e_1 (tail) as a quadrature sum, with the rule kept
/// for scalar evaluation of the same functions.
///
/// For f = z g(z) the per-node coefficient is -t c(t): the shifted inverse is
/// replaced by z/(z+t) = 1 - t/(z+t) and the constant part is reproduced
/// exactly by both f(T_M) and f(T_m).
struct ComponentApplication {
    Component component;
    Transform transform;
    std::size_t m;
    Vector vector;
    std::vector<NodeRecord> nodes;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;

    double norm() const { return norm2(vector); }

    /// Scalar f1(z) or f2(z); for the times_z class z f1(z) or z f2(z).
    double scalar(double z) const {
        double s = 0.0;
        for (const auto& n : nodes) s += n.weight * n.coefficient / (z + n.t);
        return transform == Transform::times_z ? z * s : s;
    }

    /// Expected sign of the scalar function: (-1)^{m+1} for f1, (-1)^m for f2.
    int expected_sign() const {
        const bool odd = (m % 2 == 1);
        return component == Component::head ? (odd ? 1 : -1) : (odd ? -1 : 1);
    }
};

namespace detail {

inline ComponentApplication apply_component(const KernelEvaluator& k, const StieltjesFunction& f, Component which,
                                            QuadratureConfig cfg) {
    const std::size_t dim = which == Component::head ? k.m() : k.trailing().size();
    const bool times_z = f.transform() == Transform::times_z;
    ComponentApplication app{which, f.transform(), k.m(), Vector(dim, 0.0), {}, 0.0, 0};

    auto node_vector = [&](double t, KernelValues& kv, double& coeff) {
        Vector lead = k.leading_resolvent(t);
        Vector trail = k.trailing_resolvent(t);
        kv = KernelEvaluator::combine(lead, trail, k.beta_next());
        coeff = which == Component::head ? k.head_coefficient(kv) : k.tail_coefficient(kv);
        return which == Component::head ? lead : trail;
    };

    if (const auto* pf = f.discrete()) {
        for (std::size_t i = 0; i < pf->weights.size(); ++i) {
            KernelValues kv{};
            double c = 0.0;
            const double t = pf->poles[i];
            Vector v = node_vector(t, kv, c);
            const double eff = times_z ? -t * c : c;
            axpy(pf->weights[i] * eff, v, app.vector);
            app.nodes.push_back({t, pf->weights[i], kv, c});
        }
        app.evaluations = pf->weights.size();
        return app;
    }

    if (!(cfg.scale > 0.0)) {
        const double lo = k.ritz().values.front();
        const double hi = k.ritz().values.back();
        cfg.scale = std::sqrt(std::max(lo, std::numeric_limits<double>::min()) * std::max(hi, lo));
    }
    const auto segs = f.segments(cfg.scale);
    auto integrand = [&](double t, std::span<double> out) {
        KernelValues kv{};
        double c = 0.0;
        Vector v = node_vector(t, kv, c);
        const double eff = times_z ? -t * c : c;
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = eff * v[i];
    };
    QuadratureResult res = integrate_adaptive(segs, dim, integrand, cfg);
    app.vector = std::move(res.value);
    app.error_estimate = res.error_estimate;
    app.evaluations = res.evaluations;
    app.nodes.reserve(res.rule.size());
    for (const auto& q : res.rule) {
        KernelValues kv{};
        double c = 0.0;
        node_vector(q.t, kv, c);
        app.nodes.push_back({q.t, q.weight, kv, c});
    }
    return app;
}

}  // namespace detail

inline ComponentApplication f1_apply(const KernelEvaluator& k, const StieltjesFunction& f, QuadratureConfig cfg = {}) {
    return detail::apply_component(k, f, Component::head, cfg);
}

inline ComponentApplication f2_apply(const KernelEvaluator& k, const StieltjesFunction& f, QuadratureConfig cfg = {}) {
    return detail::apply_component(k, f, Component::tail, cfg);
}

/// Structural checks at every quadrature node: det X(t) < 0, the Rayleigh
/// enclosures 1/(lmax+t) <= gamma, delta <= 1/(lmin+t), the bracket
/// -1/beta^2 <= det X(t) <= gamma(0) delta(0) - 1/beta^2, and positivity of the
/// sign-normalised coefficients.
inline PropertyReport check_node_structure(const KernelEvaluator& k, const ComponentApplication& app, double lambda_min,
                                           double lambda_max, double rel_slack = 1e-12) {
    PropertyReport rep;
    const double beta = k.beta_next();
    const KernelValues k0 = k.at(0.0);
    const double upper = k0.gamma * k0.delta - 1.0 / (beta * beta);
    const double lower = -1.0 / (beta * beta);
    const double sign = app.expected_sign();
    for (const auto& n : app.nodes) {
        const auto& kv = n.kernels;
        auto where = [&](const char* what) {
            std::ostringstream os;
            os.precision(17);
            os << what << " violated at t = " << n.t << " (m = " << app.m << ")";
            return os.str();
        };
        rep.expect(kv.det_x < 0.0, where("det X(t) < 0"));
        const double lo_r = 1.0 / (lambda_max + n.t) * (1.0 - rel_slack);
        const double hi_r = 1.0 / (lambda_min + n.t) * (1.0 + rel_slack);
        rep.expect(kv.gamma >= lo_r && kv.gamma <= hi_r, where("Rayleigh enclosure of gamma(t)"));
        rep.expect(kv.delta >= lo_r && kv.delta <= hi_r, where("Rayleigh enclosure of delta(t)"));
        const double slack = rel_slack * std::abs(lower);
        rep.expect(kv.det_x >= lower - slack && kv.det_x <= upper + slack, where("det X(t) bracket"));
        // far out on the half line eps(t) ~ t^{-m} and the coefficient may underflow to zero
        const double c = n.coefficient * sign;
        const bool underflow = c == 0.0 && std::abs(kv.epsilon) < 1e30 * std::numeric_limits<double>::min();
        rep.expect(c > 0.0 || underflow, where("coefficient sign"));
    }
    return rep;
}

/// Constant sign and monotone magnitude of the scalar error functions on an
/// ascending grid: plain class |f1|, |f2| non-increasing; times_z class
/// |z f1|, |z f2| non-decreasing.
inline PropertyReport check_sign_and_monotonicity(const ComponentApplication& head, const ComponentApplication& tail,
                                                  std::span<const double> grid) {
    if (grid.size() < 10) throw ArgumentError("check_sign_and_monotonicity: grid needs at least 10 points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ArgumentError("check_sign_and_monotonicity: grid must be ascending");
    PropertyReport rep;
    constexpr double slack = 8.0 * std::numeric_limits<double>::epsilon();
    for (const ComponentApplication* app : {&head, &tail}) {
        const char* label = app->component == Component::head ? "f1" : "f2";
        const bool increasing = app->transform == Transform::times_z;
        double prev = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double v = app->scalar(grid[i]);
            std::ostringstream os;
            os.precision(17);
            os << label << "(" << grid[i] << ") = " << v << " has the wrong sign for m = " << app->m;
            rep.expect(v * app->expected_sign() > 0.0, os.str());
            const double a = std::abs(v);
            if (i > 0) {
                std::ostringstream os2;
                os2.precision(17);
                os2 << "|" << label << "| not monotonically " << (increasing ? "increasing" : "decreasing")
                    << " between z = " << grid[i - 1] << " and z = " << grid[i] << " (m = " << app->m << ")";
                rep.expect(increasing ? a >= prev * (1.0 - slack) : a <= prev * (1.0 + slack), os2.str());
            }
            prev = a;
        }
    }
    return rep;
}

inline PropertyReport check_sign_and_monotonicity(const KernelEvaluator& k, const StieltjesFunction& f,
                                                  std::span<const double> grid, QuadratureConfig cfg = {}) {
    return check_sign_and_monotonicity(f1_apply(k, f, cfg), f2_apply(k, f, cfg), grid);
}

}  // namespace lanczos_opt
