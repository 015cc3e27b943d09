#pragma once

// Stieltjes functions f(z) = int_0^inf dmu(t) / (z + t) and the related class
// f(z) = z g(z) with g Stieltjes.

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "lanczos_opt/errors.hpp"
#include "lanczos_opt/linalg.hpp"
#include "lanczos_opt/quadrature.hpp"

namespace lanczos_opt {

enum class Transform { plain, times_z };

/// z^{-alpha}, alpha in (0, 1); dmu(t) = sin(alpha pi)/pi t^{-alpha} dt.
struct InvPower {
    double alpha;
};

/// log(1 + z) / z; dmu(t) = dt / t on [1, inf).
struct Log1pOverZ {};

/// sum_i weights[i] / (z + poles[i]); discrete measure with atoms at poles[i] >= 0.
struct PartialFraction {
    Vector weights;
    Vector poles;
};

/// User-supplied density on [support_start, inf) together with its closed form.
struct CustomMeasure {
    std::function<double(double)> density;
    std::function<double(double)> closed_form;
    double support_start = 0.0;
    std::string name = "custom";
};

using StieltjesKind = std::variant<InvPower, Log1pOverZ, PartialFraction, CustomMeasure>;

class StieltjesFunction {
public:
    StieltjesFunction(StieltjesKind kind, Transform transform) : kind_(std::move(kind)), transform_(transform) {
        validate();
    }

    const StieltjesKind& kind() const noexcept { return kind_; }
    Transform transform() const noexcept { return transform_; }
    bool is_discrete() const noexcept { return std::holds_alternative<PartialFraction>(kind_); }
    const PartialFraction* discrete() const noexcept { return std::get_if<PartialFraction>(&kind_); }

    /// Same measure, different transform.
    StieltjesFunction with_transform(Transform t) const { return StieltjesFunction(kind_, t, unchecked{}); }

    /// Closed-form value of the stored Stieltjes function g.
    double base(double z) const {
        return std::visit(
            [z](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, InvPower>) {
                    return std::pow(z, -k.alpha);
                } else if constexpr (std::is_same_v<K, Log1pOverZ>) {
                    return z == 0.0 ? 1.0 : std::log1p(z) / z;
                } else if constexpr (std::is_same_v<K, PartialFraction>) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < k.weights.size(); ++i) s += k.weights[i] / (z + k.poles[i]);
                    return s;
                } else {
                    return k.closed_form(z);
                }
            },
            kind_);
    }

    /// Closed-form value of f (including the z multiplier for times_z).
    double operator()(double z) const {
        if (!(z > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        if (transform_ == Transform::plain) return base(z);
        if (const auto* p = std::get_if<InvPower>(&kind_)) return p->alpha == 0.5 ? std::sqrt(z) : std::pow(z, 1.0 - p->alpha);
        if (std::holds_alternative<Log1pOverZ>(kind_)) return std::log1p(z);
        return z * base(z);
    }

    /// Density w(t) of dmu(t) = w(t) dt; zero for discrete measures.
    double density(double t) const {
        return std::visit(
            [t](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, InvPower>) {
                    return t <= 0.0 ? std::numeric_limits<double>::infinity()
                                    : std::sin(k.alpha * std::numbers::pi) / std::numbers::pi * std::pow(t, -k.alpha);
                } else if constexpr (std::is_same_v<K, Log1pOverZ>) {
                    return t < 1.0 ? 0.0 : 1.0 / t;
                } else if constexpr (std::is_same_v<K, PartialFraction>) {
                    return 0.0;
                } else {
                    return t < k.support_start ? 0.0 : k.density(t);
                }
            },
            kind_);
    }

    std::string name() const {
        std::ostringstream os;
        std::visit(
            [&os](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, InvPower>) {
                    os << "inv_power(" << k.alpha << ")";
                } else if constexpr (std::is_same_v<K, Log1pOverZ>) {
                    os << "log1p_over_z";
                } else if constexpr (std::is_same_v<K, PartialFraction>) {
                    os << "partial_fraction(" << k.weights.size() << ")";
                } else {
                    os << k.name;
                }
            },
            kind_);
        if (transform_ == Transform::times_z) os << "*z";
        return os.str();
    }

    /// Mapped segments covering the support of a continuous measure, anchored at
    /// `scale` > 0: t in [t0, t0 + scale] and [t0 + scale, inf).
    std::vector<SegmentMap> segments(double scale) const {
        if (is_discrete()) throw ArgumentError("StieltjesFunction::segments: measure is discrete");
        if (!(scale > 0.0)) throw ArgumentError("StieltjesFunction::segments: scale must be positive");
        if (const auto* p = std::get_if<InvPower>(&kind_)) return inv_power_segments(p->alpha, scale);
        const double t0 = std::holds_alternative<Log1pOverZ>(kind_) ? 1.0 : std::get<CustomMeasure>(kind_).support_start;
        return moebius_segments(t0, scale);
    }

private:
    struct unchecked {};
    StieltjesFunction(StieltjesKind kind, Transform transform, unchecked)
        : kind_(std::move(kind)), transform_(transform) {}

    void validate() const {
        if (const auto* p = std::get_if<InvPower>(&kind_)) {
            if (!(p->alpha > 0.0 && p->alpha < 1.0)) {
                std::ostringstream os;
                os << "inv_power: alpha = " << p->alpha << " outside (0, 1)";
                throw ArgumentError(os.str());
            }
        } else if (const auto* pf = std::get_if<PartialFraction>(&kind_)) {
            if (pf->weights.empty() || pf->weights.size() != pf->poles.size())
                throw ArgumentError("partial_fraction: weights and poles must be nonempty and of equal length");
            for (std::size_t i = 0; i < pf->weights.size(); ++i) {
                if (!(pf->weights[i] > 0.0))
                    throw ArgumentError("partial_fraction: weights must be positive (signed measures are unsupported)");
                if (!(pf->poles[i] >= 0.0)) throw ArgumentError("partial_fraction: atoms t_i must be nonnegative");
                for (std::size_t j = 0; j < i; ++j)
                    if (pf->poles[j] == pf->poles[i])
                        throw ArgumentError("partial_fraction: atoms t_i must be pairwise distinct");
            }
        } else if (const auto* c = std::get_if<CustomMeasure>(&kind_)) {
            if (!c->density || !c->closed_form) throw ArgumentError("custom: density and closed form are required");
            if (!(c->support_start >= 0.0)) throw ArgumentError("custom: support must lie in [0, inf)");
        }
    }

    // t = scale u/(1-u); u = s^p/2 near 0 and 1-u = r^q/2 near 1 with
    // p = 1/(1-alpha), q = 1/alpha, which cancels both algebraic endpoint
    // behaviours of t^{-alpha}/(z+t). Weights are written in closed form.
    static std::vector<SegmentMap> inv_power_segments(double alpha, double scale) {
        const double c = std::sin(alpha * std::numbers::pi) / std::numbers::pi;
        const double p = 1.0 / (1.0 - alpha);
        const double q = 1.0 / alpha;
        const double lam_pow = std::pow(scale, 1.0 - alpha);
        SegmentMap near_zero = [=](double s) {
            const double u = 0.5 * std::pow(s, p);
            const double t = scale * u / (1.0 - u);
            const double w = c * lam_pow * std::pow(2.0, alpha - 1.0) * p * std::pow(1.0 - u, alpha - 2.0);
            return MappedNode{t, w};
        };
        SegmentMap near_inf = [=](double r) {
            const double uc = 0.5 * std::pow(r, q);
            if (uc == 0.0) return MappedNode{std::numeric_limits<double>::infinity(), 0.0};
            const double t = scale * (1.0 - uc) / uc;
            const double w = c * lam_pow * std::pow(1.0 - uc, -alpha) * std::pow(2.0, 1.0 - alpha) * q * std::pow(r, -q);
            return MappedNode{t, w};
        };
        return {near_zero, near_inf};
    }

    std::vector<SegmentMap> moebius_segments(double t0, double scale) const {
        std::function<double(double)> w;
        if (const auto* c = std::get_if<CustomMeasure>(&kind_)) {
            w = [d = c->density, t0](double t) { return t < t0 ? 0.0 : d(t); };
        } else {
            w = [](double t) { return t < 1.0 ? 0.0 : 1.0 / t; };
        }
        SegmentMap near_zero = [=](double s) {
            const double u = 0.5 * s;
            const double t = t0 + scale * u / (1.0 - u);
            return MappedNode{t, w(t) * 0.5 * scale / ((1.0 - u) * (1.0 - u))};
        };
        SegmentMap near_inf = [=](double r) {
            const double uc = 0.5 * r;
            if (uc == 0.0) return MappedNode{std::numeric_limits<double>::infinity(), 0.0};
            const double t = t0 + scale * (1.0 - uc) / uc;
            return MappedNode{t, w(t) * 0.5 * scale / (uc * uc)};
        };
        return {near_zero, near_inf};
    }

    StieltjesKind kind_;
    Transform transform_;
};

/// Value of the defining integral of g at z (times z for the times_z class).
inline double evaluate_by_quadrature(const StieltjesFunction& f, double z, double rel_tol = 1e-12,
                                     QuadratureConfig cfg = {}) {
    if (!(z > 0.0)) throw ArgumentError("evaluate_by_quadrature: z must be positive");
    const double mult = f.transform() == Transform::times_z ? z : 1.0;
    if (const auto* pf = f.discrete()) {
        double s = 0.0;
        for (std::size_t i = 0; i < pf->weights.size(); ++i) s += pf->weights[i] / (z + pf->poles[i]);
        return mult * s;
    }
    cfg.rel_tol = std::max(rel_tol, 1e-12) * 0.1;
    const auto segs = f.segments(cfg.scale > 0.0 ? cfg.scale : z);
    const auto res = integrate_adaptive_scalar(segs, [z](double t) { return 1.0 / (z + t); }, cfg);
    return mult * res.value[0];
}

/// Checks the built-in density/closed-form pairing at a few points and
/// nonnegativity of the density on a log-spaced grid of [1e-8, 1e8].
inline void verify_representation(const StieltjesFunction& f) {
    if (f.is_discrete()) return;
    for (int k = 0; k <= 32; ++k) {
        const double t = std::pow(10.0, -8.0 + 0.5 * k);
        const double w = f.density(t);
        if (!(w >= 0.0)) {
            std::ostringstream os;
            os << f.name() << ": density negative or undefined at t = " << t;
            throw ArgumentError(os.str());
        }
    }
    const StieltjesFunction g = f.with_transform(Transform::plain);
    for (double z : {0.1, 1.0, 10.0, 1000.0}) {
        const double closed = g(z);
        const double quad = evaluate_by_quadrature(g, z, 1e-12);
        if (!(std::abs(quad - closed) <= 1e-10 * std::abs(closed))) {
            std::ostringstream os;
            os.precision(17);
            os << f.name() << ": measure does not reproduce the closed form at z = " << z << " (quadrature "
               << quad << ", closed form " << closed << ")";
            throw ArgumentError(os.str());
        }
    }
}

inline StieltjesFunction make_stieltjes(StieltjesKind kind, Transform transform = Transform::plain) {
    StieltjesFunction f(std::move(kind), transform);
    verify_representation(f);
    return f;
}

inline StieltjesFunction make_inv_power(double alpha, Transform transform = Transform::plain) {
    return make_stieltjes(InvPower{alpha}, transform);
}

inline StieltjesFunction make_inv_sqrt() { return make_inv_power(0.5); }
inline StieltjesFunction make_sqrt() { return make_inv_power(0.5, Transform::times_z); }
inline StieltjesFunction make_log1p_over_z(Transform transform = Transform::plain) {
    return make_stieltjes(Log1pOverZ{}, transform);
}
inline StieltjesFunction make_partial_fraction(Vector weights, Vector poles, Transform transform = Transform::plain) {
    return make_stieltjes(PartialFraction{std::move(weights), std::move(poles)}, transform);
}
inline StieltjesFunction make_inverse() { return make_partial_fraction({1.0}, {0.0}); }

/// Outcome of a property check; `failures` names each violated point.
struct PropertyReport {
    bool passed = true;
    std::size_t checks = 0;
    std::vector<std::string> failures;

    /// Only the first `max_listed` failures are kept verbatim.
    static constexpr std::size_t max_listed = 20;
    std::size_t failure_count = 0;

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            passed = false;
            ++failure_count;
            if (failures.size() < max_listed) failures.push_back(what);
        }
    }
    void merge(const PropertyReport& other) {
        checks += other.checks;
        passed = passed && other.passed;
        failure_count += other.failure_count;
        for (const auto& f : other.failures)
            if (failures.size() < max_listed) failures.push_back(f);
    }
};

/// f'(z) of the times_z class as int t/(t+z)^2 dmu(t).
inline double times_z_derivative_by_quadrature(const StieltjesFunction& f, double z, QuadratureConfig cfg = {}) {
    if (const auto* pf = f.discrete()) {
        double s = 0.0;
        for (std::size_t i = 0; i < pf->weights.size(); ++i) {
            const double d = pf->poles[i] + z;
            s += pf->weights[i] * pf->poles[i] / (d * d);
        }
        return s;
    }
    const auto segs = f.segments(cfg.scale > 0.0 ? cfg.scale : z);
    return integrate_adaptive_scalar(segs, [z](double t) { return t / ((t + z) * (t + z)); }, cfg).value[0];
}

/// Sign pattern (-1)^k f^(k) >= 0 of the Stieltjes function g for k <= max_order,
/// by central differences with step h = 1e-4 z. For the times_z class the
/// monotonicity f' >= 0 is checked as well, cross-checking the integral formula
/// for f' against differences.
inline PropertyReport check_complete_monotonicity(const StieltjesFunction& f, std::span<const double> grid,
                                                  int max_order) {
    if (max_order < 0 || max_order > 3) throw ArgumentError("check_complete_monotonicity: order must be in [0, 3]");
    PropertyReport rep;
    const StieltjesFunction g = f.with_transform(Transform::plain);
    for (double z : grid) {
        const double h = 1e-4 * z;
        const double g0 = g(z);
        const double gp = g(z + h);
        const double gm = g(z - h);
        const double derivs[4] = {g0, (gp - gm) / (2.0 * h), (gp - 2.0 * g0 + gm) / (h * h),
                                  (g(z + 2.0 * h) - 2.0 * gp + 2.0 * gm - g(z - 2.0 * h)) / (2.0 * h * h * h)};
        for (int k = 0; k <= max_order; ++k) {
            const double signed_val = (k % 2 == 0 ? 1.0 : -1.0) * derivs[k];
            std::ostringstream os;
            os << g.name() << ": (-1)^" << k << " f^(" << k << ")(" << z << ") = " << signed_val << " < -1e-6";
            rep.expect(signed_val >= -1e-6, os.str());
        }
        if (f.transform() == Transform::times_z) {
            const double fd = (f(z + h) - f(z - h)) / (2.0 * h);
            const double quad = times_z_derivative_by_quadrature(f, z);
            std::ostringstream os1;
            os1 << f.name() << ": f'(" << z << ") = " << quad << " < -1e-6";
            rep.expect(quad >= -1e-6, os1.str());
            std::ostringstream os2;
            os2 << f.name() << ": f'(" << z << ") integral " << quad << " vs difference " << fd
                << " differ by more than 1e-4 relative";
            rep.expect(std::abs(quad - fd) <= 1e-4 * std::abs(quad), os2.str());
        }
    }
    return rep;
}

}  // namespace lanczos_opt
