#pragma once

// Quadrature over the half line for integrals against a measure dmu(t).
//
// The half line is covered by mapped segments s in [0, 1] -> t(s), each
// returning the mapped density w(t(s)) * |dt/ds|. Segment maps are chosen by
// the caller so that the mapped integrand is smooth; adaptive Gauss-Kronrod
// (7/15) bisection then works on [0, 1] per segment.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

#include "lanczos_opt/errors.hpp"
#include "lanczos_opt/linalg.hpp"

namespace lanczos_opt {

/// A point of a mapped segment: t(s) and w(t(s)) |dt/ds|.
struct MappedNode {
    double t;
    double weight;
};

using SegmentMap = std::function<MappedNode(double)>;

struct QuadratureConfig {
    double rel_tol = 1e-12;
    double abs_tol = 0.0;
    std::size_t max_evaluations = 1'000'000;
    /// Scale anchor of the half-line map; 0 selects a default per call site.
    double scale = 0.0;
    std::size_t initial_subintervals = 4;
};

/// Final integration rule: integral ~ sum weight_i * phi(t_i).
struct QuadratureNode {
    double t;
    double weight;
};

struct QuadratureResult {
    Vector value;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    std::vector<QuadratureNode> rule;
};

namespace detail {

// Kronrod abscissae on [-1, 1]; odd indices (1, 3, 5, 7) are the Gauss nodes.
inline constexpr std::array<double, 8> kronrod_x{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
    std::size_t segment;
    double a;
    double b;
    Vector kronrod;
    double error;
};

struct IntervalOrder {
    bool operator()(const Interval& x, const Interval& y) const { return x.error < y.error; }
};

/// The 15 s-abscissae and Kronrod weights of [a, b] (weights include the half length).
inline void kronrod_points(double a, double b, std::array<double, 15>& s, std::array<double, 15>& w) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    for (std::size_t k = 0; k < 7; ++k) {
        s[2 * k] = c - h * kronrod_x[k];
        s[2 * k + 1] = c + h * kronrod_x[k];
        w[2 * k] = w[2 * k + 1] = h * kronrod_w[k];
    }
    s[14] = c;
    w[14] = h * kronrod_w[7];
}

}  // namespace detail

/// Adaptive integration of a vector-valued integrand phi(t) against the measure
/// described by `segments`. `phi(t, out)` writes `dim` values into `out`.
template <class Integrand>
QuadratureResult integrate_adaptive(std::span<const SegmentMap> segments, std::size_t dim, Integrand&& phi,
                                    const QuadratureConfig& cfg) {
    using detail::Interval;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    std::size_t evaluations = 0;
    Vector buf(dim);

    auto eval_interval = [&](std::size_t seg, double a, double b) {
        const double c = 0.5 * (a + b);
        const double h = 0.5 * (b - a);
        Interval iv{seg, a, b, Vector(dim, 0.0), 0.0};
        Vector gauss(dim, 0.0);
        double resabs = 0.0;
        auto add = [&](double s, double wk, double wg) {
            const MappedNode node = segments[seg](s);
            if (node.weight == 0.0 || !std::isfinite(node.t) || !std::isfinite(node.weight)) return;
            std::fill(buf.begin(), buf.end(), 0.0);
            phi(node.t, std::span<double>(buf));
            ++evaluations;
            const double nb = norm2(buf);
            resabs += std::abs(wk * node.weight) * nb;
            for (std::size_t i = 0; i < dim; ++i) {
                iv.kronrod[i] += wk * node.weight * buf[i];
                if (wg != 0.0) gauss[i] += wg * node.weight * buf[i];
            }
        };
        for (std::size_t k = 0; k < 7; ++k) {
            const double wg = (k % 2 == 1) ? h * detail::gauss_w[k / 2] : 0.0;
            add(c - h * detail::kronrod_x[k], h * detail::kronrod_w[k], wg);
            add(c + h * detail::kronrod_x[k], h * detail::kronrod_w[k], wg);
        }
        add(c, h * detail::kronrod_w[7], h * detail::gauss_w[3]);
        Vector diff = subtract(iv.kronrod, gauss);
        iv.error = std::max(norm2(diff), 50.0 * eps * resabs);
        return iv;
    };

    std::priority_queue<Interval, std::vector<Interval>, detail::IntervalOrder> heap;
    const std::size_t init = std::max<std::size_t>(1, cfg.initial_subintervals);
    for (std::size_t seg = 0; seg < segments.size(); ++seg)
        for (std::size_t k = 0; k < init; ++k)
            heap.push(eval_interval(seg, static_cast<double>(k) / init, static_cast<double>(k + 1) / init));

    auto totals = [&](Vector& value, double& error) {
        // fixed-order summation keeps results reproducible
        auto copy = heap;
        std::vector<Interval> items;
        while (!copy.empty()) {
            items.push_back(copy.top());
            copy.pop();
        }
        std::sort(items.begin(), items.end(), [](const Interval& x, const Interval& y) {
            return x.segment != y.segment ? x.segment < y.segment : x.a < y.a;
        });
        value.assign(dim, 0.0);
        error = 0.0;
        for (const auto& iv : items) {
            axpy(1.0, iv.kronrod, value);
            error += iv.error;
        }
        return items;
    };

    // running sums for the termination test; recomputed exactly at the end
    Vector value(dim, 0.0);
    double error = 0.0;
    {
        auto copy = heap;
        while (!copy.empty()) {
            axpy(1.0, copy.top().kronrod, value);
            error += copy.top().error;
            copy.pop();
        }
    }

    while (error > std::max(cfg.rel_tol * norm2(value), cfg.abs_tol)) {
        if (evaluations >= cfg.max_evaluations) {
            std::ostringstream os;
            os << "integrate_adaptive: evaluation budget of " << cfg.max_evaluations
               << " exhausted with error estimate " << error << " (|I| = " << norm2(value) << ")";
            throw AccuracyError(os.str(), norm2(value), error);
        }
        Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // interval cannot be split further in double precision
            std::ostringstream os;
            os << "integrate_adaptive: interval collapsed near s = " << worst.a << " with error estimate " << error;
            throw AccuracyError(os.str(), norm2(value), error);
        }
        Interval left = eval_interval(worst.segment, worst.a, mid);
        Interval right = eval_interval(worst.segment, mid, worst.b);
        for (std::size_t i = 0; i < dim; ++i) value[i] += left.kronrod[i] + right.kronrod[i] - worst.kronrod[i];
        error += left.error + right.error - worst.error;
        heap.push(std::move(left));
        heap.push(std::move(right));
    }

    QuadratureResult out;
    auto items = totals(out.value, out.error_estimate);
    out.evaluations = evaluations;
    std::array<double, 15> s{};
    std::array<double, 15> w{};
    for (const auto& iv : items) {
        detail::kronrod_points(iv.a, iv.b, s, w);
        for (std::size_t k = 0; k < 15; ++k) {
            const MappedNode node = segments[iv.segment](s[k]);
            if (node.weight == 0.0 || !std::isfinite(node.t) || !std::isfinite(node.weight)) continue;
            out.rule.push_back({node.t, w[k] * node.weight});
        }
    }
    return out;
}

/// Scalar convenience wrapper.
template <class F>
QuadratureResult integrate_adaptive_scalar(std::span<const SegmentMap> segments, F&& f, const QuadratureConfig& cfg) {
    return integrate_adaptive(
        segments, 1, [&](double t, std::span<double> out) { out[0] = f(t); }, cfg);
}

/// Gauss rule for the weight (1 - x)^a (1 + x)^b on [-1, 1], a, b > -1,
/// by the Golub-Welsch eigenvalue method.
struct GaussRule {
    Vector nodes;
    Vector weights;
};

inline GaussRule gauss_jacobi(std::size_t n, double a, double b) {
    if (n == 0) throw ArgumentError("gauss_jacobi: need at least one node");
    if (!(a > -1.0) || !(b > -1.0)) throw ArgumentError("gauss_jacobi: exponents must exceed -1");
    Vector diag(n);
    Vector off(n > 0 ? n - 1 : 0);
    const double ab = a + b;
    diag[0] = (b - a) / (ab + 2.0);
    for (std::size_t k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        diag[k] = (b * b - a * a) / ((2.0 * kk + ab) * (2.0 * kk + ab + 2.0));
    }
    for (std::size_t k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        double beta;
        if (k == 1) {
            // (k + a + b) cancels against (2k + a + b - 1) when a + b = -1
            beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        } else {
            const double s = 2.0 * kk + ab;
            beta = 4.0 * kk * (kk + a) * (kk + b) * (kk + ab) / (s * s * (s + 1.0) * (s - 1.0));
        }
        off[k - 1] = std::sqrt(beta);
    }
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                                std::lgamma(ab + 2.0));
    EigenPairs ep = tridiag_eigh(SymTridiagonal(std::move(diag), std::move(off)));
    GaussRule rule{ep.values, Vector(n)};
    for (std::size_t j = 0; j < n; ++j) {
        const double v0 = ep.vectors(0, j);
        rule.weights[j] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace lanczos_opt
