#pragma once

// Best uniform polynomial approximation on finite point sets (discrete Remez
// exchange in a Chebyshev basis) and partial-fraction approximants of
// Stieltjes functions built from Gauss quadrature of their measure.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "lanczos_opt/errors.hpp"
#include "lanczos_opt/linalg.hpp"
#include "lanczos_opt/quadrature.hpp"
#include "lanczos_opt/stieltjes.hpp"

namespace lanczos_opt {

using ScalarFunction = std::function<double(double)>;

/// Polynomial sum_j c_j T_j(s), s = (2x - lo - hi) / (hi - lo).
struct ChebyshevSeries {
    Vector coefficients;
    double lo = -1.0;
    double hi = 1.0;

    double map(double x) const { return hi > lo ? (2.0 * x - lo - hi) / (hi - lo) : 0.0; }

    double operator()(double x) const {
        // Clenshaw recurrence
        const double s = map(x);
        double b1 = 0.0;
        double b2 = 0.0;
        for (std::size_t j = coefficients.size(); j-- > 1;) {
            const double b0 = 2.0 * s * b1 - b2 + coefficients[j];
            b2 = b1;
            b1 = b0;
        }
        const double c0 = coefficients.empty() ? 0.0 : coefficients[0];
        return s * b1 - b2 + c0;
    }
};

struct MinimaxResult {
    std::size_t degree = 0;
    ChebyshevSeries polynomial;
    double minimax_error = 0.0;
    /// Last levelled reference and the residual f - p there.
    Vector reference_set;
    Vector reference_residuals;
    /// Level |h| of the last reference system (a lower bound on the minimax error).
    double level = 0.0;
    std::size_t iterations = 0;
    /// (level |h|, max residual) of every exchange iteration.
    std::vector<std::pair<double, double>> history;
    /// Error below the double-precision reporting floor of 1e-13.
    bool floor = false;
    /// Reached the stopping rule rather than a roundoff plateau.
    bool converged = true;

    double operator()(double x) const { return polynomial(x); }

    /// Sign changes of the residual along the reference set.
    std::size_t alternations() const {
        std::size_t count = 0;
        for (std::size_t i = 1; i < reference_residuals.size(); ++i)
            if (reference_residuals[i] * reference_residuals[i - 1] < 0.0) ++count;
        return count;
    }
};

inline constexpr double minimax_floor = 1e-13;

namespace detail {

/// Gaussian elimination with partial pivoting; a is n x n row-major.
inline Vector solve_dense(std::vector<double> a, Vector b) {
    const std::size_t n = b.size();
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[p * n + k])) p = i;
        if (!(std::abs(a[p * n + k]) > 1e-14 * scale))
            throw DegeneracyError("remez: levelled reference system is singular");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
            std::swap(b[k], b[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = a[i * n + k] / a[k * n + k];
            if (l == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a[i * n + j] -= l * a[k * n + j];
            b[i] -= l * b[k];
        }
    }
    Vector x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
        x[i] = s / a[i * n + i];
    }
    return x;
}

/// T_0(s) .. T_d(s)
inline void chebyshev_row(double s, std::size_t d, double* out) {
    out[0] = 1.0;
    if (d >= 1) out[1] = s;
    for (std::size_t j = 2; j <= d; ++j) out[j] = 2.0 * s * out[j - 1] - out[j - 2];
}

inline std::vector<std::size_t> initial_reference(std::span<const double> pts, std::size_t d) {
    const std::size_t k = d + 2;
    const double lo = pts.front();
    const double hi = pts.back();
    std::vector<double> targets(k);
    for (std::size_t i = 0; i < k; ++i)
        targets[i] = 0.5 * (lo + hi) - 0.5 * (hi - lo) * std::cos(std::numbers::pi * i / static_cast<double>(k - 1));
    auto nearest = [&](double x) {
        auto it = std::lower_bound(pts.begin(), pts.end(), x);
        std::size_t j = static_cast<std::size_t>(it - pts.begin());
        if (j == pts.size()) return j - 1;
        if (j > 0 && x - pts[j - 1] <= pts[j] - x) return j - 1;
        return j;
    };
    std::vector<char> used(pts.size(), 0);
    std::vector<std::size_t> ref;
    for (double x : targets) {
        const std::size_t j = nearest(x);
        if (!used[j]) {
            used[j] = 1;
            ref.push_back(j);
        }
    }
    // pad with the unused points closest to the targets
    for (std::size_t round = 0; ref.size() < k; ++round) {
        const double x = targets[round % k];
        std::size_t best = pts.size();
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (!used[j] && (best == pts.size() || std::abs(pts[j] - x) < std::abs(pts[best] - x))) best = j;
        used[best] = 1;
        ref.push_back(best);
    }
    std::sort(ref.begin(), ref.end());
    return ref;
}

/// Multiple exchange: one extremum per maximal run of constant residual sign,
/// trimmed to k points; falls back to inserting the global maximiser alone.
inline std::vector<std::size_t> exchange(const Vector& r, const std::vector<std::size_t>& old_ref, std::size_t k) {
    const std::size_t n = r.size();
    std::vector<std::size_t> picks;
    std::size_t i = 0;
    while (i < n) {
        while (i < n && r[i] == 0.0) ++i;
        if (i == n) break;
        const bool pos = r[i] > 0.0;
        std::size_t best = i;
        while (i < n && (r[i] == 0.0 || (r[i] > 0.0) == pos)) {
            if (std::abs(r[i]) > std::abs(r[best])) best = i;
            ++i;
        }
        picks.push_back(best);
    }
    std::size_t gmax = 0;
    for (std::size_t j = 1; j < n; ++j)
        if (std::abs(r[j]) > std::abs(r[gmax])) gmax = j;
    if (picks.size() >= k) {
        std::size_t left = 0;
        std::size_t right = picks.size();
        while (right - left > k) {
            // drop the smaller endpoint, never the global maximiser
            const bool drop_left = picks[left] != gmax &&
                                   (picks[right - 1] == gmax || std::abs(r[picks[left]]) <= std::abs(r[picks[right - 1]]));
            if (drop_left) ++left;
            else --right;
        }
        return {picks.begin() + left, picks.begin() + right};
    }
    // single exchange of the global maximiser into the old reference
    std::vector<std::size_t> ref = old_ref;
    if (std::find(ref.begin(), ref.end(), gmax) != ref.end()) return ref;
    auto sgn = [&](std::size_t j) { return r[j] > 0.0 ? 1 : -1; };
    auto pos = std::lower_bound(ref.begin(), ref.end(), gmax);
    if (pos == ref.begin()) {
        if (sgn(ref.front()) == sgn(gmax)) ref.front() = gmax;
        else {
            ref.insert(ref.begin(), gmax);
            ref.pop_back();
        }
    } else if (pos == ref.end()) {
        if (sgn(ref.back()) == sgn(gmax)) ref.back() = gmax;
        else {
            ref.push_back(gmax);
            ref.erase(ref.begin());
        }
    } else {
        auto prev = pos - 1;
        if (sgn(*prev) == sgn(gmax)) *prev = gmax;
        else *pos = gmax;
    }
    return ref;
}

}  // namespace detail

/// Best uniform approximation of degree d on an ascending set of distinct points.
inline MinimaxResult remez_discrete(const ScalarFunction& f, std::span<const double> points, std::size_t d,
                                    std::size_t max_iterations = 100) {
    const std::size_t n = points.size();
    if (n == 0) throw ArgumentError("remez_discrete: empty point set");
    for (std::size_t i = 1; i < n; ++i)
        if (!(points[i] > points[i - 1])) throw ArgumentError("remez_discrete: points must be ascending and distinct");
    Vector fv(n);
    double fmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fv[i] = f(points[i]);
        if (!std::isfinite(fv[i])) {
            std::ostringstream os;
            os << "remez_discrete: f is not finite at x = " << points[i];
            throw DomainError(os.str());
        }
        fmax = std::max(fmax, std::abs(fv[i]));
    }
    MinimaxResult res;
    res.degree = d;
    res.polynomial.lo = points.front();
    res.polynomial.hi = points.back();
    const ChebyshevSeries& cheb = res.polynomial;

    if (n <= d + 1) {
        // interpolation through all points
        std::vector<double> a(n * n);
        for (std::size_t i = 0; i < n; ++i) detail::chebyshev_row(cheb.map(points[i]), n - 1, &a[i * n]);
        Vector c = detail::solve_dense(std::move(a), fv);
        c.resize(d + 1, 0.0);
        res.polynomial.coefficients = std::move(c);
        res.reference_set.assign(points.begin(), points.end());
        res.reference_residuals.assign(n, 0.0);
        res.floor = true;
        return res;
    }

    const std::size_t k = d + 2;
    std::vector<std::size_t> ref = detail::initial_reference(points, d);
    MinimaxResult best;
    best.minimax_error = std::numeric_limits<double>::infinity();
    const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * fmax;
    Vector r(n);
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        std::vector<double> a(k * k);
        Vector rhs(k);
        for (std::size_t i = 0; i < k; ++i) {
            detail::chebyshev_row(cheb.map(points[ref[i]]), d, &a[i * k]);
            a[i * k + d + 1] = (i % 2 == 0) ? 1.0 : -1.0;
            rhs[i] = fv[ref[i]];
        }
        const Vector sol = detail::solve_dense(std::move(a), std::move(rhs));
        res.polynomial.coefficients.assign(sol.begin(), sol.begin() + (d + 1));
        const double h = std::abs(sol[d + 1]);
        double rmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = fv[i] - cheb(points[i]);
            rmax = std::max(rmax, std::abs(r[i]));
        }
        res.minimax_error = rmax;
        res.level = h;
        res.iterations = it;
        res.history.emplace_back(h, rmax);
        res.reference_set.resize(k);
        res.reference_residuals.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            res.reference_set[i] = points[ref[i]];
            res.reference_residuals[i] = r[ref[i]];
        }
        res.floor = rmax < minimax_floor;
        if (rmax < best.minimax_error) best = res;
        if (rmax <= (1.0 + 1e-10) * h) return res;
        if (rmax - h <= roundoff) {
            res.converged = rmax <= (1.0 + 1e-10) * h;
            return res;
        }
        std::vector<std::size_t> next = detail::exchange(r, ref, k);
        if (next == ref) {
            res.converged = false;
            if (res.floor) return res;
            std::ostringstream os;
            os << "remez_discrete: exchange stalled at degree " << d << " with error " << rmax << " and level " << h;
            throw ConvergenceError(os.str(), best.minimax_error);
        }
        ref = std::move(next);
    }
    best.converged = false;
    if (best.floor) return best;
    std::ostringstream os;
    os << "remez_discrete: no convergence in " << max_iterations << " iterations at degree " << d;
    throw ConvergenceError(os.str(), best.minimax_error);
}

/// Chebyshev-Lobatto points a - (b - a)/2 (cos(pi k/(N-1)) - 1), ascending, endpoints exact.
inline Vector chebyshev_lobatto(double a, double b, std::size_t count) {
    if (count < 2) throw ArgumentError("chebyshev_lobatto: need at least two points");
    Vector x(count);
    for (std::size_t k = 0; k < count; ++k)
        x[k] = 0.5 * (a + b) - 0.5 * (b - a) * std::cos(std::numbers::pi * k / static_cast<double>(count - 1));
    x.front() = a;
    x.back() = b;
    return x;
}

inline constexpr std::size_t default_interval_grid = 4096;

/// Minimax on [a, b] discretised by `grid_points` Chebyshev-Lobatto nodes.
/// The discretisation error decays like ((b - a)/grid_points)^2.
inline MinimaxResult remez_interval(const ScalarFunction& f, double a, double b, std::size_t d,
                                    std::size_t grid_points = default_interval_grid) {
    if (!(a > 0.0) || !(b > a)) throw ArgumentError("remez_interval: need b > a > 0");
    if (grid_points < 10 * (d + 2)) {
        std::ostringstream os;
        os << "remez_interval: grid of " << grid_points << " points is too coarse for degree " << d
           << " (need at least " << 10 * (d + 2) << ")";
        throw ArgumentError(os.str());
    }
    const Vector grid = chebyshev_lobatto(a, b, grid_points);
    return remez_discrete(f, grid, d);
}

/// Partial-fraction approximant r(z) = sum sigma_i / (z + t_i) of a Stieltjes function.
struct RationalApproximation {
    StieltjesFunction function;
    std::size_t nodes = 0;
    /// max |r - f| / |f| on a 200-point logarithmic grid of [lo, hi].
    double max_rel_error = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Gauss quadrature of the Stieltjes integral with `ell` nodes, after the map
/// t = t0 + lambda (1 + x)/(1 - x), lambda = sqrt(lo hi). The transform flag of f
/// is kept, so r tracks z g(z) when f does.
inline RationalApproximation rational_from_quadrature(const StieltjesFunction& f, std::size_t ell, double lo, double hi) {
    if (ell < 1) throw ArgumentError("rational_from_quadrature: need at least one node");
    if (!(lo > 0.0) || !(hi >= lo)) throw ArgumentError("rational_from_quadrature: need hi >= lo > 0");
    const double lambda = std::sqrt(lo * hi);
    Vector sigma(ell);
    Vector poles(ell);
    if (const auto* pf = f.discrete()) {
        if (ell < pf->weights.size()) {
            std::ostringstream os;
            os << "rational_from_quadrature: a discrete measure with " << pf->weights.size()
               << " atoms cannot be reduced to " << ell << " nodes";
            throw ArgumentError(os.str());
        }
        sigma = pf->weights;
        poles = pf->poles;
    } else if (const auto* ip = std::get_if<InvPower>(&f.kind())) {
        const double alpha = ip->alpha;
        const double c = std::sin(alpha * std::numbers::pi) / std::numbers::pi;
        const GaussRule g = gauss_jacobi(ell, alpha - 1.0, -alpha);
        for (std::size_t i = 0; i < ell; ++i) {
            const double x = g.nodes[i];
            poles[i] = lambda * (1.0 + x) / (1.0 - x);
            sigma[i] = 2.0 * c * std::pow(lambda, 1.0 - alpha) * g.weights[i] / (1.0 - x);
        }
    } else {
        double t0 = 1.0;
        std::function<double(double)> w = [](double t) { return 1.0 / t; };
        if (const auto* cm = std::get_if<CustomMeasure>(&f.kind())) {
            t0 = cm->support_start;
            w = cm->density;
        }
        const GaussRule g = gauss_jacobi(ell, 0.0, 0.0);
        for (std::size_t i = 0; i < ell; ++i) {
            const double x = g.nodes[i];
            poles[i] = t0 + lambda * (1.0 + x) / (1.0 - x);
            sigma[i] = g.weights[i] * 2.0 * lambda / ((1.0 - x) * (1.0 - x)) * w(poles[i]);
        }
    }
    RationalApproximation out{make_partial_fraction(sigma, poles, f.transform()), sigma.size(), 0.0, lo, hi};
    constexpr std::size_t grid = 200;
    for (std::size_t k = 0; k < grid; ++k) {
        const double z = hi > lo ? lo * std::pow(hi / lo, static_cast<double>(k) / (grid - 1)) : lo;
        const double fz = f(z);
        out.max_rel_error = std::max(out.max_rel_error, std::abs(out.function(z) - fz) / std::abs(fz));
    }
    return out;
}

}  // namespace lanczos_opt
