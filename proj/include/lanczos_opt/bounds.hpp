#pragma once

// Error bounds for the Lanczos approximation of f(A) b: instance-optimality
// factors relative to the best Krylov error, and the classical comparison
// bounds built from polynomial minimax errors, condition numbers and
// rational approximants.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

#include "lanczos_opt/approx.hpp"
#include "lanczos_opt/errors.hpp"
#include "lanczos_opt/kernels.hpp"
#include "lanczos_opt/stieltjes.hpp"

namespace lanczos_opt {

struct BoundValue {
    std::string name;
    /// Multiplier of `reference`; value = factor * reference.
    double factor = 1.0;
    double value = 0.0;
    /// err_opt, or the minimax error for the polynomial bounds.
    double reference = 0.0;
    std::size_t m = 0;
    double beta_next = 0.0;
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
};

namespace detail {

inline void require_positive_interval(double lo, double hi, const char* who) {
    if (!(lo > 0.0)) {
        std::ostringstream os;
        os << who << ": lambda_lo = " << lo << " is not positive; A must be positive definite";
        throw DomainError(os.str());
    }
    if (!(hi >= lo)) throw ArgumentError(std::string(who) + ": need lambda_hi >= lambda_lo");
}

inline BoundValue relative_bound(std::string name, double factor, double err_opt, double lo, double hi,
                                 double beta = 0.0, std::size_t m = 0) {
    return BoundValue{std::move(name), factor, factor * err_opt, err_opt, m, beta, lo, hi};
}

}  // namespace detail

/// (1 + beta lambda_hi / lambda_lo^2) err_opt
inline BoundValue bound_beta(double beta_next, double lo, double hi, double err_opt, std::size_t m = 0) {
    detail::require_positive_interval(lo, hi, "bound_beta");
    if (!(beta_next >= 0.0)) throw ArgumentError("bound_beta: beta_{m+1} must be nonnegative");
    return detail::relative_bound("beta", 1.0 + beta_next * hi / (lo * lo), err_opt, lo, hi, beta_next, m);
}

/// (1 + kappa^2) err_opt
inline BoundValue bound_kappa_squared(double lo, double hi, double err_opt, std::size_t m = 0) {
    detail::require_positive_interval(lo, hi, "bound_kappa_squared");
    const double kappa = hi / lo;
    return detail::relative_bound("kappa_squared", 1.0 + kappa * kappa, err_opt, lo, hi, 0.0, m);
}

inline std::pair<BoundValue, BoundValue> bound_main(double beta_next, double lo, double hi, double err_opt,
                                                    std::size_t m = 0) {
    return {bound_beta(beta_next, lo, hi, err_opt, m), bound_kappa_squared(lo, hi, err_opt, m)};
}

/// (1 + |f1(T_m) e_m| / |f2(S) e_1|) err_opt from precomputed components.
inline BoundValue bound_split(const ComponentApplication& head, const ComponentApplication& tail, double err_opt) {
    const double tn = tail.norm();
    if (!(tn > 0.0)) throw SingularityError("bound_split: tail component vanishes");
    BoundValue b = detail::relative_bound("split", 1.0 + head.norm() / tn, err_opt, 0.0, 0.0, 0.0, head.m);
    return b;
}

/// (1 + beta delta(0) kappa) err_opt
inline BoundValue bound_delta0(const KernelEvaluator& k, double kappa, double err_opt) {
    const double d0 = k.at(0.0).delta;
    return detail::relative_bound("delta0", 1.0 + k.beta_next() * d0 * kappa, err_opt, 0.0, 0.0, k.beta_next(), k.m());
}

inline std::pair<BoundValue, BoundValue> bound_intermediate(const KernelEvaluator& k, const StieltjesFunction& f,
                                                            double kappa, double err_opt, QuadratureConfig cfg = {}) {
    const ComponentApplication head = f1_apply(k, f, cfg);
    const ComponentApplication tail = f2_apply(k, f, cfg);
    return {bound_split(head, tail, err_opt), bound_delta0(k, kappa, err_opt)};
}

/// 2 min_{deg p < m} max_{[lo, hi]} |f - p|
inline BoundValue bound_fov(const ScalarFunction& f, double lo, double hi, std::size_t m,
                            std::size_t grid = default_interval_grid) {
    if (m < 1) throw ArgumentError("bound_fov: m must be at least 1");
    detail::require_positive_interval(lo, hi, "bound_fov");
    double err = 0.0;
    if (hi > lo) err = remez_interval(f, lo, hi, m - 1, std::max(grid, 10 * (m + 1))).minimax_error;
    BoundValue b{"fov", 2.0, 2.0 * err, err, m, 0.0, lo, hi};
    return b;
}

enum class SpectrumBoundKind { inv_sqrt, sqrt };

/// inv_sqrt: 3 kappa / sqrt(pi m) times the minimax error of degree floor(m/2) - 1 on spec(A);
/// sqrt: 3 kappa^2 / m^{3/2} times the minimax error of degree floor(m/2) on spec(A) and 0.
inline BoundValue bound_spectrum(SpectrumBoundKind kind, std::span<const double> spectrum, double kappa, std::size_t m) {
    if (spectrum.empty()) throw ArgumentError("bound_spectrum: empty spectrum");
    if (!(spectrum.front() > 0.0)) throw DomainError("bound_spectrum: spectrum must be positive");
    const double md = static_cast<double>(m);
    double factor;
    double err;
    if (kind == SpectrumBoundKind::inv_sqrt) {
        if (m < 2) throw ArgumentError("bound_spectrum: need m >= 2 for the inverse square root");
        factor = 3.0 * kappa / std::sqrt(std::numbers::pi * md);
        err = remez_discrete([](double z) { return 1.0 / std::sqrt(z); }, spectrum, m / 2 - 1).minimax_error;
    } else {
        if (m < 1) throw ArgumentError("bound_spectrum: need m >= 1");
        factor = 3.0 * kappa * kappa / std::pow(md, 1.5);
        Vector pts;
        pts.reserve(spectrum.size() + 1);
        pts.push_back(0.0);
        pts.insert(pts.end(), spectrum.begin(), spectrum.end());
        err = remez_discrete([](double z) { return std::sqrt(z); }, pts, m / 2).minimax_error;
    }
    return BoundValue{"spectrum", factor, factor * err, err, m, 0.0, spectrum.front(), spectrum.back()};
}

/// ell prod_i kappa(A - z_i I) err_opt(m - ell + 1) for a rational with real poles z_i < lo;
/// err_opt(0) is |f(A) b|.
inline BoundValue bound_rational(std::span<const double> poles, double lo, double hi,
                                 const std::function<double(std::size_t)>& err_opt_at, std::size_t m) {
    detail::require_positive_interval(lo, hi, "bound_rational");
    const std::size_t ell = poles.size();
    if (ell == 0) throw ArgumentError("bound_rational: need at least one pole");
    if (m + 1 < ell) throw ArgumentError("bound_rational: need m >= ell - 1");
    double factor = static_cast<double>(ell);
    for (double z : poles) {
        if (z >= lo && z <= hi) {
            std::ostringstream os;
            os << "bound_rational: pole " << z << " lies in [" << lo << ", " << hi << "]";
            throw DomainError(os.str());
        }
        if (z > hi) throw DomainError("bound_rational: poles must lie on the negative real side of the spectrum");
        factor *= (hi - z) / (lo - z);
    }
    const double ref = err_opt_at(m + 1 - ell);
    return BoundValue{"rational", factor, factor * ref, ref, m, 0.0, lo, hi};
}

/// sqrt(kappa) err_opt, valid for f = 1/z.
inline BoundValue bound_cg(double kappa, double err_opt, std::size_t m = 0) {
    if (!(kappa >= 1.0)) throw ArgumentError("bound_cg: kappa must be at least 1");
    return detail::relative_bound("cg", std::sqrt(kappa), err_opt, 0.0, 0.0, 0.0, m);
}

/// Smallest and largest eigenvalue whose eigen-coefficient exceeds drop_tol in magnitude.
inline std::pair<double, double> effective_interval(std::span<const double> coeffs, std::span<const double> eigenvalues,
                                                    double drop_tol) {
    if (coeffs.size() != eigenvalues.size()) throw ArgumentError("effective_interval: length mismatch");
    std::size_t first = coeffs.size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        if (std::abs(coeffs[i]) > drop_tol) {
            first = std::min(first, i);
            last = i;
        }
    if (first == coeffs.size()) throw ArgumentError("effective_interval: every coefficient is below the drop tolerance");
    return {eigenvalues[first], eigenvalues[last]};
}

}  // namespace lanczos_opt
