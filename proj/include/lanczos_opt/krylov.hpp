#pragma once

// Lanczos iteration with full reorthogonalization, the Lanczos approximation
// V_m f(T_m) e_1, the optimal Krylov approximation V_m V_m^T f(A) b and the
// block split of the Lanczos error at the invariance index.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>

#include "lanczos_opt/errors.hpp"
#include "lanczos_opt/kernels.hpp"
#include "lanczos_opt/linalg.hpp"
#include "lanczos_opt/stieltjes.hpp"

namespace lanczos_opt {

struct LanczosDecomposition {
    Vector alphas;
    /// beta_2 .. beta_{k+1} for k stored steps; the last entry is the trailing beta.
    Vector betas;
    /// n x k orthonormal columns v_1 .. v_k.
    Matrix basis;
    /// v_{k+1}; absent at breakdown.
    std::optional<Vector> next_vector;
    std::optional<std::size_t> invariance_index;
    double breakdown_tol = 0.0;
    std::size_t source_dim = 0;

    std::size_t steps() const noexcept { return alphas.size(); }

    std::size_t invariance() const {
        if (!invariance_index) throw ArgumentError("LanczosDecomposition: iteration did not reach the invariance index");
        return *invariance_index;
    }

    /// T_k, k <= steps().
    SymTridiagonal tridiagonal(std::size_t k) const {
        if (k < 1 || k > steps()) throw ArgumentError("LanczosDecomposition: requested block exceeds stored steps");
        return SymTridiagonal(Vector(alphas.begin(), alphas.begin() + k), Vector(betas.begin(), betas.begin() + (k - 1)));
    }

    /// beta_{k+1}
    double beta_next(std::size_t k) const {
        if (k < 1 || k > steps()) throw ArgumentError("LanczosDecomposition: index out of range");
        return betas[k - 1];
    }
};

inline double default_breakdown_tol(const SpectralMatrix& a) { return 1e-12 * a.lambda_max(); }

/// Lanczos on a unit vector b, stopping at m_max steps or at the first beta
/// at or below breakdown_tol. A negative tolerance selects the default.
/// Every new direction is projected against all stored basis vectors twice.
inline LanczosDecomposition lanczos_run(const SpectralMatrix& a, std::span<const double> b, std::size_t m_max,
                                        double breakdown_tol = -1.0) {
    const std::size_t n = a.size();
    if (b.size() != n) throw ArgumentError("lanczos_run: b has the wrong length");
    if (m_max < 1) throw ArgumentError("lanczos_run: m_max must be at least 1");
    if (m_max > n) throw ArgumentError("lanczos_run: m_max exceeds the dimension");
    const double nb = norm2(b);
    if (std::abs(nb - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "lanczos_run: b must have unit norm (got " << nb << ")";
        throw ArgumentError(os.str());
    }
    if (breakdown_tol < 0.0) breakdown_tol = default_breakdown_tol(a);

    LanczosDecomposition l;
    l.breakdown_tol = breakdown_tol;
    l.source_dim = n;
    Vector v(b.begin(), b.end());
    for (std::size_t j = 0;; ++j) {
        l.basis.push_col(v);
        Vector w = a.apply(v);
        double alpha = 0.0;
        for (int pass = 0; pass < 2; ++pass) {
            Vector h = l.basis.apply_transpose(w);
            alpha += h[j];
            Vector proj = l.basis.apply(h);
            for (std::size_t i = 0; i < n; ++i) w[i] -= proj[i];
        }
        const double beta = norm2(w);
        l.alphas.push_back(alpha);
        const std::size_t k = j + 1;
        if (beta <= breakdown_tol) {
            l.betas.push_back(beta);
            l.invariance_index = k;
            return l;
        }
        if (k == n) {
            // K_n is the whole space; the residual left is rounding noise
            l.betas.push_back(0.0);
            l.invariance_index = n;
            return l;
        }
        l.betas.push_back(beta);
        for (double& x : w) x /= beta;
        if (k == m_max) {
            l.next_vector = std::move(w);
            return l;
        }
        v = std::move(w);
    }
}

/// f(T) e_1 via the eigendecomposition of T.
inline Vector tridiag_function_e1(const SymTridiagonal& t, const StieltjesFunction& f) {
    const EigenPairs ep = tridiag_eigh(t);
    const std::size_t m = t.size();
    Vector coef(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double fv = f(ep.values[k]);
        if (!std::isfinite(fv)) {
            std::ostringstream os;
            os.precision(17);
            os << "tridiag_function_e1: " << f.name() << " is undefined at Ritz value " << ep.values[k];
            throw DomainError(os.str());
        }
        coef[k] = fv * ep.vectors(0, k);
    }
    Vector y(m, 0.0);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t i = 0; i < m; ++i) y[i] += ep.vectors(i, k) * coef[k];
    return y;
}

/// f_m = V_m f(T_m) e_1
inline Vector lanczos_approximation(const LanczosDecomposition& l, const StieltjesFunction& f, std::size_t m) {
    const Vector y = tridiag_function_e1(l.tridiagonal(m), f);
    return l.basis.leading_cols(m).apply(y);
}

struct OptimalApproximation {
    Vector vector;
    double error;
};

/// Orthogonal projection of `exact` onto span(V_m) and its distance.
inline OptimalApproximation optimal_approximation(const LanczosDecomposition& l, std::span<const double> exact,
                                                  std::size_t m) {
    if (exact.size() != l.source_dim) throw ArgumentError("optimal_approximation: dimension mismatch");
    if (m < 1 || m > l.steps()) throw ArgumentError("optimal_approximation: m exceeds stored steps");
    const Matrix vm = l.basis.leading_cols(m);
    const Vector c = vm.apply_transpose(exact);
    OptimalApproximation out{vm.apply(c), 0.0};
    out.error = norm2(subtract(exact, out.vector));
    return out;
}

/// f(T_M) e_1 = [x_m; z] and y_m = f(T_m) e_1; head = x_m - y_m, tail = z.
struct ErrorSplit {
    Vector head;
    Vector tail;
};

inline ErrorSplit error_split(const LanczosDecomposition& l, const StieltjesFunction& f, std::size_t m) {
    const std::size_t big_m = l.invariance();
    if (m < 1 || m >= big_m) throw ArgumentError("error_split: need 1 <= m < M");
    const Vector full = tridiag_function_e1(l.tridiagonal(big_m), f);
    const Vector y = tridiag_function_e1(l.tridiagonal(m), f);
    ErrorSplit s;
    s.head.resize(m);
    for (std::size_t i = 0; i < m; ++i) s.head[i] = full[i] - y[i];
    s.tail.assign(full.begin() + m, full.end());
    return s;
}

/// S = T_M[m.., m..]
inline SymTridiagonal trailing_block(const LanczosDecomposition& l, std::size_t m) {
    const std::size_t big_m = l.invariance();
    if (m < 1 || m >= big_m) throw ArgumentError("trailing_block: need 1 <= m < M");
    return l.tridiagonal(big_m).trailing(m);
}

inline KernelEvaluator kernel_evaluator(const LanczosDecomposition& l, std::size_t m) {
    return KernelEvaluator(l.tridiagonal(m), trailing_block(l, m), l.beta_next(m), l.breakdown_tol);
}

/// Orthogonality, the three-term relation A V = V T + beta v e_k^T, and T = V^T A V.
inline PropertyReport check_decomposition(const LanczosDecomposition& l, const SpectralMatrix& a, double tol = 1e-10) {
    PropertyReport rep;
    const std::size_t k = l.steps();
    double orth = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            orth = std::max(orth, std::abs(dot(l.basis.col(i), l.basis.col(j)) - (i == j ? 1.0 : 0.0)));
    {
        std::ostringstream os;
        os << "basis orthogonality defect " << orth << " exceeds " << tol;
        rep.expect(orth <= tol, os.str());
    }
    const SymTridiagonal t = l.tridiagonal(k);
    double rel2 = 0.0;
    double proj_dev = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        Vector r = a.apply(l.basis.col(j));
        const Vector h = l.basis.apply_transpose(r);
        for (std::size_t i = 0; i < k; ++i) {
            double tij = 0.0;
            if (i == j) tij = t.diag[j];
            else if (i + 1 == j) tij = t.offdiag[i];
            else if (j + 1 == i) tij = t.offdiag[j];
            proj_dev = std::max(proj_dev, std::abs(h[i] - tij));
        }
        // r <- A v_j - V T e_j
        if (j > 0) axpy(-t.offdiag[j - 1], l.basis.col(j - 1), r);
        axpy(-t.diag[j], l.basis.col(j), r);
        if (j + 1 < k) axpy(-t.offdiag[j], l.basis.col(j + 1), r);
        if (j + 1 == k && l.next_vector) axpy(-l.betas[k - 1], *l.next_vector, r);
        const double nr = norm2(r);
        rel2 += nr * nr;
    }
    const double rel = std::sqrt(rel2);
    const double scale = a.lambda_max();
    {
        std::ostringstream os;
        os << "Lanczos relation residual " << rel << " exceeds " << tol << " * |A|";
        // at breakdown the dropped residual is bounded by the breakdown tolerance
        const double allowed = tol * scale + (l.next_vector ? 0.0 : l.betas.back());
        rep.expect(rel <= allowed, os.str());
    }
    {
        std::ostringstream os;
        os << "V^T A V deviates from T by " << proj_dev;
        rep.expect(proj_dev <= tol * scale, os.str());
    }
    return rep;
}

}  // namespace lanczos_opt
