#pragma once

// Dense and tridiagonal kernels used throughout the library. Everything is
// real double precision; vectors are plain std::vector<double>.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lanczos_opt/errors.hpp"

namespace lanczos_opt {

using Vector = std::vector<double>;

inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(std::span<const double> x) {
    // scaled accumulation, matches hypot behaviour for tiny/huge entries
    double scale = 0.0;
    double ssq = 1.0;
    for (double v : x) {
        if (v == 0.0) continue;
        const double a = std::abs(v);
        if (scale < a) {
            ssq = 1.0 + ssq * (scale / a) * (scale / a);
            scale = a;
        } else {
            ssq += (a / scale) * (a / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline Vector subtract(std::span<const double> x, std::span<const double> y) {
    Vector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}

/// Column-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

    /// Appends a column; the matrix must be empty or have matching row count.
    void push_col(std::span<const double> c) {
        if (cols_ == 0 && rows_ == 0) rows_ = c.size();
        if (c.size() != rows_) throw ArgumentError("Matrix::push_col: row count mismatch");
        data_.insert(data_.end(), c.begin(), c.end());
        ++cols_;
    }

    /// y = M x
    Vector apply(std::span<const double> x) const {
        Vector y(rows_, 0.0);
        for (std::size_t j = 0; j < cols_; ++j) axpy(x[j], col(j), y);
        return y;
    }

    /// y = M^T x
    Vector apply_transpose(std::span<const double> x) const {
        Vector y(cols_);
        for (std::size_t j = 0; j < cols_; ++j) y[j] = dot(col(j), x);
        return y;
    }

    /// Leading k columns as a new matrix.
    Matrix leading_cols(std::size_t k) const {
        Matrix m(rows_, k);
        std::copy_n(data_.begin(), rows_ * k, m.data_.begin());
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Symmetric tridiagonal matrix: diag (alpha_1..alpha_m), offdiag (beta_2..beta_m).
struct SymTridiagonal {
    Vector diag;
    Vector offdiag;

    SymTridiagonal() = default;
    SymTridiagonal(Vector d, Vector e) : diag(std::move(d)), offdiag(std::move(e)) {
        if (!diag.empty() && offdiag.size() + 1 != diag.size())
            throw ArgumentError("SymTridiagonal: offdiag must have length diag.size() - 1");
        if (diag.empty() && !offdiag.empty())
            throw ArgumentError("SymTridiagonal: empty diagonal with nonempty offdiagonal");
    }

    std::size_t size() const noexcept { return diag.size(); }

    /// Leading k x k block.
    SymTridiagonal leading(std::size_t k) const {
        if (k > size()) throw ArgumentError("SymTridiagonal::leading: k exceeds size");
        if (k == 0) return {};
        return {Vector(diag.begin(), diag.begin() + static_cast<std::ptrdiff_t>(k)),
                Vector(offdiag.begin(), offdiag.begin() + static_cast<std::ptrdiff_t>(k - 1))};
    }

    /// Trailing block starting at zero-based row `first`.
    SymTridiagonal trailing(std::size_t first) const {
        if (first >= size()) throw ArgumentError("SymTridiagonal::trailing: empty block");
        return {Vector(diag.begin() + static_cast<std::ptrdiff_t>(first), diag.end()),
                Vector(offdiag.begin() + static_cast<std::ptrdiff_t>(first), offdiag.end())};
    }

    Vector apply(std::span<const double> x) const {
        const std::size_t m = size();
        Vector y(m);
        for (std::size_t i = 0; i < m; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += offdiag[i - 1] * x[i - 1];
            if (i + 1 < m) s += offdiag[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double d : diag) s += d * d;
        for (double e : offdiag) s += 2.0 * e * e;
        return std::sqrt(s);
    }

    Matrix dense() const {
        const std::size_t m = size();
        Matrix a(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            a(i, i) = diag[i];
            if (i + 1 < m) a(i, i + 1) = a(i + 1, i) = offdiag[i];
        }
        return a;
    }
};

/// Eigenvalues ascending; column j of `vectors` belongs to values[j].
struct EigenPairs {
    Vector values;
    Matrix vectors;
};

/// Full eigendecomposition of a symmetric tridiagonal matrix by implicit QL
/// with Wilkinson shifts.
inline EigenPairs tridiag_eigh(const SymTridiagonal& t, int max_sweeps_per_value = 60) {
    const std::size_t n = t.size();
    if (n == 0) throw ArgumentError("tridiag_eigh: empty matrix");
    Vector d = t.diag;
    Vector e(n, 0.0);
    std::copy(t.offdiag.begin(), t.offdiag.end(), e.begin());
    Matrix z = Matrix::identity(n);
    constexpr double eps = std::numeric_limits<double>::epsilon();

    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == max_sweeps_per_value) {
                    std::ostringstream os;
                    os << "tridiag_eigh: no convergence for eigenvalue index " << l;
                    throw ConvergenceError(os.str());
                }
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                bool deflated = false;
                for (std::size_t ii = m; ii-- > l;) {
                    const double f = s * e[ii];
                    const double b = c * e[ii];
                    r = std::hypot(f, g);
                    e[ii + 1] = r;
                    if (r == 0.0) {
                        d[ii + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[ii + 1] - p;
                    r = (d[ii] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[ii + 1] = g + p;
                    g = c * r - b;
                    auto zi = z.col(ii);
                    auto zi1 = z.col(ii + 1);
                    for (std::size_t k = 0; k < n; ++k) {
                        const double fk = zi1[k];
                        zi1[k] = s * zi[k] + c * fk;
                        zi[k] = c * zi[k] - s * fk;
                    }
                }
                if (deflated) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    EigenPairs out{Vector(n), Matrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = d[order[j]];
        auto src = z.col(order[j]);
        std::copy(src.begin(), src.end(), out.vectors.col(j).begin());
    }
    return out;
}

/// Solves (T + shift I) x = rhs by symmetric Gaussian elimination without
/// pivoting. Throws SingularityError on a non-positive pivot, which happens
/// exactly when T + shift I is not positive definite.
inline Vector tridiag_shifted_solve(const SymTridiagonal& t, double shift, std::span<const double> rhs) {
    const std::size_t m = t.size();
    if (m == 0) throw ArgumentError("tridiag_shifted_solve: empty matrix");
    if (rhs.size() != m) throw ArgumentError("tridiag_shifted_solve: rhs length mismatch");
    Vector piv(m);
    Vector y(rhs.begin(), rhs.end());
    piv[0] = t.diag[0] + shift;
    if (!(piv[0] > 0.0)) throw SingularityError("tridiag_shifted_solve: non-positive pivot at index 0");
    for (std::size_t i = 1; i < m; ++i) {
        const double l = t.offdiag[i - 1] / piv[i - 1];
        piv[i] = t.diag[i] + shift - l * t.offdiag[i - 1];
        if (!(piv[i] > 0.0)) {
            std::ostringstream os;
            os << "tridiag_shifted_solve: non-positive pivot at index " << i;
            throw SingularityError(os.str());
        }
        y[i] -= l * y[i - 1];
    }
    Vector x(m);
    x[m - 1] = y[m - 1] / piv[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) x[i] = (y[i] - t.offdiag[i] * x[i + 1]) / piv[i];
    return x;
}

/// Hermitian positive definite operator held in eigen-form A = Q diag(lambda) Q^T.
/// Without eigenvectors, Q = I (A is diagonal).
class SpectralMatrix {
public:
    explicit SpectralMatrix(Vector eigenvalues, std::optional<Matrix> eigenvectors = std::nullopt)
        : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {
        if (eigenvalues_.empty()) throw ArgumentError("SpectralMatrix: empty spectrum");
        for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
            if (!(eigenvalues_[i] > 0.0) || !std::isfinite(eigenvalues_[i])) {
                std::ostringstream os;
                os << "SpectralMatrix: eigenvalue " << i << " = " << eigenvalues_[i]
                   << " is not strictly positive";
                throw DomainError(os.str());
            }
            if (i > 0 && eigenvalues_[i] < eigenvalues_[i - 1])
                throw ArgumentError("SpectralMatrix: eigenvalues must be sorted ascending");
        }
        if (eigenvectors_) {
            const Matrix& q = *eigenvectors_;
            const std::size_t n = eigenvalues_.size();
            if (q.rows() != n || q.cols() != n) throw ArgumentError("SpectralMatrix: eigenvector shape mismatch");
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j <= i; ++j) {
                    const double g = dot(q.col(i), q.col(j));
                    if (std::abs(g - (i == j ? 1.0 : 0.0)) > 1e-12)
                        throw ArgumentError("SpectralMatrix: eigenvectors are not orthonormal");
                }
        }
    }

    std::size_t size() const noexcept { return eigenvalues_.size(); }
    const Vector& eigenvalues() const noexcept { return eigenvalues_; }
    const std::optional<Matrix>& eigenvectors() const noexcept { return eigenvectors_; }
    bool is_diagonal() const noexcept { return !eigenvectors_.has_value(); }

    double lambda_min() const noexcept { return eigenvalues_.front(); }
    double lambda_max() const noexcept { return eigenvalues_.back(); }
    double condition_number() const noexcept { return lambda_max() / lambda_min(); }

    /// Coefficients of x in the eigenvector basis (Q^T x).
    Vector to_eigenbasis(std::span<const double> x) const {
        if (x.size() != size()) throw ArgumentError("SpectralMatrix: vector length mismatch");
        if (!eigenvectors_) return Vector(x.begin(), x.end());
        return eigenvectors_->apply_transpose(x);
    }

    /// Q c
    Vector from_eigenbasis(std::span<const double> c) const {
        if (!eigenvectors_) return Vector(c.begin(), c.end());
        return eigenvectors_->apply(c);
    }

    Vector apply(std::span<const double> x) const {
        Vector c = to_eigenbasis(x);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= eigenvalues_[i];
        return from_eigenbasis(c);
    }

    /// A - c I, which must remain positive definite.
    SpectralMatrix shifted(double c) const {
        Vector ev = eigenvalues_;
        for (double& v : ev) v -= c;
        return SpectralMatrix(std::move(ev), eigenvectors_);
    }

private:
    Vector eigenvalues_;
    std::optional<Matrix> eigenvectors_;
};

/// Exact reference f(A) b = Q f(Lambda) Q^T b.
template <class F>
Vector spectral_apply(const SpectralMatrix& a, F&& f, std::span<const double> b) {
    Vector c = a.to_eigenbasis(b);
    const Vector& lam = a.eigenvalues();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double fx = f(lam[i]);
        if (!std::isfinite(fx)) {
            std::ostringstream os;
            os << "spectral_apply: f is not finite at eigenvalue lambda_" << (i + 1) << " = " << lam[i];
            throw DomainError(os.str());
        }
        c[i] *= fx;
    }
    return a.from_eigenbasis(c);
}

}  // namespace lanczos_opt
