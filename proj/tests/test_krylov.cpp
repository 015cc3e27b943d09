#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "lanczos_opt/experiment.hpp"
#include "lanczos_opt/krylov.hpp"
#include "lanczos_opt/rng.hpp"

using namespace lanczos_opt;

namespace {

Vector unit_gaussian(std::size_t n, std::uint64_t seed) {
    NormalStream rng(seed);
    Vector b = rng.vector(n);
    const double nb = norm2(b);
    for (auto& x : b) x /= nb;
    return b;
}

SpectralMatrix a1() {
    Vector ev(100);
    for (std::size_t i = 0; i < 100; ++i) ev[i] = static_cast<double>(i + 1);
    return SpectralMatrix(ev);
}

/// f(T) e_1 from a dense Eigen eigendecomposition.
Eigen::VectorXd dense_f_e1(const SymTridiagonal& t, double (*f)(double)) {
    const std::size_t m = t.diag.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m; ++i) a(i, i) = t.diag[i];
    for (std::size_t i = 0; i + 1 < m; ++i) a(i, i + 1) = a(i + 1, i) = t.offdiag[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    Eigen::VectorXd fv = es.eigenvalues().unaryExpr(f);
    return es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().row(0).transpose();
}

double inv_sqrt(double z) { return 1.0 / std::sqrt(z); }

}  // namespace

TEST(LanczosRun, OneByOne) {
    const LanczosDecomposition l = lanczos_run(SpectralMatrix({5.0}), Vector{1.0}, 1);
    EXPECT_DOUBLE_EQ(l.alphas[0], 5.0);
    ASSERT_TRUE(l.invariance_index.has_value());
    EXPECT_EQ(*l.invariance_index, 1u);
}

TEST(LanczosRun, ScaledIdentityBreaksDownImmediately) {
    const SpectralMatrix a(Vector(30, 3.0));
    const LanczosDecomposition l = lanczos_run(a, unit_gaussian(30, 9), 30);
    EXPECT_NEAR(l.alphas[0], 3.0, 1e-14);
    EXPECT_EQ(l.invariance(), 1u);
    EXPECT_LE(l.betas[0], l.breakdown_tol);
}

TEST(LanczosRun, TwoStepHandRun) {
    const double s = 1.0 / std::sqrt(2.0);
    const LanczosDecomposition l = lanczos_run(SpectralMatrix({1.0, 2.0}), Vector{s, s}, 2);
    EXPECT_NEAR(l.alphas[0], 1.5, 1e-15);
    EXPECT_NEAR(l.betas[0], 0.5, 1e-15);
    EXPECT_NEAR(l.alphas[1], 1.5, 1e-15);
    EXPECT_EQ(l.invariance(), 2u);
    const SymTridiagonal tail = trailing_block(l, 1);
    ASSERT_EQ(tail.diag.size(), 1u);
    EXPECT_NEAR(tail.diag[0], 1.5, 1e-15);
}

TEST(LanczosRun, RejectsBadInput) {
    const SpectralMatrix a = a1();
    EXPECT_THROW(lanczos_run(a, Vector(100, 1.0), 5), ArgumentError);
    EXPECT_THROW(lanczos_run(a, unit_gaussian(100, 1), 0), ArgumentError);
    EXPECT_THROW(lanczos_run(a, unit_gaussian(50, 1), 5), ArgumentError);
}

TEST(LanczosRun, DecompositionInvariants) {
    const SpectralMatrix a = a1();
    const LanczosDecomposition l = lanczos_run(a, unit_gaussian(100, 42), 100);
    const PropertyReport rep = check_decomposition(l, a);
    EXPECT_TRUE(rep.passed) << (rep.failures.empty() ? "" : rep.failures.front());
    EXPECT_DOUBLE_EQ(l.breakdown_tol, 1e-10);
}

TEST(LanczosRun, DecompositionWithEigenvectors) {
    // Same spectrum as a diagonal matrix, rotated by a random orthogonal Q.
    NormalStream rng(5);
    Eigen::MatrixXd g(40, 40);
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 40; ++j) g(i, j) = rng.next();
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Matrix qm(40, 40);
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 40; ++j) qm(i, j) = q(i, j);
    Vector ev(40);
    for (std::size_t i = 0; i < 40; ++i) ev[i] = 1.0 + static_cast<double>(i);
    const SpectralMatrix a(ev, qm);
    const SpectralMatrix d(ev);
    const Vector b = unit_gaussian(40, 6);
    const LanczosDecomposition l = lanczos_run(a, b, 40);
    const LanczosDecomposition ld = lanczos_run(d, a.to_eigenbasis(b), 40);
    EXPECT_TRUE(check_decomposition(l, a).passed);
    for (std::size_t j = 0; j < 20; ++j) EXPECT_NEAR(l.alphas[j], ld.alphas[j], 1e-10);
}

TEST(LanczosApproximation, FullStepsGiveExact) {
    const SpectralMatrix a = a1();
    const Vector b = unit_gaussian(100, 42);
    const LanczosDecomposition l = lanczos_run(a, b, 100);
    const StieltjesFunction f = make_inv_sqrt();
    const Vector fm = lanczos_approximation(l, f, l.invariance());
    const Vector exact = spectral_apply(a, f, b);
    EXPECT_LE(norm2(subtract(fm, exact)), 1e-10);
}

TEST(LanczosApproximation, OneByOneSqrt) {
    const LanczosDecomposition l = lanczos_run(SpectralMatrix({4.0}), Vector{1.0}, 1);
    EXPECT_NEAR(lanczos_approximation(l, make_sqrt(), 1)[0], 2.0, 1e-15);
}

TEST(LanczosApproximation, MatchesDenseEigenOracle) {
    const SpectralMatrix a = a1();
    const LanczosDecomposition l = lanczos_run(a, unit_gaussian(100, 42), 10);
    const Vector fm = lanczos_approximation(l, make_inv_sqrt(), 10);
    const Eigen::VectorXd y = dense_f_e1(l.tridiagonal(10), inv_sqrt);
    for (std::size_t i = 0; i < 100; ++i) {
        double ref = 0.0;
        for (std::size_t j = 0; j < 10; ++j) ref += l.basis(i, j) * y(j);
        EXPECT_NEAR(fm[i], ref, 1e-12);
    }
}

TEST(OptimalApproximation, MatchesKrylovQrOracle) {
    // Oracle: orthonormalised power basis [b, Ab, ..., A^{m-1} b] by Householder QR.
    Vector ev(30);
    for (std::size_t i = 0; i < 30; ++i) ev[i] = 1.0 + 0.1 * static_cast<double>(i);
    const SpectralMatrix a(ev);
    const Vector b = unit_gaussian(30, 13);
    const LanczosDecomposition l = lanczos_run(a, b, 30);
    const Vector exact = spectral_apply(a, make_inv_sqrt(), b);
    for (std::size_t m : {1, 3, 6}) {
        Eigen::MatrixXd k(30, m);
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(b.data(), 30);
        for (std::size_t j = 0; j < m; ++j) {
            k.col(j) = v;
            for (int i = 0; i < 30; ++i) v(i) *= ev[i];
        }
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(k).householderQ() * Eigen::MatrixXd::Identity(30, m);
        const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(exact.data(), 30);
        const double ref = (e - q * (q.transpose() * e)).norm();
        EXPECT_NEAR(optimal_approximation(l, exact, m).error, ref, 1e-10 * e.norm()) << "m=" << m;
    }
}

TEST(OptimalApproximation, RankOneAndFull) {
    const SpectralMatrix a = a1();
    const Vector b = unit_gaussian(100, 42);
    const LanczosDecomposition l = lanczos_run(a, b, 100);
    const Vector exact = spectral_apply(a, make_inv_sqrt(), b);
    const OptimalApproximation p1 = optimal_approximation(l, exact, 1);
    const double c = dot(exact, b);
    for (std::size_t i = 0; i < 100; ++i) EXPECT_NEAR(p1.vector[i], c * b[i], 1e-14);
    EXPECT_LE(optimal_approximation(l, exact, l.invariance()).error, 1e-10);
}

TEST(ErrorSplit, PythagoreanAndProjection) {
    const SpectralMatrix a = a1();
    const Vector b = unit_gaussian(100, 42);
    const LanczosDecomposition l = lanczos_run(a, b, 100);
    const StieltjesFunction f = make_inv_sqrt();
    const Vector exact = spectral_apply(a, f, b);
    for (std::size_t m : {2, 5, 10, 15}) {
        const ErrorSplit s = error_split(l, f, m);
        EXPECT_EQ(s.head.size(), m);
        EXPECT_EQ(s.tail.size(), 100 - m);
        const double err = norm2(subtract(exact, lanczos_approximation(l, f, m)));
        const double h = norm2(s.head);
        const double t = norm2(s.tail);
        EXPECT_NEAR(std::sqrt(h * h + t * t), err, 1e-10 * err) << "m=" << m;
        EXPECT_NEAR(t, optimal_approximation(l, exact, m).error, 1e-10 * t) << "m=" << m;
    }
}

TEST(ErrorSplit, TailLengthAndErrors) {
    const SpectralMatrix a = a1();
    const LanczosDecomposition l = lanczos_run(a, unit_gaussian(100, 42), 100);
    const StieltjesFunction f = make_inverse();
    EXPECT_EQ(error_split(l, f, 99).tail.size(), 1u);
    EXPECT_THROW(error_split(l, f, 100), ArgumentError);
    EXPECT_THROW(trailing_block(l, 100), ArgumentError);
    const SymTridiagonal last = trailing_block(l, 99);
    ASSERT_EQ(last.diag.size(), 1u);
    EXPECT_DOUBLE_EQ(last.diag[0], l.alphas[99]);
}

TEST(LanczosRun, FiniteTerminationRandomDiagonal) {
    NormalStream rng(77);
    for (std::size_t n : {5, 20, 64}) {
        Vector ev(n);
        for (auto& x : ev) x = 1.0 + 99.0 * rng.uniform();
        std::sort(ev.begin(), ev.end());
        const SpectralMatrix a(ev);
        const Vector b = unit_gaussian(n, 100 + n);
        const LanczosDecomposition l = lanczos_run(a, b, n);
        EXPECT_EQ(l.invariance(), n);
        EXPECT_LE(norm2(subtract(lanczos_approximation(l, make_sqrt(), n), spectral_apply(a, make_sqrt(), b))), 1e-9);
    }
}

TEST(LanczosRun, LuckyBreakdownOnEigenvectorCombination) {
    const SpectralMatrix a = a1();
    Vector b(100, 0.0);
    b[3] = 0.6;
    b[40] = 0.8;
    const LanczosDecomposition l = lanczos_run(a, b, 100);
    EXPECT_EQ(l.invariance(), 2u);
    EXPECT_LE(l.betas.back(), l.breakdown_tol);
    EXPECT_FALSE(l.next_vector.has_value());
}

TEST(TrailingBlock, KernelEvaluatorRejectsBreakdown) {
    const SpectralMatrix a = a1();
    Vector b(100, 0.0);
    b[3] = 0.6;
    b[40] = 0.8;
    const LanczosDecomposition l = lanczos_run(a, b, 100);
    EXPECT_THROW(kernel_evaluator(l, 2), Error);
}
