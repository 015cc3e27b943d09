#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "lanczos_opt/linalg.hpp"
#include "lanczos_opt/rng.hpp"

using namespace lanczos_opt;

namespace {

SymTridiagonal random_tridiagonal(std::size_t m, std::uint64_t seed) {
    NormalStream rng(seed);
    Vector d(m);
    Vector e(m - 1);
    for (auto& x : d) x = 1.0 + 99.0 * rng.uniform();
    for (auto& x : e) x = 0.1 + 5.0 * rng.uniform();
    return {d, e};
}

Eigen::MatrixXd to_eigen(const SymTridiagonal& t) {
    const std::size_t m = t.diag.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m; ++i) a(i, i) = t.diag[i];
    for (std::size_t i = 0; i + 1 < m; ++i) a(i, i + 1) = a(i + 1, i) = t.offdiag[i];
    return a;
}

}  // namespace

TEST(TridiagEigh, OneByOne) {
    const EigenPairs e = tridiag_eigh(SymTridiagonal({2.0}, {}));
    ASSERT_EQ(e.values.size(), 1u);
    EXPECT_DOUBLE_EQ(e.values[0], 2.0);
    EXPECT_DOUBLE_EQ(std::abs(e.vectors(0, 0)), 1.0);
}

TEST(TridiagEigh, TwoByTwoZeroDiagonal) {
    const EigenPairs e = tridiag_eigh(SymTridiagonal({0.0, 0.0}, {1.0}));
    EXPECT_NEAR(e.values[0], -1.0, 1e-15);
    EXPECT_NEAR(e.values[1], 1.0, 1e-15);
}

TEST(TridiagEigh, ThreeByThreeToeplitz) {
    const EigenPairs e = tridiag_eigh(SymTridiagonal({2.0, 2.0, 2.0}, {1.0, 1.0}));
    EXPECT_NEAR(e.values[0], 2.0 - std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(e.values[1], 2.0, 1e-14);
    EXPECT_NEAR(e.values[2], 2.0 + std::sqrt(2.0), 1e-14);
}

TEST(TridiagEigh, MatchesEigenOracle) {
    for (std::size_t m : {3, 17, 60}) {
        const SymTridiagonal t = random_tridiagonal(m, 100 + m);
        const EigenPairs e = tridiag_eigh(t);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(to_eigen(t));
        for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(e.values[i], oracle.eigenvalues()(i), 1e-12 * 100.0) << "m=" << m;
        for (std::size_t i = 1; i < m; ++i) EXPECT_LT(e.values[i - 1], e.values[i]);
    }
}

TEST(TridiagEigh, ReconstructionAndOrthogonality) {
    const SymTridiagonal t = random_tridiagonal(40, 7);
    const EigenPairs e = tridiag_eigh(t);
    Eigen::MatrixXd q(40, 40);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 40; ++j) q(i, j) = e.vectors(i, j);
    Eigen::VectorXd theta(40);
    for (std::size_t i = 0; i < 40; ++i) theta(i) = e.values[i];
    const Eigen::MatrixXd a = to_eigen(t);
    EXPECT_LE((a - q * theta.asDiagonal() * q.transpose()).norm(), 1e-12 * a.norm());
    EXPECT_LE((q.transpose() * q - Eigen::MatrixXd::Identity(40, 40)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TridiagShiftedSolve, HandValues) {
    const SymTridiagonal one({2.0}, {});
    const Vector rhs{1.0};
    EXPECT_DOUBLE_EQ(tridiag_shifted_solve(one, 0.0, rhs)[0], 0.5);
    EXPECT_DOUBLE_EQ(tridiag_shifted_solve(one, 2.0, rhs)[0], 0.25);
    const Vector x = tridiag_shifted_solve(SymTridiagonal({2.0, 2.0}, {1.0}), 0.0, Vector{1.0, 0.0});
    EXPECT_NEAR(x[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(x[1], -1.0 / 3.0, 1e-15);
}

TEST(TridiagShiftedSolve, MatchesEigenOracle) {
    const SymTridiagonal t = random_tridiagonal(25, 3);
    NormalStream rng(4);
    const Vector rhs = rng.vector(25);
    const Eigen::Map<const Eigen::VectorXd> r(rhs.data(), 25);
    for (double s : {0.0, 0.5, 30.0}) {
        const Vector x = tridiag_shifted_solve(t, s, rhs);
        const Eigen::VectorXd ref = (to_eigen(t) + s * Eigen::MatrixXd::Identity(25, 25)).ldlt().solve(r);
        for (std::size_t i = 0; i < 25; ++i) EXPECT_NEAR(x[i], ref(i), 1e-12 * ref.norm());
    }
}

TEST(TridiagShiftedSolve, IndefiniteIsSingular) {
    EXPECT_THROW(tridiag_shifted_solve(SymTridiagonal({0.0, 0.0}, {1.0}), 0.0, Vector{1.0, 0.0}), SingularityError);
}

TEST(SpectralApply, HandValues) {
    const Vector y = spectral_apply(SpectralMatrix({1.0, 4.0, 9.0}), [](double z) { return std::sqrt(z); },
                                    Vector{1.0, 1.0, 1.0});
    EXPECT_DOUBLE_EQ(y[0], 1.0);
    EXPECT_DOUBLE_EQ(y[1], 2.0);
    EXPECT_DOUBLE_EQ(y[2], 3.0);
    const Vector z = spectral_apply(SpectralMatrix({1.0, 4.0}), [](double x) { return 1.0 / std::sqrt(x); }, Vector{0.6, 0.8});
    EXPECT_DOUBLE_EQ(z[0], 0.6);
    EXPECT_DOUBLE_EQ(z[1], 0.4);
}

TEST(SpectralApply, IdentityGivesMatrixVectorProduct) {
    Vector ev(100);
    for (std::size_t i = 0; i < 100; ++i) ev[i] = static_cast<double>(i + 1);
    const SpectralMatrix a(ev);
    NormalStream rng(1);
    const Vector b = rng.vector(100);
    const Vector y = spectral_apply(a, [](double x) { return x; }, b);
    const Vector ab = a.apply(b);
    for (std::size_t i = 0; i < 100; ++i) EXPECT_DOUBLE_EQ(y[i], ab[i]);
}

TEST(SpectralApply, NonFiniteValueNamesEigenvalue) {
    try {
        spectral_apply(SpectralMatrix({1.0, 2.0}), [](double x) { return x > 1.5 ? std::nan("") : x; }, Vector{1.0, 1.0});
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
    }
}

TEST(SpectralMatrix, WithEigenvectorsMatchesDense) {
    // Rotation by a Householder reflector of diag(1, 3, 7).
    Eigen::VectorXd v(3);
    v << 1.0, -2.0, 0.5;
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(3, 3) - 2.0 * v * v.transpose() / v.squaredNorm();
    Matrix q(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) q(i, j) = h(i, j);
    const SpectralMatrix a({1.0, 3.0, 7.0}, q);
    Eigen::VectorXd d(3);
    d << 1.0, 3.0, 7.0;
    const Eigen::MatrixXd dense = h * d.asDiagonal() * h.transpose();
    const Vector x{0.3, -1.0, 2.0};
    const Vector y = a.apply(x);
    const Eigen::VectorXd ref = dense * Eigen::Map<const Eigen::VectorXd>(x.data(), 3);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(y[i], ref(i), 1e-14);
    const Vector s = spectral_apply(a, [](double z) { return 1.0 / z; }, x);
    const Eigen::VectorXd sref = dense.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(x.data(), 3));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s[i], sref(i), 1e-14);
}

TEST(SpectralMatrix, RejectsNonPositiveOrUnsorted) {
    EXPECT_THROW(SpectralMatrix({0.0, 1.0}), Error);
    EXPECT_THROW(SpectralMatrix({2.0, 1.0}), Error);
}

TEST(SpectralMatrix, ConditionNumber) {
    EXPECT_DOUBLE_EQ(SpectralMatrix({1.0, 5.0, 100.0}).condition_number(), 100.0);
}
