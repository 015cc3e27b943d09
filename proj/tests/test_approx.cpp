#include <gtest/gtest.h>

#include <cmath>

#include "lanczos_opt/approx.hpp"

using namespace lanczos_opt;

namespace {

double inv_sqrt(double z) { return 1.0 / std::sqrt(z); }
double inverse(double z) { return 1.0 / z; }

Vector a1_spectrum() {
    Vector ev(100);
    for (std::size_t i = 0; i < 100; ++i) ev[i] = static_cast<double>(i + 1);
    return ev;
}

}  // namespace

TEST(ChebyshevSeries, ClenshawMatchesDirectSum) {
    const ChebyshevSeries p{{0.5, -1.0, 0.25, 2.0}, 1.0, 3.0};
    for (double x : {1.0, 1.7, 3.0}) {
        const double s = (2.0 * x - 4.0) / 2.0;
        const double direct = 0.5 - s + 0.25 * (2 * s * s - 1) + 2.0 * (4 * s * s * s - 3 * s);
        EXPECT_NEAR(p(x), direct, 1e-14);
    }
}

TEST(RemezDiscrete, TwoPointConstant) {
    const MinimaxResult r = remez_discrete(inv_sqrt, Vector{1.0, 100.0}, 0);
    EXPECT_NEAR(r.minimax_error, 0.45, 1e-14);
    EXPECT_NEAR(r(1.0), 0.55, 1e-14);
    EXPECT_NEAR(r(50.0), 0.55, 1e-14);
}

TEST(RemezDiscrete, InterpolationWhenFewPoints) {
    const MinimaxResult r = remez_discrete(inv_sqrt, Vector{1.0, 2.0, 5.0, 9.0}, 3);
    EXPECT_LE(r.minimax_error, 1e-13);
    EXPECT_TRUE(r.floor);
    EXPECT_NEAR(r(5.0), inv_sqrt(5.0), 1e-13);
}

TEST(RemezDiscrete, MatchesLinearProgramOracle) {
    // Minimax values from a dense linear program (scipy HiGHS) on 200 Chebyshev-Lobatto points of [1, 100].
    const Vector pts = chebyshev_lobatto(1.0, 100.0, 200);
    EXPECT_NEAR(remez_discrete(inverse, pts, 5).minimax_error, 0.1813093245039252, 1e-6 * 0.1813093245039252);
    EXPECT_NEAR(remez_discrete(inv_sqrt, pts, 5).minimax_error, 0.10109090081107529, 1e-6 * 0.10109090081107529);
}

TEST(RemezDiscrete, EquioscillationAndLevelling) {
    const Vector spec = a1_spectrum();
    for (std::size_t d : {0, 2, 7, 15, 25}) {
        const MinimaxResult r = remez_discrete(inv_sqrt, spec, d);
        ASSERT_EQ(r.reference_set.size(), d + 2);
        EXPECT_GE(r.alternations(), d + 1);
        double lo = 1e300;
        double hi = 0.0;
        for (double v : r.reference_residuals) {
            lo = std::min(lo, std::abs(v));
            hi = std::max(hi, std::abs(v));
        }
        EXPECT_LE(hi, lo * (1.0 + 1e-8)) << "d=" << d;
        double full = 0.0;
        for (double x : spec) full = std::max(full, std::abs(inv_sqrt(x) - r(x)));
        EXPECT_NEAR(r.minimax_error, full, 1e-10 * full);
        for (const auto& [level, rmax] : r.history) {
            EXPECT_LE(level, r.minimax_error * (1 + 1e-10));
            EXPECT_GE(rmax, r.minimax_error * (1 - 1e-10));
        }
    }
}

TEST(RemezDiscrete, DegreeMonotone) {
    const Vector spec = a1_spectrum();
    double prev = 1e300;
    for (std::size_t d = 0; d < 30; ++d) {
        const double e = remez_discrete(inv_sqrt, spec, d).minimax_error;
        EXPECT_LE(e, prev + 1e-12);
        prev = e;
    }
}

TEST(RemezDiscrete, Errors) {
    EXPECT_THROW(remez_discrete(inv_sqrt, Vector{}, 1), ArgumentError);
    EXPECT_THROW(remez_discrete(inv_sqrt, Vector{2.0, 1.0}, 0), ArgumentError);
    EXPECT_THROW(remez_discrete(inv_sqrt, Vector{0.0, 1.0, 2.0}, 0), DomainError);
}

TEST(RemezInterval, LinearIsExact) {
    for (std::size_t d : {1, 3, 6})
        EXPECT_LE(remez_interval([](double x) { return 3.0 * x - 2.0; }, 1.0, 100.0, d).minimax_error, 1e-12);
}

TEST(RemezInterval, ConstantOnShortInterval) {
    EXPECT_NEAR(remez_interval(inverse, 1.0, 2.0, 0).minimax_error, 0.25, 1e-4);
}

TEST(RemezInterval, DegreeImproves) {
    const double e5 = remez_interval(inv_sqrt, 1.0, 100.0, 5).minimax_error;
    const double e10 = remez_interval(inv_sqrt, 1.0, 100.0, 10).minimax_error;
    EXPECT_LT(e10, e5);
}

TEST(RemezInterval, GridCoarsenessRejected) {
    EXPECT_THROW(remez_interval(inv_sqrt, 1.0, 100.0, 20, 100), ArgumentError);
    EXPECT_THROW(remez_interval(inv_sqrt, 0.0, 100.0, 2), ArgumentError);
}

TEST(ChebyshevLobatto, EndpointsAndOrder) {
    const Vector x = chebyshev_lobatto(1.0, 100.0, 7);
    EXPECT_DOUBLE_EQ(x.front(), 1.0);
    EXPECT_DOUBLE_EQ(x.back(), 100.0);
    EXPECT_NEAR(x[3], 50.5, 1e-12);
    for (std::size_t i = 1; i < x.size(); ++i) EXPECT_GT(x[i], x[i - 1]);
}

TEST(RationalFromQuadrature, InverseIsReturnedExactly) {
    const RationalApproximation r = rational_from_quadrature(make_inverse(), 1, 1.0, 100.0);
    ASSERT_EQ(r.nodes, 1u);
    EXPECT_DOUBLE_EQ(r.function.discrete()->poles[0], 0.0);
    EXPECT_DOUBLE_EQ(r.function.discrete()->weights[0], 1.0);
    EXPECT_EQ(r.max_rel_error, 0.0);
}

TEST(RationalFromQuadrature, InverseSqrtTenNodes) {
    const RationalApproximation r = rational_from_quadrature(make_inv_sqrt(), 10, 1.0, 100.0);
    EXPECT_LT(r.max_rel_error, 1e-4);
    for (std::size_t i = 0; i < r.nodes; ++i) {
        EXPECT_GE(r.function.discrete()->poles[i], 0.0);  // poles of r at -t_i <= 0
        EXPECT_GT(r.function.discrete()->weights[i], 0.0);
    }
    for (double z : {1.0, 7.0, 100.0})
        EXPECT_NEAR(r.function(z), inv_sqrt(z), 1e-4 * inv_sqrt(z));
}

TEST(RationalFromQuadrature, LogAndTimesZ) {
    const RationalApproximation r = rational_from_quadrature(make_log1p_over_z(Transform::times_z), 10, 0.1, 109.0);
    EXPECT_EQ(r.function.transform(), Transform::times_z);
    EXPECT_LT(r.max_rel_error, 1e-2);
    const RationalApproximation r20 = rational_from_quadrature(make_log1p_over_z(Transform::times_z), 20, 0.1, 109.0);
    EXPECT_LT(r20.max_rel_error, r.max_rel_error);
}

TEST(RationalFromQuadrature, DiscreteCannotShrink) {
    const StieltjesFunction f = make_partial_fraction({1.0, 2.0, 3.0}, {0.0, 1.0, 2.0});
    EXPECT_THROW(rational_from_quadrature(f, 2, 1.0, 10.0), ArgumentError);
    EXPECT_EQ(rational_from_quadrature(f, 3, 1.0, 10.0).nodes, 3u);
}
