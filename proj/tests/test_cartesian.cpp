#include <gtest/gtest.h>

#include <cmath>

#include "s3sr/cartesian.hpp"
#include "sampling.hpp"

using namespace s3sr;
using s3sr::tools::Rng;

namespace {

// Unit-speed parameters whose phase t * omega stays below `max_phase`.
GeodesicParams random_unit_speed(Rng& r, double max_phase) {
    double k = tools::uniform(r, -3, 3), arg = tools::uniform(r, -pi, pi);
    double W = std::sqrt(1 + k * k);
    return {k, std::cos(arg), std::sin(arg), tools::uniform(r, 0.05, max_phase) / W};
}

CotangentState fd_derivative(const GeodesicParams& p, double s, double h = 1e-5) {
    CotangentState a = geodesic_cotangent_lift(p, s + h), b = geodesic_cotangent_lift(p, s - h);
    return {(1 / (2 * h)) * (a.x - b.x), (1 / (2 * h)) * (a.xi - b.xi)};
}

}  // namespace

TEST(GeodesicPoint, HorizontalSphereCase) {
    GeodesicParams p{0, 1, 0, pi};
    for (double s : {0.0, 0.3, 1.2, 2.9}) {
        S3Point x = geodesic_point(p, s);
        EXPECT_NEAR(x[0], std::cos(s), 1e-15);
        EXPECT_NEAR(x[1], 0.0, 1e-15);
        EXPECT_NEAR(x[2], std::sin(s), 1e-15);
        EXPECT_NEAR(x[3], 0.0, 1e-15);
    }
}

TEST(GeodesicPoint, StartsAtIdentityAndStaysOnSphere) {
    Rng r(20);
    for (int i = 0; i < 100; ++i) {
        GeodesicParams p = tools::random_params(r);
        EXPECT_LT(max_abs_diff(geodesic_point(p, 0.0).vec(), {1, 0, 0, 0}), 1e-16);
        for (double s : {0.1, 1.0, p.t}) EXPECT_NEAR(norm(geodesic_point(p, s).vec()), 1.0, 1e-14);
    }
    EXPECT_THROW(geodesic_point({1.0, 0.0, 0.0, 1.0}, 0.5), Error);
}

TEST(GeodesicPoint, SatisfiesHamiltonianSystem) {
    Rng r(21);
    for (int i = 0; i < 50; ++i) {
        GeodesicParams p = tools::random_params(r);
        for (double s : {0.2 * p.t, 0.7 * p.t}) {
            CotangentState d = fd_derivative(p, s), e = hamiltonian_rhs(geodesic_cotangent_lift(p, s));
            EXPECT_LT(max_abs_diff(d.x, e.x), 1e-8);
            EXPECT_LT(max_abs_diff(d.xi, e.xi), 1e-8);
        }
    }
}

TEST(CotangentLift, EnergyAndInitialMomentum) {
    GeodesicParams p{0.8, 0.3, -1.1, 2.0};
    for (double s : {0.0, 0.5, 1.9})
        EXPECT_NEAR(hamiltonian_value(geodesic_cotangent_lift(p, s)), 0.5 * (p.C * p.C + p.D * p.D), 1e-13);
    CotangentState s0 = geodesic_cotangent_lift(p, 0.0);
    // phi(0) = x1-part of the covector: A + iB with A = 0.
    EXPECT_NEAR(s0.xi[0], 0.0, 1e-15);
    EXPECT_NEAR(s0.xi[1], p.B, 1e-15);
}

TEST(ArcLength, EqualsSpeedTimesDuration) {
    Rng r(22);
    for (int i = 0; i < 20; ++i) {
        GeodesicParams p = tools::random_params(r);
        EXPECT_NEAR(geodesic_arc_length(p).value, p.t * p.speed(), 1e-10);
    }
}

TEST(Vertical, QuarterTurnFirstFamily) {
    VerticalFamily f = vertical_family(pi / 2, 1.0, 1);
    S3Point x = geodesic_point(f.params, 1.0);
    EXPECT_LT(max_abs_diff(x.vec(), {0, 1, 0, 0}), 1e-9);
    EXPECT_NEAR(f.length_law, std::sqrt(pi * pi - pi * pi / 4) / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(geodesic_arc_length(f.params).value, f.length, 1e-8);
}

TEST(Vertical, AllFamiliesReachTheTarget) {
    for (double w : {pi / 4, -pi / 4, pi / 2, -pi / 2, 2.5, -2.5})
        for (int n : {1, -1, 2, -2, 3, -3}) {
            VerticalFamily f = vertical_family(w, 1.0, n);
            EXPECT_LT(max_abs_diff(geodesic_point(f.params, 1.0).vec(), {std::cos(w), std::sin(w), 0, 0}), 1e-9)
                << "w=" << w << " n=" << n;
            EXPECT_NEAR(geodesic_arc_length(f.params).value, f.length, 1e-8);
        }
}

TEST(Vertical, NegativeIndexReflectsThePhase) {
    VerticalFamily a = vertical_family(1.0, 1.0, 2), b = vertical_family(1.0, 1.0, -2);
    EXPECT_EQ(a.params.B, b.params.B);
    EXPECT_EQ(a.params.C, -b.params.C);
    EXPECT_EQ(a.length, b.length);
}

TEST(Vertical, DomainErrors) {
    EXPECT_THROW(vertical_family(0.0, 1.0, 1), Error);
    EXPECT_THROW(vertical_family(pi, 1.0, 1), Error);
    EXPECT_THROW(vertical_family(1.0, 1.0, 0), Error);
    EXPECT_THROW(vertical_family(1.0, -1.0, 1), Error);
    EXPECT_EQ(enumerate_vertical(1.0, 1.0, -3, 3).size(), 6u);
}

TEST(Curvature, ShootingRoundTrip) {
    Rng r(23);
    CurvatureOptions o;
    o.phase_branches = 4;
    for (int i = 0; i < 50; ++i) {
        GeodesicParams p = random_unit_speed(r, 2 * pi - 0.05);
        EndpointPolar e = EndpointPolar::from_point(geodesic_point(p, p.t));
        if (e.rho < 1e-6 || e.rho > 1 - 1e-6 || std::abs(std::sin(e.arg_z)) < 1e-6) continue;
        auto roots = solve_curvature_equation(e, o);
        ASSERT_FALSE(roots.empty());
        EXPECT_LE(roots.size(), 64u);
        double best = 1e9;
        for (const auto& k : roots) best = std::min(best, std::abs(k.k - p.curvature()));
        EXPECT_LT(best, 1e-8) << "k=" << p.curvature();
        double b = curvature_lower_bound(e.arg_z, e.rho);
        for (const auto& k : roots)
            if (k.k > 0 && k.branch == 0) EXPECT_GT(k.k, b);
    }
}

TEST(Curvature, RecoveredParametersReachTheEndpoint) {
    Rng r(24);
    for (int i = 0; i < 30; ++i) {
        GeodesicParams p = random_unit_speed(r, pi / 2 - 0.05);
        EndpointPolar e = EndpointPolar::from_point(geodesic_point(p, p.t));
        for (const auto& k : solve_curvature_equation(e)) {
            GeodesicParams q = recover_initial_data(e, k);
            EXPECT_LT(max_abs_diff(geodesic_point(q, q.t).vec(), e.point().vec()), 1e-8);
            // arg_w = B t + theta, up to the sign flip of sin(t omega)
            double d = wrap_angle(e.arg_w - q.B * q.t - std::atan2(q.D, q.C));
            EXPECT_LT(std::min(std::abs(d), std::abs(std::abs(d) - pi)), 1e-8);
        }
    }
}

TEST(Curvature, SmallRhoLimitForEvenFamilies) {
    const double xi1 = 0.6;
    for (int n : {2, 4}) {
        VerticalFamily f = vertical_family(xi1, 1.0, n);
        double expect = std::abs(xi1) / std::sqrt(std::pow(pi * n, 2) - xi1 * xi1);
        EXPECT_NEAR(std::abs(f.params.curvature()), expect, 1e-12);
    }
}

TEST(Curvature, ExcludedEndpoints) {
    EXPECT_THROW(solve_curvature_equation({1.0, 0.5, 0.0, 0.0}), Error);
    EXPECT_THROW(solve_curvature_equation({0.0, 0.5, 1.0, 0.0}), Error);
    EXPECT_THROW(solve_curvature_equation({0.8, 0.0, 0.6, 0.0}), Error);
}

TEST(Connect, HorizontalSphereEndpointIsUnique) {
    S3Point x(std::cos(1.0), 0, std::sin(1.0) * std::cos(0.4), std::sin(1.0) * std::sin(0.4));
    auto sols = connect_cartesian(x);
    ASSERT_EQ(sols.size(), 1u);
    EXPECT_EQ(sols[0].params.B, 0.0);
    EXPECT_LT(sols[0].endpoint_error, 1e-14);
    EXPECT_TRUE(sols[0].minimizer);
}

TEST(Connect, VerticalEndpointGivesTruncatedFamily) {
    auto sols = connect_cartesian(S3Point(std::cos(1.0), std::sin(1.0), 0, 0), 5);
    EXPECT_EQ(sols.size(), 5u);
    for (std::size_t i = 1; i < sols.size(); ++i) EXPECT_LE(sols[i - 1].length, sols[i].length);
    for (const auto& s : sols) EXPECT_LT(s.endpoint_error, 1e-9);
}

TEST(Connect, GenericEndpointIsFiniteAndVerified) {
    GeodesicParams p{0.7, 0.6, 0.8, 1.1};
    auto sols = connect_cartesian(geodesic_point(p, p.t));
    ASSERT_FALSE(sols.empty());
    for (const auto& s : sols) EXPECT_LT(s.endpoint_error, 1e-8);
    EXPECT_TRUE(sols.front().minimizer);
}
