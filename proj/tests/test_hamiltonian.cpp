#include <gtest/gtest.h>

#include <cmath>

#include "s3sr/cartesian.hpp"
#include "s3sr/hamiltonian.hpp"
#include "sampling.hpp"

using namespace s3sr;
using s3sr::tools::Rng;

TEST(Hamiltonian, AtIdentity) {
    CotangentState s{{1, 0, 0, 0}, {0, 0, 0.6, -1.3}};
    EXPECT_NEAR(hamiltonian_value(s), 0.5 * (0.36 + 1.69), 1e-15);
    EXPECT_EQ(hamiltonian_value({{1, 0, 0, 0}, {0, 0, 0, 0}}), 0.0);
}

TEST(Hamiltonian, VerticalCovectorIsCharacteristic) {
    Rng r(7);
    for (int i = 0; i < 100; ++i) {
        Vec4 x = tools::random_point(r).vec();
        EXPECT_NEAR(hamiltonian_value({x, 2.7 * I3(x)}), 0.0, 1e-15);
    }
}

TEST(Hamiltonian, FlowProperties) {
    Rng r(8);
    for (int i = 0; i < 200; ++i) {
        CotangentState s = tools::random_cotangent(r);
        Vec4 xd = hamiltonian_rhs(s).x;
        EXPECT_NEAR(dot(xd, s.x), 0.0, 1e-13);
        EXPECT_NEAR(dot(xd, I3(s.x)), 0.0, 1e-13);
        EXPECT_NEAR(dot(xd, xd), 2.0 * hamiltonian_value(s), 1e-12);
    }
}

TEST(Hamiltonian, SphereIdentityForTwoH) {
    // 2H = |xi|^2 - J1^2 - J2^2 on the unit sphere.
    Rng r(9);
    for (int i = 0; i < 200; ++i) {
        CotangentState s = tools::random_cotangent(r);
        FirstIntegrals J = first_integrals(s);
        EXPECT_NEAR(2 * hamiltonian_value(s), dot(s.xi, s.xi) - J.J1 * J.J1 - J.J2 * J.J2, 1e-12);
    }
}

TEST(Hamiltonian, RotationInvariance) {
    Rng r(10);
    for (int i = 0; i < 100; ++i) {
        CotangentState s = tools::random_cotangent(r);
        double phi = tools::uniform(r, -pi, pi);
        CotangentState a{rotate_r1(s.x, phi), rotate_r1(s.xi, phi)};
        CotangentState b{rotate_r2(s.x, phi), rotate_r2(s.xi, phi)};
        EXPECT_NEAR(hamiltonian_value(a), hamiltonian_value(s), 1e-12);
        EXPECT_NEAR(hamiltonian_value(b), hamiltonian_value(s), 1e-12);
    }
}

TEST(FirstIntegrals, AtIdentity) {
    FirstIntegrals J = first_integrals({{1, 0, 0, 0}, {0.1, 0.2, 0.3, 0.4}});
    EXPECT_EQ(J.J1, 0.1);
    EXPECT_EQ(J.J2, 0.2);
    EXPECT_EQ(J.J3, 0.3);
    EXPECT_EQ(J.J4, 0.4);
}

TEST(Integrate, HorizontalGreatCircleReachesAntipode) {
    GeodesicParams p{0.0, 1.0, 0.0, pi};
    Trajectory tr = integrate(geodesic_cotangent_lift(p, 0.0), pi);
    Vec4 end = tr.points.back().state.x;
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(end[i], i == 0 ? -1.0 : 0.0, 1e-8);
}

TEST(Integrate, ZeroCovectorIsStationary) {
    Trajectory tr = integrate({{0, 1, 0, 0}, {0, 0, 0, 0}}, 3.0);
    EXPECT_EQ(max_abs_diff(tr.points.back().state.x, {0, 1, 0, 0}), 0.0);
}

TEST(Integrate, ConservesHamiltonianAndIntegrals) {
    Rng r(11);
    for (int i = 0; i < 10; ++i) {
        Trajectory tr = integrate(tools::random_cotangent(r), 10.0);
        EXPECT_LT(tr.drift.H_scaled, 1e-8);
        EXPECT_LT(tr.drift.norm_x, 1e-8);
        for (double j : tr.drift.J) EXPECT_LT(j, 1e-8);
        EXPECT_LT(tr.drift.horizontality, 1e-8);
    }
}

TEST(Integrate, RejectsBadArguments) {
    EXPECT_THROW(integrate({{1, 0, 0, 0}, {0, 0, 1, 0}}, -1.0), Error);
    IntegratorOptions o;
    o.rtol = 0;
    EXPECT_THROW(integrate({{1, 0, 0, 0}, {0, 0, 1, 0}}, 1.0, o), Error);
}

TEST(Integrate, DenseSamplesAreUniform) {
    IntegratorOptions o;
    o.samples = 10;
    Trajectory tr = integrate({{1, 0, 0, 0}, {0, 0.3, 1, 0}}, 2.0, o);
    ASSERT_EQ(tr.points.size(), 11u);
    EXPECT_NEAR(tr.points[5].s, 1.0, 1e-15);
}

TEST(PoissonBracket, IntegralsCommuteWithH) {
    Rng r(12);
    auto H = [](const CotangentState& s) { return hamiltonian_value(s); };
    for (int i = 0; i < 50; ++i) {
        CotangentState s = tools::random_cotangent(r);
        for (int k = 0; k < 4; ++k) {
            auto J = [k](const CotangentState& q) { return first_integrals(q)[k]; };
            EXPECT_NEAR(poisson_bracket(J, H, s, 1e-5), 0.0, 1e-8);
        }
    }
}

TEST(PoissonBracket, Antisymmetry) {
    Rng r(13);
    CotangentState s = tools::random_cotangent(r);
    auto J3 = [](const CotangentState& q) { return first_integrals(q).J3; };
    EXPECT_EQ(poisson_bracket(J3, J3, s), 0.0);
}

// Five of the six pairs vanish. [J3, J4] equals 2 (x1 xi2 - x2 xi1 + x3 xi4 - x4 xi3), which is
// not identically zero; the test pins that value instead of asserting involutivity.
TEST(PoissonBracket, PairsAndTheJ3J4Exception) {
    Rng r(14);
    auto J = [](int k) { return [k](const CotangentState& q) { return first_integrals(q)[k]; }; };
    for (int i = 0; i < 100; ++i) {
        CotangentState s = tools::random_cotangent(r);
        for (auto [a, b] : {std::pair{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}})
            EXPECT_NEAR(poisson_bracket(J(a), J(b), s, 1e-5), 0.0, 1e-8);
        const Vec4 &x = s.x, &p = s.xi;
        double analytic = 2 * (x[0] * p[1] - x[1] * p[0] + x[2] * p[3] - x[3] * p[2]);
        EXPECT_NEAR(poisson_bracket(J(2), J(3), s, 1e-5), analytic, 1e-8);
        // bilinearity: [J3, u J3 + v J4] = v [J3, J4]
        auto mix = [](const CotangentState& q) { auto f = first_integrals(q); return 0.7 * f.J3 - 1.9 * f.J4; };
        EXPECT_NEAR(poisson_bracket(J(2), mix, s, 1e-5), -1.9 * analytic, 1e-7);
    }
}

TEST(Control, OptimalControlMaximizesPseudoHamiltonian) {
    Rng r(15);
    for (int i = 0; i < 50; ++i) {
        CotangentState s = tools::random_cotangent(r);
        Control c = optimal_control(s);
        EXPECT_NEAR(0.5 * (c.u * c.u + c.v * c.v), hamiltonian_value(s), 1e-13);
        EXPECT_NEAR(pseudo_hamiltonian(s, c), hamiltonian_value(s), 1e-13);
        const double h = 1e-5;
        EXPECT_NEAR((pseudo_hamiltonian(s, {c.u + h, c.v}) - pseudo_hamiltonian(s, {c.u - h, c.v})) / (2 * h), 0.0, 1e-9);
        EXPECT_NEAR((pseudo_hamiltonian(s, {c.u, c.v + h}) - pseudo_hamiltonian(s, {c.u, c.v - h})) / (2 * h), 0.0, 1e-9);
        CotangentState a = control_rhs(s, c), b = hamiltonian_rhs(s);
        EXPECT_LT(max_abs_diff(a.x, b.x), 1e-14);
        EXPECT_LT(max_abs_diff(a.xi, b.xi), 1e-14);
        Control back = control_from_velocity(s.x, b.x);
        EXPECT_NEAR(back.u, c.u, 1e-13);
        EXPECT_NEAR(back.v, c.v, 1e-13);
    }
    Control z = optimal_control({{1, 0, 0, 0}, {0, 0, 0, 0}});
    EXPECT_EQ(z.u, 0.0);
    EXPECT_EQ(z.v, 0.0);
    CotangentState zr = control_rhs({{0, 0, 1, 0}, {1, 2, 3, 4}}, {0, 0});
    EXPECT_EQ(norm(zr.x) + norm(zr.xi), 0.0);
}

// With the first integrals as written, the system J = 0 has determinant
// (|z|^2 - |w|^2) |x|^2 = cos 2eta on the sphere: 1 at the identity, not 1 everywhere.
TEST(Abnormal, DeterminantOfTheIntegralSystem) {
    EXPECT_NEAR(std::abs(abnormal_system_determinant({1, 0, 0, 0})), 1.0, 1e-15);
    Rng r(16);
    for (int i = 0; i < 100; ++i) {
        Vec4 x = tools::random_point(r).vec();
        double zz = x[0] * x[0] + x[1] * x[1], ww = x[2] * x[2] + x[3] * x[3];
        EXPECT_NEAR(abnormal_system_determinant(x), zz - ww, 1e-12);
        EXPECT_NEAR(abnormal_system_determinant(1.7 * x), std::pow(1.7, 4) * (zz - ww), 1e-11);
    }
}
