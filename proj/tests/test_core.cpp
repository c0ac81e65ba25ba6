#include <gtest/gtest.h>

#include <cmath>

#include "s3sr/core.hpp"
#include "sampling.hpp"

using namespace s3sr;
using s3sr::tools::Rng;

namespace {

void expect_vec_near(const Vec4& a, const Vec4& b, double tol) {
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(a[i], b[i], tol) << "component " << i;
}

std::vector<CurveSample> sample_curve(auto&& x_of_s, auto&& v_of_s, double s1, int n) {
    std::vector<CurveSample> out;
    for (int k = 0; k <= n; ++k) {
        double s = s1 * k / n;
        out.push_back({s, S3Point::unchecked(x_of_s(s)), v_of_s(s)});
    }
    return out;
}

}  // namespace

TEST(QuatMul, IdentityIsNeutral) {
    S3Point y(0.5, -0.5, 0.5, 0.5);
    expect_vec_near(quat_mul(S3Point(), y).vec(), y.vec(), 0.0);
}

TEST(QuatMul, BasisProduct) {
    expect_vec_near(quat_mul(S3Point(0, 1, 0, 0), S3Point(0, 0, 1, 0)).vec(), {0, 0, 0, 1}, 0.0);
}

TEST(QuatMul, PreservesNorm) {
    Rng r(1);
    for (int i = 0; i < 200; ++i) {
        auto p = tools::random_point(r), q = tools::random_point(r);
        EXPECT_NEAR(norm(quat_mul(p, q).vec()), 1.0, 1e-14);
    }
}

TEST(S3Point, RejectsFarFromSphere) {
    EXPECT_THROW(S3Point(1.1, 0, 0, 0), Error);
    S3Point p(1.0 + 1e-8, 0, 0, 0);
    EXPECT_DOUBLE_EQ(p[0], 1.0);
}

TEST(Frame, AtIdentity) {
    Frame f = frame_fields(S3Point());
    expect_vec_near(f.X, {0, 0, 1, 0}, 0.0);
    expect_vec_near(f.Y, {0, 0, 0, 1}, 0.0);
    expect_vec_near(f.Z, {0, 1, 0, 0}, 0.0);
    expect_vec_near(f.N, {1, 0, 0, 0}, 0.0);
}

TEST(Frame, OrthonormalAndContact) {
    Rng r(2);
    for (int i = 0; i < 1000; ++i) {
        S3Point p = tools::random_point(r);
        Frame f = frame_fields(p);
        EXPECT_NEAR(dot(f.X, f.Y), 0.0, 1e-15);
        EXPECT_NEAR(dot(f.X, f.Z), 0.0, 1e-15);
        EXPECT_NEAR(one_form_eval(p, f.X), 0.0, 1e-14);
        EXPECT_NEAR(one_form_eval(p, f.Y), 0.0, 1e-14);
        EXPECT_NEAR(one_form_eval(p, f.N), 0.0, 1e-14);
        EXPECT_NEAR(one_form_eval(p, f.Z), 1.0, 1e-14);
    }
}

TEST(LieBracket, ApproximatesTwoZWithSecondOrderError) {
    Rng r(3);
    S3Point p = tools::random_point(r);
    Vec4 Z2 = 2.0 * field_Z(p.vec());
    double e1 = max_abs_diff(lie_bracket_raw(p.vec(), 1e-2), Z2);
    double e2 = max_abs_diff(lie_bracket_raw(p.vec(), 5e-3), Z2);
    EXPECT_LT(e1, 1e-3);
    EXPECT_NEAR(e1 / e2, 4.0, 0.2);
    EXPECT_LT(max_abs_diff(lie_bracket_xy(p.vec()), Z2), 1e-7);
}

TEST(VelocityDecompose, FrameVectorsAreUnitCoordinates) {
    Rng r(4);
    S3Point p = tools::random_point(r);
    auto d = velocity_decompose(p, field_X(p.vec()));
    EXPECT_NEAR(d.a, 1.0, 1e-15);
    EXPECT_NEAR(d.b, 0.0, 1e-15);
    EXPECT_NEAR(d.c, 0.0, 1e-15);
}

TEST(VelocityDecompose, VerticalLineIsPurelyVertical) {
    for (double s : {0.0, 0.4, 2.0}) {
        S3Point p(std::cos(s), std::sin(s), 0, 0);
        EXPECT_NEAR(velocity_decompose(p, {-std::sin(s), std::cos(s), 0, 0}).c, 1.0, 1e-15);
    }
}

TEST(Horizontality, GreatCircleOnHorizontalSphere) {
    const double psi = 0.7;
    auto x = [&](double s) { return Vec4{std::cos(s), 0, std::cos(psi) * std::sin(s), std::sin(psi) * std::sin(s)}; };
    auto v = [&](double s) { return Vec4{-std::sin(s), 0, std::cos(psi) * std::cos(s), std::sin(psi) * std::cos(s)}; };
    auto smp = sample_curve(x, v, pi, 400);
    for (const auto& q : smp) EXPECT_NEAR(velocity_decompose(q.x, q.v).c, 0.0, 1e-15);
    auto rep = is_horizontal_curve(smp, 1e-12);
    EXPECT_TRUE(rep.horizontal);
    EXPECT_LT(rep.max_defect, 1e-12);
}

TEST(Horizontality, VerticalLineAndConstantCurve) {
    auto smp = sample_curve([](double s) { return Vec4{std::cos(s), std::sin(s), 0, 0}; },
                            [](double s) { return Vec4{-std::sin(s), std::cos(s), 0, 0}; }, 1.0, 10);
    auto rep = is_horizontal_curve(smp, 1e-9);
    EXPECT_FALSE(rep.horizontal);
    EXPECT_NEAR(rep.max_defect, 1.0, 1e-14);
    std::vector<CurveSample> one{{0.0, S3Point(), {0, 0, 0, 0}}};
    auto r1 = is_horizontal_curve(one, 0.0);
    EXPECT_TRUE(r1.horizontal);
    EXPECT_EQ(r1.max_defect, 0.0);
    EXPECT_THROW(is_horizontal_curve({}, 1.0), Error);
}

TEST(Areas, HorizontalCurveHasEqualSweptAreas) {
    const double psi = -0.3;
    auto x = [&](double s) { return Vec4{std::cos(s), 0, std::cos(psi) * std::sin(s), std::sin(psi) * std::sin(s)}; };
    auto v = [&](double s) { return Vec4{-std::sin(s), 0, std::cos(psi) * std::cos(s), std::sin(psi) * std::cos(s)}; };
    auto smp = sample_curve(x, v, pi / 2, 2000);
    auto sw = swept_areas(smp);
    EXPECT_NEAR(sw.A, sw.B, 1e-12);
}

TEST(Areas, VerticalQuarterArcWithChord) {
    // Circular segment of the unit circle cut off by the chord from angle 0 to pi/2.
    auto smp = sample_curve([](double s) { return Vec4{std::cos(s), std::sin(s), 0, 0}; },
                            [](double s) { return Vec4{-std::sin(s), std::cos(s), 0, 0}; }, pi / 2, 20000);
    auto ar = projected_areas(smp);
    EXPECT_NEAR(ar.A, pi / 4 - 0.5, 1e-8);
    EXPECT_EQ(ar.B, 0.0);
    EXPECT_GT(std::abs(ar.A - ar.B), 0.1);
}

TEST(Areas, ConstantCurveIsZero) {
    std::vector<CurveSample> smp(5, CurveSample{0.0, S3Point(), {0, 0, 0, 0}});
    auto ar = projected_areas(smp);
    EXPECT_EQ(ar.A, 0.0);
    EXPECT_EQ(ar.B, 0.0);
}

TEST(Chart, BasePoint) {
    HyperPoint h = to_hyper(S3Point(1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0), 0));
    EXPECT_NEAR(h.zeta1, 0.0, 1e-15);
    EXPECT_NEAR(h.zeta2, 0.0, 1e-15);
    EXPECT_NEAR(h.eta, pi / 4, 1e-15);
}

TEST(Chart, RoundTrip) {
    Rng r(5);
    for (int i = 0; i < 1000; ++i) {
        HyperPoint h{tools::uniform(r, -3, 3), tools::uniform(r, -3, 3), tools::uniform(r, 0.01, pi / 2 - 0.01)};
        HyperPoint g = to_hyper(from_hyper(h));
        EXPECT_NEAR(g.zeta1, h.zeta1, 1e-12);
        EXPECT_NEAR(g.zeta2, h.zeta2, 1e-12);
        EXPECT_NEAR(g.eta, h.eta, 1e-12);
    }
}

TEST(Chart, PoleIsOutside) {
    EXPECT_THROW(to_hyper(S3Point()), Error);
    try {
        to_hyper(S3Point(0, 0, 1, 0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ChartBoundary);
    }
}

TEST(Rotations, Basics) {
    expect_vec_near(rotate_r1(S3Point(), 0.0).vec(), S3Point().vec(), 0.0);
    expect_vec_near(rotate_r1(S3Point(), pi / 2).vec(), {0, 1, 0, 0}, 1e-16);
    expect_vec_near(rotate_r2(S3Point(0, 0, 1, 0), pi / 2).vec(), {0, 0, 0, 1}, 1e-16);
}

TEST(Rotations, ShiftChartAngles) {
    HyperPoint h{0.3, -0.2, 0.6};
    HyperPoint g = to_hyper(rotate_r2(rotate_r1(from_hyper(h), 0.5), -0.1));
    EXPECT_NEAR(g.zeta1, 0.8, 1e-14);
    EXPECT_NEAR(g.zeta2, -0.3, 1e-14);
    EXPECT_NEAR(g.eta, 0.6, 1e-14);
}
