#pragma once

// Quaternion group structure of S^3, the left-invariant frame, the contact form
// and the hyperspherical chart.

#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"

namespace s3sr {

using Vec4 = std::array<double, 4>;

inline double dot(const Vec4& a, const Vec4& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }
inline double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }
inline Vec4 operator+(const Vec4& a, const Vec4& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]}; }
inline Vec4 operator-(const Vec4& a, const Vec4& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]}; }
inline Vec4 operator*(double s, const Vec4& a) { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }
inline double max_abs_diff(const Vec4& a, const Vec4& b) {
    double m = 0.0;
    for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

struct Tolerances {
    static constexpr double norm = 1e-10;    // accepted without touching
    static constexpr double renorm = 1e-6;   // renormalized below this, rejected above
    static constexpr double chart = 1e-8;    // distance of eta from 0 and pi/2
};

// A unit quaternion. Construction renormalizes small drift and rejects the rest.
class S3Point {
public:
    S3Point() : x_{1.0, 0.0, 0.0, 0.0} {}
    S3Point(double x1, double x2, double x3, double x4) : S3Point(Vec4{x1, x2, x3, x4}) {}
    explicit S3Point(const Vec4& v) : x_(v) {
        double n = norm(v);
        double dev = std::abs(n - 1.0);
        if (!(dev <= Tolerances::renorm)) throw Error(ErrorCode::NonUnitInput, "|x| = " + std::to_string(n));
        if (dev > Tolerances::norm) x_ = (1.0 / n) * v;
    }
    // Skips the unit check; used for homogeneity tests on scaled points.
    static S3Point unchecked(const Vec4& v) {
        S3Point p;
        p.x_ = v;
        return p;
    }

    double operator[](int i) const { return x_[i]; }
    const Vec4& vec() const { return x_; }
    double x1() const { return x_[0]; }
    double x2() const { return x_[1]; }
    double x3() const { return x_[2]; }
    double x4() const { return x_[3]; }

private:
    Vec4 x_;
};

inline std::ostream& operator<<(std::ostream& os, const S3Point& p) {
    return os << "(" << p[0] << ", " << p[1] << ", " << p[2] << ", " << p[3] << ")";
}

inline void require_unit(const Vec4& v, const char* what) {
    if (std::abs(norm(v) - 1.0) > Tolerances::norm) throw Error(ErrorCode::NonUnitInput, what);
}

// x o y, quaternion product with x = x1 + x2 i + x3 j + x4 k.
inline S3Point quat_mul(const S3Point& x, const S3Point& y) {
    require_unit(x.vec(), "left factor");
    require_unit(y.vec(), "right factor");
    Vec4 r{x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3],
           x[1] * y[0] + x[0] * y[1] - x[3] * y[2] + x[2] * y[3],
           x[2] * y[0] + x[3] * y[1] + x[0] * y[2] - x[1] * y[3],
           x[3] * y[0] - x[2] * y[1] + x[1] * y[2] + x[0] * y[3]};
    double n = norm(r);
    if (std::abs(n - 1.0) > 1e-14) r = (1.0 / n) * r;
    return S3Point::unchecked(r);
}

// The constant matrices I1, I2, I3 acting on R^4.
inline Vec4 I1(const Vec4& x) { return {-x[2], -x[3], x[0], x[1]}; }
inline Vec4 I2(const Vec4& x) { return {-x[3], x[2], -x[1], x[0]}; }
inline Vec4 I3(const Vec4& x) { return {-x[1], x[0], x[3], -x[2]}; }

struct Frame {
    Vec4 N, Z, X, Y;
};

inline Frame frame_fields(const S3Point& p) {
    const Vec4& x = p.vec();
    return {x, I3(x), I1(x), I2(x)};
}

inline Vec4 field_X(const Vec4& x) { return I1(x); }
inline Vec4 field_Y(const Vec4& x) { return I2(x); }
inline Vec4 field_Z(const Vec4& x) { return I3(x); }

inline double one_form_eval(const S3Point& p, const Vec4& v) {
    const Vec4& x = p.vec();
    return -x[1] * v[0] + x[0] * v[1] + x[3] * v[2] - x[2] * v[3];
}

struct VelocityDecomposition {
    double a = 0.0, b = 0.0, c = 0.0;
};

inline VelocityDecomposition velocity_decompose(const S3Point& p, const Vec4& v) {
    const Vec4& x = p.vec();
    return {-x[2] * v[0] - x[3] * v[1] + x[0] * v[2] + x[1] * v[3],
            -x[3] * v[0] + x[2] * v[1] - x[1] * v[2] + x[0] * v[3],
            one_form_eval(p, v)};
}

struct CurveSample {
    double s = 0.0;
    S3Point x;
    Vec4 v{0.0, 0.0, 0.0, 0.0};
};

struct HorizontalityReport {
    bool horizontal = false;
    double max_defect = 0.0;
};

inline HorizontalityReport is_horizontal_curve(const std::vector<CurveSample>& samples, double tol) {
    if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no samples");
    HorizontalityReport r;
    for (const auto& smp : samples) r.max_defect = std::max(r.max_defect, std::abs(one_form_eval(smp.x, smp.v)));
    r.horizontal = r.max_defect <= tol;
    return r;
}

struct ProjectedAreas {
    double A = 0.0;  // (x1, x2) plane
    double B = 0.0;  // (x3, x4) plane
};

// Signed shoelace areas of both projections, closed by the chord between the ends.
inline ProjectedAreas projected_areas(const std::vector<CurveSample>& samples) {
    if (samples.size() < 3) throw Error(ErrorCode::EmptyInput, "need at least 3 samples");
    ProjectedAreas r;
    const std::size_t n = samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = samples[i].x;
        const auto& q = samples[(i + 1) % n].x;
        r.A += p[0] * q[1] - q[0] * p[1];
        r.B += p[2] * q[3] - q[2] * p[3];
    }
    r.A *= 0.5;
    r.B *= 0.5;
    return r;
}

// Areas swept by the radius vector (no chord). These are the integrals of the two area
// forms whose difference is the contact form, so they agree exactly for horizontal curves.
inline ProjectedAreas swept_areas(const std::vector<CurveSample>& samples) {
    if (samples.size() < 2) throw Error(ErrorCode::EmptyInput, "need at least 2 samples");
    ProjectedAreas r;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const auto& p = samples[i].x;
        const auto& q = samples[i + 1].x;
        r.A += p[0] * q[1] - q[0] * p[1];
        r.B += p[2] * q[3] - q[2] * p[3];
    }
    r.A *= 0.5;
    r.B *= 0.5;
    return r;
}

struct HyperPoint {
    double zeta1 = 0.0;
    double zeta2 = 0.0;
    double eta = pi / 4;
};

inline HyperPoint to_hyper(const S3Point& p, double chart_eps = Tolerances::chart) {
    // atan2 instead of arccos|z|: arccos loses digits near eta = 0.
    double eta = std::atan2(std::hypot(p[2], p[3]), std::hypot(p[0], p[1]));
    if (!(eta > chart_eps && eta < pi / 2 - chart_eps)) throw Error(ErrorCode::ChartBoundary, "eta = " + std::to_string(eta));
    return {wrap_angle(std::atan2(p[1], p[0])), wrap_angle(std::atan2(p[3], p[2])), eta};
}

inline S3Point from_hyper(const HyperPoint& h) {
    double c = std::cos(h.eta), s = std::sin(h.eta);
    return S3Point::unchecked({c * std::cos(h.zeta1), c * std::sin(h.zeta1), s * std::cos(h.zeta2), s * std::sin(h.zeta2)});
}

inline S3Point rotate_r1(const S3Point& p, double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    return S3Point::unchecked({c * p[0] - s * p[1], s * p[0] + c * p[1], p[2], p[3]});
}

inline S3Point rotate_r2(const S3Point& p, double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    return S3Point::unchecked({p[0], p[1], c * p[2] - s * p[3], s * p[2] + c * p[3]});
}

// Same planar rotations applied to an ambient vector or covector.
inline Vec4 rotate_r1(const Vec4& v, double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    return {c * v[0] - s * v[1], s * v[0] + c * v[1], v[2], v[3]};
}
inline Vec4 rotate_r2(const Vec4& v, double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    return {v[0], v[1], c * v[2] - s * v[3], s * v[2] + c * v[3]};
}

// Flow of a linear field x' = M x over time s (fields X, Y, Z are rotations: exp(sM) = cos s + sin s M).
template <class Field>
inline Vec4 linear_flow(Field field, const Vec4& x, double s) {
    return std::cos(s) * x + std::sin(s) * field(x);
}

// Numerical Lie bracket [X, Y] at x from the commutator of flows:
// phi_{-h}^Y phi_{-h}^X phi_h^Y phi_h^X (x) = x + h^2 [X,Y] + O(h^3).
// Averaging h and -h removes the odd term, leaving an O(h^2) error.
inline Vec4 lie_bracket_raw(const Vec4& x, double h) {
    auto comm = [&](double t) {
        Vec4 p = linear_flow(field_X, x, t);
        p = linear_flow(field_Y, p, t);
        p = linear_flow(field_X, p, -t);
        p = linear_flow(field_Y, p, -t);
        return p;
    };
    Vec4 plus = comm(h), minus = comm(-h);
    // Average of the +h and -h commutators cancels the odd term.
    return (1.0 / (2.0 * h * h)) * ((plus - x) + (minus - x));
}

// One Richardson step on top of lie_bracket_raw.
inline Vec4 lie_bracket_xy(const Vec4& x, double h = 1e-4) {
    Vec4 a = lie_bracket_raw(x, h);
    Vec4 b = lie_bracket_raw(x, 0.5 * h);
    return (4.0 / 3.0) * b - (1.0 / 3.0) * a;
}

}  // namespace s3sr
