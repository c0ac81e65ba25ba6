#pragma once

// Closed-form geodesics in complex coordinates z = x1 + i x2, w = x3 + i x4,
// their enumeration to vertical-line and generic endpoints, and recovery of (B, C, D, t).

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "core.hpp"
#include "error.hpp"
#include "hamiltonian.hpp"
#include "numeric.hpp"

namespace s3sr {

using cplx = std::complex<double>;

struct GeodesicParams {
    double B = 0.0, C = 1.0, D = 0.0, t = 1.0;
    double speed() const { return std::hypot(C, D); }
    double curvature() const { return B / speed(); }
    double omega() const { return std::sqrt(B * B + C * C + D * D); }
};

inline void check_params(const GeodesicParams& p) {
    if (!(p.C * p.C + p.D * p.D > 0.0)) throw Error(ErrorCode::DomainError, "C^2 + D^2 must be positive");
}

inline S3Point geodesic_point(const GeodesicParams& p, double s) {
    check_params(p);
    const double W = p.omega();
    const cplx I(0.0, 1.0);
    cplx z = (std::cos(s * W) + I * (p.B / W) * std::sin(s * W)) * std::exp(-I * (p.B * s));
    cplx w = cplx(p.C, p.D) / W * std::sin(s * W) * std::exp(I * (p.B * s));
    return S3Point::unchecked({z.real(), z.imag(), w.real(), w.imag()});
}

// Covector along the curve with the constant A of the complex first integrals set to 0.
inline CotangentState geodesic_cotangent_lift(const GeodesicParams& p, double s) {
    S3Point x = geodesic_point(p, s);
    const cplx z(x[0], x[1]), w(x[2], x[3]);
    const cplx iB(0.0, p.B), CD(p.C, p.D);
    cplx phi = z * iB - std::conj(w) * CD;
    cplx psi = std::conj(z) * CD + w * iB;
    return {x.vec(), {phi.real(), phi.imag(), psi.real(), psi.imag()}};
}

// Arc length of the closed-form curve by quadrature of sqrt(a^2 + b^2).
inline QuadResult geodesic_arc_length(const GeodesicParams& p, double rtol = 1e-13) {
    auto speed = [&](double s) {
        CotangentState st = geodesic_cotangent_lift(p, s);
        CotangentState r = hamiltonian_rhs(st);
        VelocityDecomposition v = velocity_decompose(S3Point::unchecked(st.x), r.x);
        return std::hypot(v.a, v.b);
    };
    return integrate_gk(speed, 0.0, p.t, rtol);
}

// ---------------------------------------------------------------------------------------------
// Geodesics to the vertical line through the identity.

struct VerticalFamily {
    int n = 0;
    GeodesicParams params;      // one representative; arg(C + iD) is free
    double length_law = 0.0;  // sqrt((pi n)^2 - omega^2) / sqrt 2
    double length = 0.0;        // t sqrt(C^2 + D^2)
};

// One family per n. For odd n the curve picks up a factor -1 from cos(pi n), so the
// vertical momentum satisfies -Bt = omega - sgn(omega) pi rather than -Bt = omega.
inline VerticalFamily vertical_family(double omega, double t, int n) {
    if (omega == 0.0 || std::abs(omega) >= pi) throw Error(ErrorCode::DomainError, "omega must lie in (-pi, 0) u (0, pi)");
    if (!(t > 0.0)) throw Error(ErrorCode::DomainError, "t must be positive");
    if (n == 0) throw Error(ErrorCode::DomainError, "n must be nonzero");
    const double pn = pi * n;
    if (pn * pn <= omega * omega) throw Error(ErrorCode::DomainError, "(pi n)^2 <= omega^2");
    const double Bt = (n % 2 == 0) ? -omega : -(omega - sgn(omega) * pi);
    const double mu_t = std::sqrt(pn * pn - Bt * Bt);
    VerticalFamily f;
    f.n = n;
    const double sgn_n = n > 0 ? 1.0 : -1.0;  // -n: reflected w-phase
    f.params = {Bt / t, sgn_n * mu_t / t, 0.0, t};
    f.length_law = std::sqrt(pn * pn - omega * omega) / std::sqrt(2.0);
    f.length = mu_t;
    return f;
}

inline std::vector<VerticalFamily> enumerate_vertical(double omega, double t, int n_min, int n_max) {
    std::vector<VerticalFamily> out;
    for (int n = n_min; n <= n_max; ++n) {
        if (n == 0) continue;
        if (std::pow(pi * n, 2) <= omega * omega) continue;
        out.push_back(vertical_family(omega, t, n));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Generic endpoints.

struct EndpointPolar {
    double r = 1.0, arg_z = 0.0, rho = 0.0, arg_w = 0.0;
    static EndpointPolar from_point(const S3Point& x) {
        return {std::hypot(x[0], x[1]), std::atan2(x[1], x[0]), std::hypot(x[2], x[3]), std::atan2(x[3], x[2])};
    }
    S3Point point() const {
        return S3Point::unchecked({r * std::cos(arg_z), r * std::sin(arg_z), rho * std::cos(arg_w), rho * std::sin(arg_w)});
    }
};

struct CurvatureOptions {
    int grid = 4096;
    int phase_branches = 1;  // 1 = principal (first-quadrant) phase only
    double excluded_tol = 1e-12;
};

struct CurvatureRoot {
    double k = 0.0;
    int branch = 0;
};

namespace detail {

// Phase tOmega of the unit-speed geodesic with q = k / sqrt(1+k^2) on phase branch j.
inline double curvature_phase(double q, double rho, int j) {
    double a = std::asin(std::clamp(rho / std::sqrt(1.0 - q * q), -1.0, 1.0));
    return (j / 2) * pi + (j % 2 == 0 ? a : pi - a);
}

inline cplx curvature_z(double q, double rho, int j) {
    const double ph = curvature_phase(q, rho, j);
    const cplx I(0.0, 1.0);
    return (std::cos(ph) + I * q * std::sin(ph)) * std::exp(-I * (q * ph));
}

}  // namespace detail

// The lower bound b(xi1, rho) of the positive roots.
inline double curvature_lower_bound(double arg_z, double rho) {
    double s = std::sqrt(1.0 - rho * rho);
    double b1 = std::abs(arg_z) * s / (rho * (std::sqrt(2.0) - s));
    double b2 = std::sqrt(0.5 * (1.0 / (rho * rho) - 1.0));
    return std::min(b1, b2);
}

// Roots k of the endpoint condition arg z(t) = arg_z, |w(t)| = rho for unit-speed
// geodesics. The search runs in q = k / sqrt(1+k^2), |q| <= sqrt(1 - rho^2), which is
// equivalent to |k| <= sqrt(1/rho^2 - 1) but resolves small k.
inline std::vector<CurvatureRoot> solve_curvature_equation(const EndpointPolar& e, const CurvatureOptions& opt = {}) {
    const double tol = opt.excluded_tol;
    if (e.rho <= tol) throw Error(ErrorCode::ExcludedEndpoint, "endpoint on the vertical line");
    if (e.rho >= 1.0 - tol) throw Error(ErrorCode::ExcludedEndpoint, "endpoint with z = 0");
    if (std::abs(std::sin(e.arg_z)) <= tol) throw Error(ErrorCode::ExcludedEndpoint, "endpoint on the horizontal sphere");
    const double qmax = std::sqrt(1.0 - e.rho * e.rho) * (1.0 - 1e-15);
    const cplx rot = std::polar(1.0, -e.arg_z);
    std::vector<CurvatureRoot> out;
    for (int j = 0; j < opt.phase_branches; ++j) {
        auto im = [&](double q) { return (detail::curvature_z(q, e.rho, j) * rot).imag(); };
        for (double q : grid_roots(im, -qmax, qmax, opt.grid)) {
            if ((detail::curvature_z(q, e.rho, j) * rot).real() <= 0.0) continue;
            out.push_back({q / std::sqrt(1.0 - q * q), j});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.branch != b.branch ? a.branch < b.branch : a.k < b.k; });
    std::vector<CurvatureRoot> dedup;
    for (const auto& r : out) {
        if (!dedup.empty() && dedup.back().branch == r.branch && std::abs(dedup.back().k - r.k) < 1e-10) continue;
        dedup.push_back(r);
    }
    return dedup;
}

// Unit-speed (B, C, D, t) reaching the endpoint with curvature k on phase branch j.
inline GeodesicParams recover_initial_data(const EndpointPolar& e, const CurvatureRoot& root, double verify_tol = 1e-8) {
    const double k = root.k;
    const double W = std::sqrt(1.0 + k * k);
    if (e.rho * W > 1.0 + 1e-12) throw Error(ErrorCode::DomainError, "rho sqrt(1+k^2) > 1");
    const double q = k / W;
    const double ph = detail::curvature_phase(q, e.rho, root.branch);
    GeodesicParams p;
    p.B = k;
    p.t = ph / W;
    double theta = e.arg_w - k * p.t - (std::sin(ph) < 0.0 ? pi : 0.0);
    p.C = std::cos(theta);
    p.D = std::sin(theta);
    double err = max_abs_diff(geodesic_point(p, p.t).vec(), e.point().vec());
    if (!(err <= verify_tol)) throw Error(ErrorCode::BranchInconsistency, "endpoint error " + std::to_string(err));
    return p;
}

struct ConnectSolution {
    double label = 0.0;  // n for vertical families, k for generic endpoints
    GeodesicParams params;
    double length = 0.0;
    double endpoint_error = 0.0;
    bool minimizer = false;
};

// All enumerated geodesics from the identity to x, sorted by length.
inline std::vector<ConnectSolution> connect_cartesian(const S3Point& x, int n_max = 8, const CurvatureOptions& opt = {}) {
    EndpointPolar e = EndpointPolar::from_point(x);
    std::vector<ConnectSolution> out;
    const double tol = opt.excluded_tol;
    if (e.rho <= tol) {
        double omega = e.arg_z;
        if (std::abs(omega) <= tol) return out;  // the identity itself
        if (std::abs(std::abs(omega) - pi) <= tol) omega = sgn(omega) * (pi - 1e-15);
        for (const auto& f : enumerate_vertical(omega, 1.0, 1, n_max)) {
            ConnectSolution c{double(f.n), f.params, f.length, max_abs_diff(geodesic_point(f.params, 1.0).vec(), x.vec())};
            out.push_back(c);
        }
    } else if (std::abs(std::sin(e.arg_z)) <= tol && e.rho < 1.0 - tol) {
        // Horizontal sphere: B = 0, the great circle from 1 through x.
        double s = std::atan2(e.rho, std::cos(e.arg_z) * e.r);
        GeodesicParams p{0.0, std::cos(e.arg_w), std::sin(e.arg_w), s};
        out.push_back({0.0, p, s, max_abs_diff(geodesic_point(p, s).vec(), x.vec())});
    } else {
        for (const auto& r : solve_curvature_equation(e, opt)) {
            try {
                GeodesicParams p = recover_initial_data(e, r);
                out.push_back({r.k, p, p.t * p.speed(), max_abs_diff(geodesic_point(p, p.t).vec(), x.vec())});
            } catch (const Error&) {
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.length < b.length; });
    if (!out.empty()) out.front().minimizer = true;
    return out;
}

}  // namespace s3sr
