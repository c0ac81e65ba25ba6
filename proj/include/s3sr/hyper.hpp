#pragma once

// Hyperspherical coordinates x1 + i x2 = e^{i zeta1} cos eta, x3 + i x4 = e^{i zeta2} sin eta.
//
// The model carries an eta-weight kappa: the horizontal frame is
//   X = sin d (tan eta d_z1 + cot eta d_z2) + sqrt(kappa) cos d d_eta,
//   Y = cos d (tan eta d_z1 + cot eta d_z2) - sqrt(kappa) sin d d_eta,   d = z1 - z2,
// and H = 1/2 (psi1^2 tan^2 eta + psi2^2 cot^2 eta + kappa theta^2 + 2 psi1 psi2).
// kappa = 4 is the standard normalization, kappa = 1 is the image of the quaternion frame.
//
// Geodesics: with A = psi1^2/cos^2 eta0 + psi2^2/sin^2 eta0 + kappa theta0^2 and psi~ = psi/sqrt(A),
//   sin^2 eta(s) = m + D0 sin(x0 + omega s),  m = (1 + psi~2^2 - psi~1^2)/2,
//   D0 = sqrt(m^2 - psi~2^2),  omega = 2 sqrt(kappa A),
// where x0 = asin(v0) if eta starts increasing and pi - asin(v0) otherwise, v0 = (sin^2 eta0 - m)/D0.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "core.hpp"
#include "error.hpp"
#include "hamiltonian.hpp"
#include "numeric.hpp"

namespace s3sr {

struct HyperModel {
    double kappa = 4.0;
    static HyperModel standard() { return {4.0}; }
    static HyperModel frame() { return {1.0}; }
    double root() const { return std::sqrt(kappa); }
};

struct HyperState {
    double zeta1 = 0.0, zeta2 = 0.0, eta = pi / 4;
    double psi1 = 0.0, psi2 = 0.0, theta = 0.0;
};

inline void require_chart(double eta, double eps = Tolerances::chart) {
    if (!(eta > eps && eta < pi / 2 - eps)) throw Error(ErrorCode::ChartBoundary, "eta = " + std::to_string(eta));
}

inline double hyper_hamiltonian(const HyperState& s, const HyperModel& m = {}) {
    require_chart(s.eta);
    double t = std::tan(s.eta);
    return 0.5 * (s.psi1 * s.psi1 * t * t + s.psi2 * s.psi2 / (t * t) + m.kappa * s.theta * s.theta + 2.0 * s.psi1 * s.psi2);
}

inline HyperState hyper_rhs(const HyperState& s, const HyperModel& m = {}) {
    require_chart(s.eta);
    double t = std::tan(s.eta), c = std::cos(s.eta), sn = std::sin(s.eta);
    HyperState d;
    d.zeta1 = s.psi1 * t * t + s.psi2;
    d.zeta2 = s.psi2 / (t * t) + s.psi1;
    d.eta = m.kappa * s.theta;
    d.psi1 = 0.0;
    d.psi2 = 0.0;
    d.theta = -s.psi1 * s.psi1 * t / (c * c) + s.psi2 * s.psi2 / (t * sn * sn);
    return d;
}

// Frame fields in the coordinate basis (d_z1, d_z2, d_eta).
inline std::array<double, 3> hyper_field_X(const HyperPoint& p, const HyperModel& m = {}) {
    double sd = std::sin(p.zeta1 - p.zeta2), cd = std::cos(p.zeta1 - p.zeta2), t = std::tan(p.eta);
    return {sd * t, sd / t, m.root() * cd};
}
inline std::array<double, 3> hyper_field_Y(const HyperPoint& p, const HyperModel& m = {}) {
    double sd = std::sin(p.zeta1 - p.zeta2), cd = std::cos(p.zeta1 - p.zeta2), t = std::tan(p.eta);
    return {cd * t, cd / t, -m.root() * sd};
}

// Covector transport through the chart. theta is the eta-momentum divided by sqrt(kappa), so
// Hamiltonian values agree for every kappa; the flows agree only for kappa = 1.
inline HyperState to_hyper_state(const CotangentState& cs, const HyperModel& m = {}) {
    HyperPoint h = to_hyper(S3Point(cs.x));
    double ce = std::cos(h.eta), se = std::sin(h.eta);
    double c1 = std::cos(h.zeta1), s1 = std::sin(h.zeta1), c2 = std::cos(h.zeta2), s2 = std::sin(h.zeta2);
    Vec4 e1{-s1 * ce, c1 * ce, 0.0, 0.0};
    Vec4 e2{0.0, 0.0, -s2 * se, c2 * se};
    Vec4 e3{-c1 * se, -s1 * se, c2 * ce, s2 * ce};
    return {h.zeta1, h.zeta2, h.eta, dot(cs.xi, e1), dot(cs.xi, e2), dot(cs.xi, e3) / m.root()};
}

// Inverse map; the normal component <x, xi> is set to 0.
inline CotangentState from_hyper_state(const HyperState& s, const HyperModel& m = {}) {
    double ce = std::cos(s.eta), se = std::sin(s.eta);
    double c1 = std::cos(s.zeta1), s1 = std::sin(s.zeta1), c2 = std::cos(s.zeta2), s2 = std::sin(s.zeta2);
    Vec4 e1{-s1 * ce, c1 * ce, 0.0, 0.0};
    Vec4 e2{0.0, 0.0, -s2 * se, c2 * se};
    Vec4 e3{-c1 * se, -s1 * se, c2 * ce, s2 * ce};
    Vec4 xi = (s.psi1 / (ce * ce)) * e1 + (s.psi2 / (se * se)) * e2 + (m.root() * s.theta) * e3;
    return {from_hyper({s.zeta1, s.zeta2, s.eta}).vec(), xi};
}

// RK5(4) flow of the hyperspherical system; returns the end state.
inline HyperState integrate_hyper(const HyperState& s0, double t, const HyperModel& m = {}, double rtol = 1e-12,
                                  double atol = 1e-13) {
    namespace ode = boost::numeric::odeint;
    using St = std::array<double, 4>;
    St y{s0.zeta1, s0.zeta2, s0.eta, s0.theta};
    auto sys = [&](const St& v, St& d, double) {
        HyperState hs{v[0], v[1], v[2], s0.psi1, s0.psi2, v[3]};
        HyperState r = hyper_rhs(hs, m);
        d = {r.zeta1, r.zeta2, r.eta, r.theta};
    };
    ode::integrate_adaptive(ode::make_controlled(atol, rtol, ode::runge_kutta_dopri5<St>()), sys, y, 0.0, t, 1e-3);
    return {y[0], y[1], y[2], s0.psi1, s0.psi2, y[3]};
}

// ---------------------------------------------------------------------------------------------
// Closed-form geodesics.

struct HyperGeodesic {
    double kappa = 4.0;
    double A = 0.0;
    double psi1_t = 0.0, psi2_t = 0.0;  // normalized momenta
    double eta0 = pi / 4;
    double zeta10 = 0.0, zeta20 = 0.0;
    int sign = 1;   // initial direction of eta
    int turns = 0;  // turning points of eta passed on [0, t] (branch index)
    double t = 1.0;
    // derived
    double m = 0.5, D0 = 0.5, x0 = 0.0, omega = 0.0;
    bool degenerate = false;

    double psi1() const { return psi1_t * std::sqrt(A); }
    double psi2() const { return psi2_t * std::sqrt(A); }
    double hamiltonian() const { return 0.5 * A * (1.0 - (psi1_t - psi2_t) * (psi1_t - psi2_t)); }
    // D1: the phase offset of the sine.
    double D1() const { return x0; }
    double phase(double s) const { return x0 + omega * s; }
    double theta0() const {
        double c = std::cos(eta0), sn = std::sin(eta0);
        double r = (A - psi1() * psi1() / (c * c) - psi2() * psi2() / (sn * sn)) / kappa;
        return sign * std::sqrt(std::max(r, 0.0));
    }
};

namespace detail {
inline double band_value(double eta, double m, double D0) {
    double s = std::sin(eta);
    return (s * s - m) / D0;
}
}  // namespace detail

// Builds the derived constants. Throws NegativeRadicand if D0^2 < 0 and ArgumentOutOfRange if
// eta0 lies outside the oscillation band.
inline HyperGeodesic make_hyper_geodesic(double kappa, double A, double p1t, double p2t, double eta0, int sign, double t = 1.0,
                                         int turns = 0, double zeta10 = 0.0, double zeta20 = 0.0) {
    HyperGeodesic g;
    g.kappa = kappa;
    g.A = A;
    g.psi1_t = p1t;
    g.psi2_t = p2t;
    g.eta0 = eta0;
    g.sign = sign >= 0 ? 1 : -1;
    g.t = t;
    g.turns = turns;
    g.zeta10 = zeta10;
    g.zeta20 = zeta20;
    g.m = 0.5 * (1.0 + p2t * p2t - p1t * p1t);
    double d2 = g.m * g.m - p2t * p2t;
    if (d2 < -1e-13) throw Error(ErrorCode::NegativeRadicand, "D0^2 < 0");
    g.D0 = std::sqrt(std::max(d2, 0.0));
    g.omega = 2.0 * std::sqrt(kappa * A);
    double s0 = std::sin(eta0);
    if (g.D0 < 1e-14 || A <= 0.0) {
        g.degenerate = true;
        if (std::abs(s0 * s0 - g.m) > 1e-10 && A > 0.0)
            throw Error(ErrorCode::DegenerateOscillation, "D0 = 0 but eta0 is off the fixed level");
        g.x0 = 0.0;
        return g;
    }
    double v0 = detail::band_value(eta0, g.m, g.D0);
    if (std::abs(v0) > 1.0 + 1e-10) throw Error(ErrorCode::ArgumentOutOfRange, "eta0 outside the band");
    double a0 = std::asin(std::clamp(v0, -1.0, 1.0));
    g.x0 = g.sign > 0 ? a0 : pi - a0;
    return g;
}

inline HyperGeodesic hyper_geodesic_from_state(const HyperState& s, const HyperModel& model, double t = 1.0) {
    require_chart(s.eta);
    double c = std::cos(s.eta), sn = std::sin(s.eta);
    double A = s.psi1 * s.psi1 / (c * c) + s.psi2 * s.psi2 / (sn * sn) + model.kappa * s.theta * s.theta;
    if (A <= 0.0) return make_hyper_geodesic(model.kappa, 0.0, 0.0, 0.0, s.eta, 1, t, 0, s.zeta1, s.zeta2);
    double r = std::sqrt(A);
    return make_hyper_geodesic(model.kappa, A, s.psi1 / r, s.psi2 / r, s.eta, s.theta >= 0.0 ? 1 : -1, t, 0, s.zeta1, s.zeta2);
}

inline double eta_of_s(const HyperGeodesic& g, double s) {
    if (g.degenerate) return g.eta0;
    double u = g.m + g.D0 * std::sin(g.phase(s));
    return std::asin(std::sqrt(std::clamp(u, 0.0, 1.0)));
}

inline double theta_of_s(const HyperGeodesic& g, double s) {
    if (g.degenerate) return 0.0;
    double eta = eta_of_s(g, s);
    return g.D0 * g.omega * std::cos(g.phase(s)) / (g.kappa * std::sin(2.0 * eta));
}

// Momentum from the energy relation at a given eta; the caller supplies the sign.
inline double theta_at_eta(const HyperGeodesic& g, double eta, int sign) {
    double t = std::tan(eta), t0 = std::tan(g.eta0);
    double p1 = g.psi1(), p2 = g.psi2();
    double th0 = g.theta0();
    double rad = g.kappa * th0 * th0 - p1 * p1 * t * t - p2 * p2 / (t * t) + p1 * p1 * t0 * t0 + p2 * p2 / (t0 * t0);
    if (rad < -1e-12 * std::max(1.0, g.A)) throw Error(ErrorCode::NegativeRadicand, "eta outside the band");
    return (sign >= 0 ? 1.0 : -1.0) * std::sqrt(std::max(rad, 0.0) / g.kappa);
}

namespace detail {

// Number of crossings of x = pi (mod 2 pi): keeps arctan(c tan(x/2) + d) continuous.
inline double half_turns(double x) { return std::floor((x + pi) / (2.0 * pi)); }

inline double F_branch(const HyperGeodesic& g, double x) {
    return std::atan(((1.0 - g.m) * std::tan(0.5 * x) - g.D0) / std::abs(g.psi1_t)) + pi * half_turns(x);
}
inline double G_branch(const HyperGeodesic& g, double x) {
    return std::atan((g.m * std::tan(0.5 * x) + g.D0) / std::abs(g.psi2_t)) + pi * half_turns(x);
}

// True if (xa, xb] contains x* + 2 pi j.
inline bool crosses(double xa, double xb, double xstar) {
    double j = std::ceil((xa - xstar) / (2.0 * pi));
    double first = xstar + 2.0 * pi * j;
    if (first <= xa) first += 2.0 * pi;
    return first <= xb;
}

}  // namespace detail

struct ArctanIntegrals {
    double F = 0.0;  // [F] over [0, s]; int psi~1 sqrt(A) / cos^2 eta = sgn(psi1)/sqrt(kappa) [F]
    double G = 0.0;
};

inline ArctanIntegrals arctan_integrals(const HyperGeodesic& g, double s) {
    ArctanIntegrals r;
    if (g.degenerate) return r;
    const double xa = g.x0, xb = g.phase(s);
    if (g.psi1_t != 0.0) {
        r.F = detail::F_branch(g, xb) - detail::F_branch(g, xa);
    } else if (detail::crosses(xa, xb, pi / 2)) {
        throw Error(ErrorCode::PoleCrossing, "eta reaches pi/2 with psi1 = 0");
    }
    if (g.psi2_t != 0.0) {
        r.G = detail::G_branch(g, xb) - detail::G_branch(g, xa);
    } else if (detail::crosses(xa, xb, -pi / 2)) {
        throw Error(ErrorCode::PoleCrossing, "eta reaches 0 with psi2 = 0");
    }
    return r;
}

inline std::array<double, 2> zeta_of_s(const HyperGeodesic& g, double s) {
    const double p1 = g.psi1(), p2 = g.psi2();
    if (g.degenerate) {
        double t2 = std::tan(g.eta0);
        t2 *= t2;
        return {g.zeta10 + (p1 * t2 + p2) * s, g.zeta20 + (p2 / t2 + p1) * s};
    }
    ArctanIntegrals I = arctan_integrals(g, s);
    const double k = std::sqrt(g.kappa);
    double z1 = (p2 - p1) * s + (g.psi1_t != 0.0 ? sgn(p1) / k * I.F : p1 * s);
    double z2 = (p1 - p2) * s + (g.psi2_t != 0.0 ? sgn(p2) / k * I.G : p2 * s);
    return {g.zeta10 + z1, g.zeta20 + z2};
}

inline HyperState hyper_state_at(const HyperGeodesic& g, double s) {
    auto z = zeta_of_s(g, s);
    return {z[0], z[1], eta_of_s(g, s), g.psi1(), g.psi2(), theta_of_s(g, s)};
}

// A^(n) in its closed form, with the principal arcsin and an explicit 2 pi n offset (kappa = 4 gives 1/(16 t^2)).
inline double branch_constant_A(double eta0, double eta, double p1t, double p2t, double t, int n, double kappa = 4.0) {
    double m = 0.5 * (1.0 + p2t * p2t - p1t * p1t);
    double d2 = m * m - p2t * p2t;
    if (d2 <= 0.0) throw Error(ErrorCode::ArgumentOutOfRange, "D0 = 0");
    double D0 = std::sqrt(d2);
    double v0 = detail::band_value(eta0, m, D0), vt = detail::band_value(eta, m, D0);
    if (std::abs(v0) > 1.0 || std::abs(vt) > 1.0) throw Error(ErrorCode::ArgumentOutOfRange, "arcsin argument outside [-1, 1]");
    double ph = std::asin(vt) - std::asin(v0) + 2.0 * pi * n;
    return ph * ph / (4.0 * kappa * t * t);
}

// Phase advance omega t needed to go from eta0 to eta with the given initial direction after
// passing `turns` turning points. Empty if the band or the ordering forbids it.
inline std::optional<double> phase_advance(double eta0, double eta, double p1t, double p2t, int sign, int turns) {
    double m = 0.5 * (1.0 + p2t * p2t - p1t * p1t);
    double d2 = m * m - p2t * p2t;
    if (!(d2 > 1e-28)) return std::nullopt;
    double D0 = std::sqrt(d2);
    double v0 = detail::band_value(eta0, m, D0), vt = detail::band_value(eta, m, D0);
    if (std::abs(v0) > 1.0 || std::abs(vt) > 1.0) return std::nullopt;
    const int o = sign >= 0 ? 0 : 1;
    double a0 = std::asin(v0), at = std::asin(vt);
    double xs = o * pi + (o == 0 ? a0 : -a0);
    double xe = (turns + o) * pi + ((turns + o) % 2 == 0 ? at : -at);
    double d = xe - xs;
    if (!(d > 0.0)) return std::nullopt;
    return d;
}

// Geodesic from (zeta0, eta0) that reaches eta at time t on branch (sign, turns).
inline std::optional<HyperGeodesic> geodesic_on_branch(const HyperModel& model, double eta0, double eta, double p1t, double p2t,
                                                       int sign, int turns, double t, double zeta10 = 0.0, double zeta20 = 0.0) {
    auto d = phase_advance(eta0, eta, p1t, p2t, sign, turns);
    if (!d) return std::nullopt;
    double sqrtA = *d / (2.0 * std::sqrt(model.kappa) * t);
    try {
        return make_hyper_geodesic(model.kappa, sqrtA * sqrtA, p1t, p2t, eta0, sign, t, turns, zeta10, zeta20);
    } catch (const Error&) {
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------------------------
// Boundary-value problem: find (psi~1, psi~2) on each branch so that the geodesic from
// (zeta0, eta0) hits the target at time t.

struct BvpOptions {
    HyperModel model{};
    int max_turns = 8;
    int grid = 64;
    double residual_tol = 1e-9;
    double merge_tol = 1e-7;
    int newton_iters = 60;
    double zeta10 = 0.0, zeta20 = 0.0;
};

struct HyperGeodesicSolution {
    HyperGeodesic geo;
    double residual = 0.0;
    bool minimizer = false;
};

namespace detail {

struct BvpResidual {
    bool ok = false;
    double r1 = 0.0, r2 = 0.0;
    double norm() const { return std::hypot(r1, r2); }
};

inline BvpResidual bvp_residual(const HyperPoint& target, double eta0, double t, double p1t, double p2t, int sign, int turns,
                                const BvpOptions& o) {
    BvpResidual r;
    auto g = geodesic_on_branch(o.model, eta0, target.eta, p1t, p2t, sign, turns, t, o.zeta10, o.zeta20);
    if (!g) return r;
    try {
        auto z = zeta_of_s(*g, t);
        r.r1 = wrap_angle(z[0] - target.zeta1);
        r.r2 = wrap_angle(z[1] - target.zeta2);
        r.ok = std::isfinite(r.r1) && std::isfinite(r.r2);
    } catch (const Error&) {
        r.ok = false;
    }
    return r;
}

}  // namespace detail

inline std::vector<HyperGeodesicSolution> solve_bvp(const HyperPoint& target, double eta0, double t, const BvpOptions& o = {}) {
    require_chart(target.eta);
    require_chart(eta0);
    const double a1 = std::cos(eta0), a2 = std::sin(eta0);
    const int n = o.grid;
    std::vector<HyperGeodesicSolution> found;
    for (int turns = 0; turns <= o.max_turns; ++turns) {
        for (int sign : {1, -1}) {
            auto res = [&](double p1, double p2) { return detail::bvp_residual(target, eta0, t, p1, p2, sign, turns, o); };
            // Seed grid over the ellipse p1^2/a1^2 + p2^2/a2^2 <= 1 (cell centres).
            std::vector<double> val(n * n, std::numeric_limits<double>::infinity());
            auto coord = [&](int i, double a) { return a * (-1.0 + (2.0 * i + 1.0) / n); };
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double p1 = coord(i, a1), p2 = coord(j, a2);
                    if (p1 * p1 / (a1 * a1) + p2 * p2 / (a2 * a2) > 1.0) continue;
                    auto r = res(p1, p2);
                    if (r.ok) val[i * n + j] = r.norm();
                }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double v = val[i * n + j];
                    if (!std::isfinite(v) || v > 1.0) continue;
                    bool is_min = true;
                    for (int di = -1; di <= 1 && is_min; ++di)
                        for (int dj = -1; dj <= 1; ++dj) {
                            int ii = i + di, jj = j + dj;
                            if ((di || dj) && ii >= 0 && jj >= 0 && ii < n && jj < n && val[ii * n + jj] < v) {
                                is_min = false;
                                break;
                            }
                        }
                    if (!is_min) continue;
                    // Damped Newton with a finite-difference Jacobian.
                    double p1 = coord(i, a1), p2 = coord(j, a2);
                    auto r = res(p1, p2);
                    for (int it = 0; it < o.newton_iters && r.ok && r.norm() > 1e-14; ++it) {
                        const double h = 1e-7;
                        auto r1p = res(p1 + h, p2), r1m = res(p1 - h, p2), r2p = res(p1, p2 + h), r2m = res(p1, p2 - h);
                        if (!(r1p.ok && r1m.ok && r2p.ok && r2m.ok)) break;
                        double J11 = (r1p.r1 - r1m.r1) / (2 * h), J21 = (r1p.r2 - r1m.r2) / (2 * h);
                        double J12 = (r2p.r1 - r2m.r1) / (2 * h), J22 = (r2p.r2 - r2m.r2) / (2 * h);
                        double det = J11 * J22 - J12 * J21;
                        if (!std::isfinite(det) || std::abs(det) < 1e-300) break;
                        double d1 = -(J22 * r.r1 - J12 * r.r2) / det;
                        double d2 = -(-J21 * r.r1 + J11 * r.r2) / det;
                        double lam = 1.0;
                        bool moved = false;
                        for (int k = 0; k < 30; ++k, lam *= 0.5) {
                            auto rn = res(p1 + lam * d1, p2 + lam * d2);
                            if (rn.ok && rn.norm() < r.norm()) {
                                p1 += lam * d1;
                                p2 += lam * d2;
                                r = rn;
                                moved = true;
                                break;
                            }
                        }
                        if (!moved) break;
                    }
                    if (!r.ok || r.norm() > o.residual_tol) continue;
                    auto g = geodesic_on_branch(o.model, eta0, target.eta, p1, p2, sign, turns, t, o.zeta10, o.zeta20);
                    if (!g) continue;
                    // Forward verification of the eta boundary condition.
                    if (std::abs(eta_of_s(*g, t) - target.eta) > o.residual_tol) continue;
                    bool dup = false;
                    for (const auto& s : found)
                        if (s.geo.turns == turns && s.geo.sign == sign && std::abs(s.geo.psi1_t - p1) < o.merge_tol &&
                            std::abs(s.geo.psi2_t - p2) < o.merge_tol)
                            dup = true;
                    if (!dup) found.push_back({*g, r.norm(), false});
                }
        }
    }
    if (found.empty()) throw Error(ErrorCode::NoSolutionInBranchRange, "no geodesic in the searched branch range");
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        if (a.geo.turns != b.geo.turns) return a.geo.turns < b.geo.turns;
        if (a.geo.sign != b.geo.sign) return a.geo.sign > b.geo.sign;
        return a.geo.psi1_t < b.geo.psi1_t;
    });
    auto best = std::min_element(found.begin(), found.end(),
                                 [](const auto& a, const auto& b) { return a.geo.hamiltonian() < b.geo.hamiltonian(); });
    best->minimizer = true;
    return found;
}

}  // namespace s3sr
