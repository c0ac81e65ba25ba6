#pragma once

// Modified action with mixed boundary data (momenta psi, initial eta0, final eta, duration t):
//   g = psi1 z1 + psi2 z2 + (t/2)(A + (psi1 - psi2)^2) - (|psi1| [F] + |psi2| [G]) / sqrt(kappa),
// with A fixed implicitly by the eta boundary condition on the chosen branch.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "error.hpp"
#include "hyper.hpp"
#include "numeric.hpp"

namespace s3sr {

struct ActionBranch {
    int sign = 1;
    int turns = 0;
    std::optional<double> A_hint;  // pick the root closest to this A; smallest A otherwise
};

struct ActionEval {
    double value = 0.0;
    double psi1 = 0.0, psi2 = 0.0, t = 1.0;
    double A = 0.0;
    HyperGeodesic geo;
    std::optional<double> quadrature;  // cross-check value when requested
    bool fallback = false;             // closed form disagreed, quadrature value returned
};

struct ActionOptions {
    HyperModel model{};
    bool cross_check = false;
    bool strict = false;  // throw BranchMismatch instead of falling back
    double check_tol = 1e-7;
    int amplitude_grid = 1500;
};

inline int turning_points_passed(const HyperGeodesic& g, double s) {
    if (g.degenerate) return 0;
    auto count = [](double x) { return std::floor((x - pi / 2) / pi); };
    return int(count(g.phase(s)) - count(g.x0));
}

// All sqrt(A) with 2 sqrt(kappa) t sqrt(A) = phase_advance(psi / sqrt(A)) on the branch.
inline std::vector<double> action_amplitudes(double eta0, double eta, double psi1, double psi2, double t, int sign, int turns,
                                             const HyperModel& model, int grid = 1500) {
    const double k2 = 2.0 * std::sqrt(model.kappa) * t;
    const double c = std::cos(eta0), s = std::sin(eta0);
    const double a_lo = std::sqrt(psi1 * psi1 / (c * c) + psi2 * psi2 / (s * s));
    const double a_hi = (turns + 1) * pi / k2 * (1.0 + 1e-9);
    std::vector<double> out;
    if (a_hi <= a_lo) return out;
    auto F = [&](double a) {
        auto d = phase_advance(eta0, eta, psi1 / a, psi2 / a, sign, turns);
        return d ? k2 * a - *d : std::numeric_limits<double>::quiet_NaN();
    };
    double lo = a_lo > 0.0 ? a_lo * (1.0 + 1e-13) : 1e-300;
    // Quadratic spacing resolves the fast variation near the feasibility edge.
    double x0 = lo, f0 = F(lo);
    for (int i = 1; i <= grid; ++i) {
        double u = double(i) / grid;
        double x1 = lo + (a_hi - lo) * u * u;
        double f1 = F(x1);
        if (std::isfinite(f0) && std::isfinite(f1)) {
            if (f1 == 0.0)
                out.push_back(x1);
            else if (f0 * f1 < 0.0)
                out.push_back(refine_root(F, x0, x1, f0, f1, 1e-16));
        }
        x0 = x1;
        f0 = f1;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) < 1e-13 * std::max(1.0, a); }),
              out.end());
    return out;
}

// Direct quadrature of psi . zeta + int (theta eta' - H) ds along the numerically integrated flow.
inline double action_quadrature(double zeta1, double zeta2, const HyperGeodesic& g, double zeta10 = 0.0, double zeta20 = 0.0) {
    namespace ode = boost::numeric::odeint;
    using St = std::array<double, 2>;  // eta, theta; the zeta equations do not feed back
    const double p1 = g.psi1(), p2 = g.psi2(), k = g.kappa;
    const HyperModel model{k};
    const double H = g.hamiltonian();
    St y{g.eta0, g.theta0()};
    double acc = 0.0;
    using Full = std::array<double, 3>;
    Full yy{y[0], y[1], 0.0};
    auto sys = [&](const Full& v, Full& d, double) {
        HyperState hs{0.0, 0.0, v[0], p1, p2, v[1]};
        HyperState r = hyper_rhs(hs, model);
        d = {r.eta, r.theta, k * v[1] * v[1] - H};
    };
    ode::integrate_adaptive(ode::make_controlled(1e-14, 1e-13, ode::runge_kutta_dopri5<Full>()), sys, yy, 0.0, g.t, 1e-4);
    acc = yy[2];
    return p1 * (zeta1 - zeta10) + p2 * (zeta2 - zeta20) + acc;
}

inline double action_closed_form(double zeta1, double zeta2, const HyperGeodesic& g, double zeta10 = 0.0, double zeta20 = 0.0) {
    const double p1 = g.psi1(), p2 = g.psi2();
    const double lin = p1 * (zeta1 - zeta10) + p2 * (zeta2 - zeta20);
    if (g.degenerate) return lin - g.hamiltonian() * g.t;
    ArctanIntegrals I = arctan_integrals(g, g.t);
    double arct = 0.0;
    if (g.psi1_t != 0.0) arct += std::abs(p1) * I.F;
    if (g.psi2_t != 0.0) arct += std::abs(p2) * I.G;
    return lin + 0.5 * g.t * (g.A + (p1 - p2) * (p1 - p2)) - arct / std::sqrt(g.kappa);
}

inline ActionEval modified_action(double zeta1, double zeta2, double eta0, double eta, double psi1, double psi2, double t,
                                  const ActionBranch& br = {}, const ActionOptions& opt = {}) {
    if (!(t > 0.0)) throw Error(ErrorCode::DomainError, "t must be positive");
    require_chart(eta0);
    require_chart(eta);
    auto roots = action_amplitudes(eta0, eta, psi1, psi2, t, br.sign, br.turns, opt.model, opt.amplitude_grid);
    if (roots.empty()) throw Error(ErrorCode::ArgumentOutOfRange, "no A on this branch");
    double a = roots.front();
    if (br.A_hint) {
        double target = std::sqrt(*br.A_hint);
        a = *std::min_element(roots.begin(), roots.end(),
                              [&](double x, double y) { return std::abs(x - target) < std::abs(y - target); });
    }
    ActionEval ev;
    ev.psi1 = psi1;
    ev.psi2 = psi2;
    ev.t = t;
    ev.A = a * a;
    ev.geo = make_hyper_geodesic(opt.model.kappa, ev.A, psi1 / a, psi2 / a, eta0, br.sign, t, br.turns);
    ev.value = action_closed_form(zeta1, zeta2, ev.geo);
    if (opt.cross_check) {
        ev.quadrature = action_quadrature(zeta1, zeta2, ev.geo);
        if (std::abs(*ev.quadrature - ev.value) > opt.check_tol * std::max(1.0, std::abs(ev.value))) {
            if (opt.strict) throw Error(ErrorCode::BranchMismatch, "closed form and quadrature disagree");
            ev.value = *ev.quadrature;
            ev.fallback = true;
        }
    }
    return ev;
}

inline ActionEval f_action(double zeta1, double zeta2, double eta0, double eta, double psi1, double psi2, const ActionBranch& br = {},
                           const ActionOptions& opt = {}) {
    return modified_action(zeta1, zeta2, eta0, eta, psi1, psi2, 1.0, br, opt);
}

// ---------------------------------------------------------------------------------------------
// Hamilton-Jacobi checks by finite differences. The branch is followed by re-solving A with the
// current A as hint at every stencil point.

struct ActionPoint {
    double zeta1 = 0.0, zeta2 = 0.0, eta0 = pi / 4, eta = pi / 4;
    double psi1 = 0.0, psi2 = 0.0, t = 1.0;
    ActionBranch branch{};
};

struct HJReport {
    double residual = 0.0;      // dg/dt + H(grad g)
    double grad_zeta1 = 0.0;    // dg/dz1 - psi1
    double grad_zeta2 = 0.0;    // dg/dz2 - psi2
    double theta_mismatch = 0.0;  // dg/deta - theta(t)
    double g = 0.0, g_t = 0.0, g_eta = 0.0;
};

namespace detail {

inline double action_at(const ActionPoint& p, double A_hint, const ActionOptions& opt) {
    ActionBranch b = p.branch;
    b.A_hint = A_hint;
    return modified_action(p.zeta1, p.zeta2, p.eta0, p.eta, p.psi1, p.psi2, p.t, b, opt).value;
}

template <class Fn>
double fd(Fn&& f, double x, double h) {
    try {
        return diff_central(f, x, h);
    } catch (const Error& e) {
        throw Error(ErrorCode::StencilOutOfDomain, e.what());
    }
}

template <class Fn>
double fd2(Fn&& f, double x, double h) {
    try {
        return diff2_central(f, x, h);
    } catch (const Error& e) {
        throw Error(ErrorCode::StencilOutOfDomain, e.what());
    }
}

}  // namespace detail

inline HJReport check_hamilton_jacobi(const ActionPoint& p, double h = 1e-5, const ActionOptions& opt = {}) {
    ActionEval base = modified_action(p.zeta1, p.zeta2, p.eta0, p.eta, p.psi1, p.psi2, p.t, p.branch, opt);
    const double A = base.A;
    HJReport r;
    r.g = base.value;
    auto along = [&](auto setter) {
        return [&, setter](double v) {
            ActionPoint q = p;
            setter(q, v);
            return detail::action_at(q, A, opt);
        };
    };
    double gz1 = detail::fd(along([](ActionPoint& q, double v) { q.zeta1 = v; }), p.zeta1, h);
    double gz2 = detail::fd(along([](ActionPoint& q, double v) { q.zeta2 = v; }), p.zeta2, h);
    r.g_eta = detail::fd(along([](ActionPoint& q, double v) { q.eta = v; }), p.eta, h);
    r.g_t = detail::fd(along([](ActionPoint& q, double v) { q.t = v; }), p.t, h);
    HyperState grad{p.zeta1, p.zeta2, p.eta, gz1, gz2, r.g_eta};
    r.residual = r.g_t + hyper_hamiltonian(grad, opt.model);
    r.grad_zeta1 = gz1 - p.psi1;
    r.grad_zeta2 = gz2 - p.psi2;
    r.theta_mismatch = r.g_eta - theta_of_s(base.geo, p.t);
    return r;
}

// psi1 df/dpsi1 + psi2 df/dpsi2 + H(grad f) - f at t = 1.
inline double generalized_hj_residual(ActionPoint p, double h = 1e-5, const ActionOptions& opt = {}) {
    p.t = 1.0;
    ActionEval base = modified_action(p.zeta1, p.zeta2, p.eta0, p.eta, p.psi1, p.psi2, 1.0, p.branch, opt);
    const double A = base.A;
    auto at = [&](auto setter) {
        return [&, setter](double v) {
            ActionPoint q = p;
            setter(q, v);
            return detail::action_at(q, A, opt);
        };
    };
    double f1 = detail::fd(at([](ActionPoint& q, double v) { q.psi1 = v; }), p.psi1, h);
    double f2 = detail::fd(at([](ActionPoint& q, double v) { q.psi2 = v; }), p.psi2, h);
    double fe = detail::fd(at([](ActionPoint& q, double v) { q.eta = v; }), p.eta, h);
    HyperState grad{p.zeta1, p.zeta2, p.eta, p.psi1, p.psi2, fe};
    return p.psi1 * f1 + p.psi2 * f2 + hyper_hamiltonian(grad, opt.model) - base.value;
}

// Stretching: g(psi, t) - lambda g(psi / lambda, lambda t).
inline double stretching_defect(const ActionPoint& p, double lambda, const ActionOptions& opt = {}) {
    ActionEval a = modified_action(p.zeta1, p.zeta2, p.eta0, p.eta, p.psi1, p.psi2, p.t, p.branch, opt);
    ActionBranch b = p.branch;
    b.A_hint = a.A / (lambda * lambda);
    ActionEval c = modified_action(p.zeta1, p.zeta2, p.eta0, p.eta, p.psi1 / lambda, p.psi2 / lambda, lambda * p.t, b, opt);
    return a.value - lambda * c.value;
}

// grad_0 a . grad_0 b for functions of (z1, z2, eta) given their coordinate gradients.
inline double horizontal_dot(const std::array<double, 3>& da, const std::array<double, 3>& db, double eta, const HyperModel& m) {
    double t = std::tan(eta);
    return (t * da[0] + da[1] / t) * (t * db[0] + db[1] / t) + m.kappa * da[2] * db[2];
}

struct TOperatorReport {
    double T_ht = 0.0;        // T_h(h_t)
    double T_h_plus_ht = 0.0; // T_h(h) + h_t
};

// T_h = d/dt + grad_0 h . grad_0 for the modified action h = g(., t) at fixed psi.
inline TOperatorReport check_T_operator(const ActionPoint& p, double h = 1e-4, const ActionOptions& opt = {}) {
    ActionEval base = modified_action(p.zeta1, p.zeta2, p.eta0, p.eta, p.psi1, p.psi2, p.t, p.branch, opt);
    const double A = base.A;
    auto g_at = [&](double eta, double t) {
        ActionPoint q = p;
        q.eta = eta;
        q.t = t;
        return detail::action_at(q, A, opt);
    };
    auto g_t = [&](double eta, double t) { return detail::fd([&](double tt) { return g_at(eta, tt); }, t, h); };
    auto g_eta = [&](double eta, double t) { return detail::fd([&](double e) { return g_at(e, t); }, eta, h); };
    // g is linear in zeta with slopes psi, so h_t has no zeta dependence.
    double ht = g_t(p.eta, p.t);
    double htt = detail::fd2([&](double tt) { return g_at(p.eta, tt); }, p.t, h);
    double ht_eta = detail::fd([&](double e) { return g_t(e, p.t); }, p.eta, h);
    double he = g_eta(p.eta, p.t);
    std::array<double, 3> dh{p.psi1, p.psi2, he};
    std::array<double, 3> dht{0.0, 0.0, ht_eta};
    TOperatorReport r;
    r.T_ht = htt + horizontal_dot(dh, dht, p.eta, opt.model);
    r.T_h_plus_ht = ht + horizontal_dot(dh, dh, p.eta, opt.model) + ht;
    return r;
}

// Characteristic identities for f(tau) = f(psi = (tau, -tau)),
// h(tau) = g(psi = (1, -1), t = tau), both at the same (z, eta) with eta0 = pi/4.
struct CharacteristicReport {
    double item_ii = 0.0;   // f_tau + tau H(grad h) - h
    double item_iii = 0.0;  // f_tau - (tau h_tau + h)
    double item_iv = 0.0;   // T_h(f_tau)
    double item_v = 0.0;    // T_h(f) - (h - tau h_tau)
    double f_tau = 0.0;     // not zero in general; reported
};

inline CharacteristicReport check_characteristic_identities(double zeta1, double zeta2, double eta, double tau, ActionBranch br,
                                                            double h = 1e-4, const ActionOptions& opt = {}) {
    const double eta0 = pi / 4;
    ActionEval fb = modified_action(zeta1, zeta2, eta0, eta, tau, -tau, 1.0, br, opt);
    const double Af = fb.A;  // A of f(tau); h(tau) = g(psi = (1, -1), t = tau) has A_h = A_f / tau^2 by stretching
    auto f_at = [&](double e, double ta) {
        ActionBranch b = br;
        b.A_hint = Af;  // the root moves continuously with tau
        return modified_action(zeta1, zeta2, eta0, e, ta, -ta, 1.0, b, opt).value;
    };
    auto h_at = [&](double e, double ta) {
        ActionBranch b = br;
        b.A_hint = Af / (tau * tau);
        return modified_action(zeta1, zeta2, eta0, e, 1.0, -1.0, ta, b, opt).value;
    };
    auto d_tau = [&](auto&& fn, double e, double ta) { return detail::fd([&](double x) { return fn(e, x); }, ta, h); };
    auto d_eta = [&](auto&& fn, double e, double ta) { return detail::fd([&](double x) { return fn(x, ta); }, e, h); };
    double hv = h_at(eta, tau);
    double h_tau = d_tau(h_at, eta, tau);
    double h_eta = d_eta(h_at, eta, tau);
    double f_tau = d_tau(f_at, eta, tau);
    double f_eta = d_eta(f_at, eta, tau);
    double f_tau_eta = d_eta([&](double e, double ta) { return d_tau(f_at, e, ta); }, eta, tau);
    double f_tau_tau = detail::fd2([&](double x) { return f_at(eta, x); }, tau, h);
    std::array<double, 3> dh{1.0, -1.0, h_eta};
    std::array<double, 3> df{tau, -tau, f_eta};
    std::array<double, 3> dft{1.0, -1.0, f_tau_eta};
    HyperState gh{zeta1, zeta2, eta, 1.0, -1.0, h_eta};
    CharacteristicReport r;
    r.f_tau = f_tau;
    r.item_ii = f_tau + tau * hyper_hamiltonian(gh, opt.model) - hv;
    r.item_iii = f_tau - (tau * h_tau + hv);
    // The zeta-dependence of f_tau is linear with slopes (1, -1).
    r.item_iv = f_tau_tau + horizontal_dot(dh, dft, eta, opt.model);
    r.item_v = f_tau + horizontal_dot(dh, df, eta, opt.model) - (hv - tau * h_tau);
    return r;
}

// ---------------------------------------------------------------------------------------------
// Distance via critical points of f in psi.

struct DistanceResult {
    double distance = 0.0;  // f at the selected critical point
    double length_scale = 0.0;  // sqrt(2 f)
    double psi1 = 0.0, psi2 = 0.0;
    double H = 0.0;
    int sign = 1, turns = 0;
    HyperGeodesic geo;
    double bvp_residual = 0.0;
    double critical_residual = 0.0;  // |grad_psi f| by finite differences
    std::size_t critical_points = 0;
};

struct DistanceOptions {
    BvpOptions bvp{};
    double fd_step = 1e-6;
};

inline DistanceResult distance(const HyperPoint& target, double eta0 = pi / 4, const DistanceOptions& opt = {}) {
    require_chart(target.eta);
    const double z10 = opt.bvp.zeta10, z20 = opt.bvp.zeta20;
    DistanceResult out;
    double dz1 = wrap_angle(target.zeta1 - z10), dz2 = wrap_angle(target.zeta2 - z20);
    if (std::abs(target.eta - eta0) < 1e-12 && std::abs(dz1) < 1e-12 && std::abs(dz2) < 1e-12) return out;
    if (std::abs(target.eta - eta0) < 1e-12 && std::abs(wrap_angle(dz1 + dz2)) < 1e-12)
        throw Error(ErrorCode::VerticalLineTarget, "target on the vertical line through the base point");
    std::vector<HyperGeodesicSolution> sols;
    try {
        sols = solve_bvp(target, eta0, 1.0, opt.bvp);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NoSolutionInBranchRange) throw Error(ErrorCode::NoCriticalPointFound, e.what());
        throw;
    }
    const HyperGeodesicSolution* best = nullptr;
    for (const auto& s : sols)
        if (s.minimizer) best = &s;
    const HyperGeodesic& g = best->geo;
    // Lift of the target zeta along the geodesic: f is linear in zeta and the critical
    // equations say zeta(1) equals the target on this lift.
    auto z = zeta_of_s(g, 1.0);
    const double p1 = g.psi1(), p2 = g.psi2();
    ActionOptions aopt;
    aopt.model = opt.bvp.model;
    auto f_of = [&](double q1, double q2) {
        ActionBranch b{g.sign, g.turns, g.A};
        return modified_action(z[0], z[1], eta0, target.eta, q1, q2, 1.0, b, aopt).value;
    };
    out.distance = action_closed_form(z[0], z[1], g, z10, z20);
    out.length_scale = std::sqrt(2.0 * std::max(out.distance, 0.0));
    out.psi1 = p1;
    out.psi2 = p2;
    out.H = g.hamiltonian();
    out.sign = g.sign;
    out.turns = g.turns;
    out.geo = g;
    out.bvp_residual = best->residual;
    out.critical_points = sols.size();
    try {
        const double h = opt.fd_step;
        double d1 = (f_of(p1 + h, p2) - f_of(p1 - h, p2)) / (2 * h);
        double d2 = (f_of(p1, p2 + h) - f_of(p1, p2 - h)) / (2 * h);
        out.critical_residual = std::hypot(d1, d2);
    } catch (const Error&) {
        out.critical_residual = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Restriction to the characteristic variety psi = (tau, -tau) at eta0 = pi/4, t = 1.

namespace detail {

// Continuous arctan(c tan x) with value 0 at x = 0 (c > 0 assumed; odd in c).
inline double tracked_arctan(double x, double c) {
    double n = std::round(x / pi);
    double r = x - n * pi;
    return sgn(c) * n * pi + std::atan(c * std::tan(r));
}

}  // namespace detail

// First sqrt(A) > 2|tau| solving sin^2 eta = 1/2 + sin(2 sqrt(kappa A)) sqrt(1/4 - tau^2/A).
inline double restricted_first_root(double tau, double eta, const HyperModel& model = {}) {
    require_chart(eta);
    const double c = std::sin(eta) * std::sin(eta) - 0.5;
    const double k2 = 2.0 * std::sqrt(model.kappa);
    // |sin| <= 1 forces sqrt(1/4 - tau^2/A) >= |c| at a root, which gives the scan start.
    const double lo = c * c < 0.25 ? std::abs(tau) / std::sqrt(0.25 - c * c) : 2.0 * std::abs(tau);
    auto F = [&](double a) {
        double r = 0.25 - tau * tau / (a * a);
        return std::sin(k2 * a) * std::sqrt(std::max(r, 0.0)) - c;
    };
    auto dF = [&](double a) {
        double r = std::sqrt(std::max(0.25 - tau * tau / (a * a), 1e-300));
        return k2 * std::cos(k2 * a) * r + std::sin(k2 * a) * tau * tau / (a * a * a * r);
    };
    const double period = 2.0 * pi / k2;
    const double step = period / 16.0;  // at most one extremum of F per step
    double x0 = lo > 0.0 ? std::max(2.0 * std::abs(tau) * (1.0 + 1e-14), lo * (1.0 - 1e-9)) : 1e-12;
    double f0 = F(x0), d0 = dF(x0);
    for (int i = 1; i < 16 * 4000; ++i) {
        double x1 = x0 + step;
        double f1 = F(x1), d1 = dF(x1);
        if (f1 == 0.0) return x1;
        if (f0 * f1 < 0.0) return refine_root(F, x0, x1, f0, f1, 1e-16);
        // A near-tangent pair of roots can sit between two samples: look at the extremum.
        if (d0 * d1 < 0.0) {
            double xe = refine_root(dF, x0, x1, d0, d1, 1e-16);
            double fe = F(xe);
            if (fe == 0.0) return xe;
            if (fe * f0 < 0.0) return refine_root(F, x0, xe, f0, fe, 1e-16);
        }
        x0 = x1;
        f0 = f1;
        d0 = d1;
    }
    throw Error(ErrorCode::NoRootInBranch, "no first root for the restricted action");
}

// Candidate pole locations tau = +-(pi + 2 pi n) sin 2eta / (8 sqrt(kappa)) kept when the first
// root actually sits on a tangent pole there.
inline std::vector<double> restricted_action_poles(double eta, int n_max, const HyperModel& model = {}) {
    std::vector<double> out;
    const double k2 = 2.0 * std::sqrt(model.kappa);
    for (int n = 0; n <= n_max; ++n) {
        double tau = (pi + 2.0 * pi * n) * std::sin(2.0 * eta) / (4.0 * k2);
        double a = restricted_first_root(tau, eta, model);
        if (std::abs(std::cos(k2 * a)) < 1e-6) {
            out.push_back(-tau);
            out.push_back(tau);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline double pole_candidate(double eta, int n, const HyperModel& model = {}) {
    return (pi + 2.0 * pi * n) * std::sin(2.0 * eta) / (8.0 * std::sqrt(model.kappa));
}

struct RestrictedAction {
    double value = 0.0;
    double A = 0.0;
    double tracked = 0.0;  // same expression with the branch-tracked arctan
};

// The displayed restricted action with the principal arctan; coefficient 1/sqrt(kappa).
inline RestrictedAction restricted_action(double tau, double zeta1, double zeta2, double eta, const HyperModel& model = {},
                                          double pole_tol = 1e-9, int n_poles = 64) {
    const double k = std::sqrt(model.kappa);
    // Poles of the principal arctan along the first branch.
    for (int n = 0; n <= n_poles; ++n) {
        double pc = pole_candidate(eta, n, model);
        if (pc > std::abs(tau) + 1.0) break;
        if (std::abs(std::abs(tau) - pc) < pole_tol) {
            double a = restricted_first_root(pc, eta, model);
            if (std::abs(std::cos(2.0 * k * a)) < 1e-6) throw Error(ErrorCode::SingularTau, "tau at a pole of the restricted action");
        }
    }
    RestrictedAction r;
    const double a = restricted_first_root(tau, eta, model);
    r.A = a * a;
    const double x = 2.0 * k * a;
    const double base = tau * (zeta1 - zeta2) + 0.5 * r.A + 2.0 * tau * tau;
    const double c = 2.0 * tau / a;
    r.value = base - tau / k * std::atan(c * std::tan(x));
    r.tracked = base - tau / k * (tau == 0.0 ? 0.0 : detail::tracked_arctan(x, c));
    return r;
}

}  // namespace s3sr
