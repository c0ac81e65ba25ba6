#pragma once

// Heat-kernel and Green-function machinery at the base point (0, 0, pi/4) on the characteristic
// line psi = (tau, -tau).
//
// Two versions of f(tau) appear here. The displayed restricted action with the principal arctan
// (restricted_action in action.hpp) is what the kernel integral runs over. The transport
// operators need f smooth in (tau, delta, eta), so they use the branch-tracked action on a fixed
// branch m of the theta0 equation (kernel_action below).

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <unsupported/Eigen/Splines>

#include "action.hpp"
#include "error.hpp"
#include "hyper.hpp"
#include "numeric.hpp"

namespace s3sr {

// ---------------------------------------------------------------------------------------------
// theta0 equation: cos 2eta = -beta sin Omega with A = 4 tau^2 + kappa theta0^2,
// beta = sqrt(kappa theta0^2 / A), Omega = 2 sqrt(kappa A). For kappa = 4 this reads
// cos 2eta = -sqrt(theta0^2 / (tau^2 + theta0^2)) sin 8 sqrt(tau^2 + theta0^2).

inline double theta0_equation_residual(double tau, double eta, double theta0, const HyperModel& model = {}) {
    double A = 4.0 * tau * tau + model.kappa * theta0 * theta0;
    if (A <= 0.0) return std::cos(2.0 * eta);
    double beta = std::sqrt(model.kappa * theta0 * theta0 / A);
    return std::cos(2.0 * eta) + beta * std::sin(2.0 * std::sqrt(model.kappa * A));
}

// Branch m: the root with Omega in [(m - 1/2) pi, (m + 1/2) pi] and Omega > 4 sqrt(kappa)|tau|.
// Returns theta0 >= 0 (the (+) sign of the eta solution).
inline double theta0_solve(double tau, double eta, int m, const HyperModel& model = {}) {
    require_chart(eta);
    if (m < 0) throw Error(ErrorCode::NoRootInBranch, "branch index must be non-negative");
    const double k = model.kappa, rk = std::sqrt(k);
    const double c2 = std::cos(2.0 * eta);
    const double om_min = 4.0 * rk * std::abs(tau);
    double lo = std::max((m - 0.5) * pi, om_min);
    double hi = (m + 0.5) * pi;
    if (!(hi > lo)) throw Error(ErrorCode::NoRootInBranch, "branch window empty for this tau");
    auto F = [&](double om) {
        double A = om * om / (4.0 * k);
        double beta = std::sqrt(std::max(0.0, 1.0 - 4.0 * tau * tau / A));
        return c2 + beta * std::sin(om);
    };
    auto roots = grid_roots(F, lo, hi, 256, 1e-16);
    if (roots.empty()) throw Error(ErrorCode::NoRootInBranch, "theta0 equation has no root on this branch");
    double om = roots.front();
    double A = om * om / (4.0 * k);
    double th = std::sqrt(std::max(0.0, (A - 4.0 * tau * tau) / k));
    if (std::abs(theta0_equation_residual(tau, eta, th, model)) > 1e-10)
        throw Error(ErrorCode::NoRootInBranch, "theta0 back-substitution failed");
    return th;
}

struct ThetaData {
    double A = 0.0, beta = 0.0, Omega = 0.0;
    double theta = 0.0;  // end momentum d f / d eta
};

inline ThetaData theta_data(double tau, double eta, double theta0, const HyperModel& model = {}) {
    ThetaData d;
    d.A = 4.0 * tau * tau + model.kappa * theta0 * theta0;
    d.beta = std::sqrt(model.kappa * theta0 * theta0 / d.A);
    d.Omega = 2.0 * std::sqrt(model.kappa * d.A);
    d.theta = std::abs(theta0) * std::cos(d.Omega) / std::sin(2.0 * eta);
    return d;
}

// theta(eta)^2 = theta0^2 - (4/kappa) tau^2 cot^2 2eta.
inline double theta_squared(double tau, double eta, double theta0, const HyperModel& model = {}) {
    double ct = 1.0 / std::tan(2.0 * eta);
    return theta0 * theta0 - 4.0 / model.kappa * tau * tau * ct * ct;
}

// d(theta0^2)/d eta along the theta0 equation.
inline double dtheta0sq_deta(double tau, double eta, double theta0, const HyperModel& model = {}) {
    const double k = model.kappa;
    ThetaData d = theta_data(tau, eta, theta0, model);
    double dbeta = 2.0 * k * tau * tau / (d.beta * d.A * d.A);
    double G = dbeta * std::sin(d.Omega) + d.beta * std::cos(d.Omega) * k * std::sqrt(k) / std::sqrt(d.A);
    return 2.0 * std::sin(2.0 * eta) / G;
}

// The eta-second-order part of 1/2 (X^2 + Y^2) f, i.e. (kappa/2) d theta / d eta.
inline double delta_x_f(double tau, double eta, double theta0, const HyperModel& model = {}) {
    require_chart(eta);
    const double k = model.kappa;
    ThetaData d = theta_data(tau, eta, theta0, model);
    if (std::abs(d.theta) < 1e-9) throw Error(ErrorCode::TurningPoint, "theta(eta) vanishes");
    double s2 = std::sin(2.0 * eta);
    double extra = 16.0 / k * tau * tau * std::cos(2.0 * eta) / (s2 * s2 * s2);
    return 0.5 * k * (dtheta0sq_deta(tau, eta, theta0, model) + extra) / (2.0 * d.theta);
}

// The same quantity in the displayed kappa = 4 form, with the sign fixed by
// |theta0| cos 8r = pm cos 2eta sqrt(theta0^2 tan^2 2eta - tau^2).
inline double delta_x_f_displayed(double tau, double eta, double theta0) {
    const double r = std::sqrt(tau * tau + theta0 * theta0);
    const double t2 = std::tan(2.0 * eta), c2 = std::cos(2.0 * eta), s2 = std::sin(2.0 * eta);
    const double rad = std::sqrt(std::max(0.0, theta0 * theta0 * t2 * t2 - tau * tau));
    const double pm = sgn(std::abs(theta0) * std::cos(8.0 * r) * c2) >= 0.0 ? 1.0 : -1.0;
    const double th = std::abs(theta0) * std::cos(8.0 * r) / s2;
    if (std::abs(th) < 1e-9) throw Error(ErrorCode::TurningPoint, "theta(eta) vanishes");
    double dth0 = 4.0 * r * r * t2 / (pm * 8.0 * rad - tau * tau / (theta0 * theta0));
    return (4.0 * tau * tau * c2 / (s2 * s2 * s2) + dth0) / th;
}

// ---------------------------------------------------------------------------------------------
// Branch-tracked f on theta0 branch m.

struct KernelAction {
    double value = 0.0;
    double A = 0.0;
    double theta0 = 0.0;
    double theta = 0.0;  // d f / d eta
};

inline KernelAction kernel_action(double tau, double delta, double eta, int m, const HyperModel& model = {}) {
    KernelAction r;
    r.theta0 = theta0_solve(tau, eta, m, model);
    ThetaData d = theta_data(tau, eta, r.theta0, model);
    r.A = d.A;
    r.theta = d.theta;
    if (tau == 0.0) {
        r.value = 0.5 * r.A;
        return r;
    }
    const double a = std::sqrt(r.A);
    HyperGeodesic g = make_hyper_geodesic(model.kappa, r.A, tau / a, -tau / a, pi / 4, 1, 1.0, 0);
    g.turns = turning_points_passed(g, 1.0);
    r.value = action_closed_form(delta, 0.0, g);
    return r;
}

// Full 1/2 (X^2 + Y^2) f in closed form: delta_x_f plus the first-order eta term.
inline double half_sublaplacian_f(double tau, double eta, int m, const HyperModel& model = {}) {
    double th0 = theta0_solve(tau, eta, m, model);
    ThetaData d = theta_data(tau, eta, th0, model);
    return delta_x_f(tau, eta, th0, model) + std::sqrt(model.kappa) / std::tan(2.0 * eta) * d.theta;
}

// ---------------------------------------------------------------------------------------------
// Horizontal derivatives by central differences along the X, Y flows.

using PointFn = std::function<double(const HyperPoint&)>;

inline HyperPoint flow_hyper(const HyperPoint& p, bool use_x, double s, const HyperModel& model = {}) {
    auto field = [&](const HyperPoint& q) { return use_x ? hyper_field_X(q, model) : hyper_field_Y(q, model); };
    auto add = [](const HyperPoint& q, const std::array<double, 3>& v, double c) {
        return HyperPoint{q.zeta1 + c * v[0], q.zeta2 + c * v[1], q.eta + c * v[2]};
    };
    const int n = 2;
    const double h = s / n;
    HyperPoint q = p;
    for (int i = 0; i < n; ++i) {
        auto k1 = field(q);
        auto k2 = field(add(q, k1, h / 2));
        auto k3 = field(add(q, k2, h / 2));
        auto k4 = field(add(q, k3, h));
        for (int j = 0; j < 3; ++j) k1[j] = (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]) / 6.0;
        q = add(q, k1, h);
    }
    return q;
}

struct FlowDiff {
    double h = 1e-4;
    HyperModel model{};

    double first(const PointFn& w, const HyperPoint& p, bool use_x) const {
        return (w(flow_hyper(p, use_x, h, model)) - w(flow_hyper(p, use_x, -h, model))) / (2 * h);
    }
    double second(const PointFn& w, const HyperPoint& p, bool use_x) const {
        return (w(flow_hyper(p, use_x, h, model)) - 2 * w(p) + w(flow_hyper(p, use_x, -h, model))) / (h * h);
    }
    // X^2 + Y^2
    double sublaplacian(const PointFn& w, const HyperPoint& p) const { return second(w, p, true) + second(w, p, false); }
    double grad_dot(const PointFn& a, const PointFn& b, const HyperPoint& p) const {
        return first(a, p, true) * first(b, p, true) + first(a, p, false) * first(b, p, false);
    }
};

// ---------------------------------------------------------------------------------------------
// Transport residuals.

// V(s, point) where s is tau (heat) or t (Green).
using VolumeFn = std::function<double(double, const HyperPoint&)>;

struct VolumeCandidate {
    VolumeFn value;
};

inline VolumeCandidate constant_volume(double c = 1.0) {
    return {[c](double, const HyperPoint&) { return c; }};
}

struct TransportOptions {
    double q = 2.0;
    int branch = 1;
    HyperModel model{};
    double flow_step = 1e-4;
    double s_step = 1e-4;
};

// ((q - 2) - (tau T_h + Delta_X f)) V_tau + f_tau Delta_X V with Delta_X = 1/2 (X^2 + Y^2),
// T_h = d/dtau + grad_0 h . grad_0 and h = f / tau.
inline double heat_transport_residual(const VolumeCandidate& V, const HyperPoint& p, double tau, const TransportOptions& o = {}) {
    FlowDiff D{o.flow_step, o.model};
    const double ht = o.s_step;
    auto fq = [&](double ta, const HyperPoint& q) { return kernel_action(ta, q.zeta1 - q.zeta2, q.eta, o.branch, o.model).value; };
    PointFn f_at = [&](const HyperPoint& q) { return fq(tau, q); };
    PointFn h_at = [&](const HyperPoint& q) { return fq(tau, q) / tau; };
    PointFn v_at = [&](const HyperPoint& q) { return V.value(tau, q); };
    PointFn vt_at = [&](const HyperPoint& q) { return (V.value(tau + ht, q) - V.value(tau - ht, q)) / (2 * ht); };
    double vt = vt_at(p);
    double vtt = (V.value(tau + ht, p) - 2 * V.value(tau, p) + V.value(tau - ht, p)) / (ht * ht);
    double f_tau = (fq(tau + ht, p) - fq(tau - ht, p)) / (2 * ht);
    double lxf = 0.5 * D.sublaplacian(f_at, p);
    double lxv = 0.5 * D.sublaplacian(v_at, p);
    double grad = D.grad_dot(h_at, vt_at, p);
    return (o.q - 2.0 - lxf) * vt - tau * (vtt + grad) + f_tau * lxv;
}

// Green side: g(t) = f(psi1 t) / t on branch m, E = -g_t, Delta_X = X^2 + Y^2.
inline double green_action(double t, const HyperPoint& p, double psi1, const TransportOptions& o = {}) {
    return kernel_action(psi1 * t, p.zeta1 - p.zeta2, p.eta, o.branch, o.model).value / t;
}

// E - H(grad g), every derivative by finite differences.
inline double green_energy_identity(const HyperPoint& p, double t, double psi1, const TransportOptions& o = {}) {
    const double h = 1e-5;
    auto g = [&](double tt, HyperPoint q) { return green_action(tt, q, psi1, o); };
    double E = -(g(t + h, p) - g(t - h, p)) / (2 * h);
    auto shifted = [&](int i, double d) {
        HyperPoint q = p;
        (i == 0 ? q.zeta1 : i == 1 ? q.zeta2 : q.eta) += d;
        return g(t, q);
    };
    HyperState s{p.zeta1, p.zeta2, p.eta, (shifted(0, h) - shifted(0, -h)) / (2 * h), (shifted(1, h) - shifted(1, -h)) / (2 * h),
                 (shifted(2, h) - shifted(2, -h)) / (2 * h)};
    return E - hyper_hamiltonian(s, o.model);
}

// E Delta_X W + (T_g + Delta_X g) W_t with T_g = d/dt + grad_0 g . grad_0.
inline double green_transport_residual(const VolumeCandidate& W, const HyperPoint& p, double t, double psi1,
                                       const TransportOptions& o = {}) {
    FlowDiff D{o.flow_step, o.model};
    const double ht = o.s_step;
    PointFn g_at = [&](const HyperPoint& q) { return green_action(t, q, psi1, o); };
    PointFn w_at = [&](const HyperPoint& q) { return W.value(t, q); };
    PointFn wt_at = [&](const HyperPoint& q) { return (W.value(t + ht, q) - W.value(t - ht, q)) / (2 * ht); };
    double E = -(green_action(t + ht, p, psi1, o) - green_action(t - ht, p, psi1, o)) / (2 * ht);
    double wt = wt_at(p);
    double wtt = (W.value(t + ht, p) - 2 * W.value(t, p) + W.value(t - ht, p)) / (ht * ht);
    return E * D.sublaplacian(w_at, p) + wtt + D.grad_dot(g_at, wt_at, p) + D.sublaplacian(g_at, p) * wt;
}

// ---------------------------------------------------------------------------------------------
// Kernel quadrature over the principal restricted action.

struct KernelConfig {
    double u = 1.0;
    double q = 2.0;
    double C_norm = 1.0;
    double tau_truncation = 0.0;  // 0: 12 sqrt(u) max(1, sin 2eta)
    double pole_exclusion = 1e-6;
    double rtol = 1e-8;
    bool check_convergence = true;
    HyperModel model{};
};

struct KernelResult {
    double value = 0.0;
    double error_estimate = 0.0;
    double truncation = 0.0;
    int pole_count = 0;
    double window_change = 0.0;     // relative change against half the window
    double exclusion_change = 0.0;  // relative change with half the pole exclusion
    std::vector<double> poles;
    std::vector<double> jumps;
};

inline double default_truncation(double u, double eta) { return 12.0 * std::sqrt(u) * std::max(1.0, std::sin(2.0 * eta)); }

// Jumps of the first root sqrt(A(tau)) on (0, T], mirrored to negative tau.
inline std::vector<double> restricted_root_jumps(double eta, double T, const HyperModel& model = {}) {
    std::vector<double> out;
    const double step = 1e-3;
    double t0 = step * 0.5, a0 = restricted_first_root(t0, eta, model);
    for (double t1 = t0 + step; t1 <= T + step; t1 += step) {
        double a1 = restricted_first_root(t1, eta, model);
        if (std::abs(a1 - a0) > 0.1) {
            double lo = t0, hi = t1, alo = a0;
            for (int i = 0; i < 60 && hi - lo > 1e-14; ++i) {
                double mid = 0.5 * (lo + hi);
                double am = restricted_first_root(mid, eta, model);
                if (std::abs(am - alo) < 0.5 * std::abs(a1 - a0)) {
                    lo = mid;
                    alo = am;
                } else {
                    hi = mid;
                }
            }
            double j = 0.5 * (lo + hi);
            if (j <= T) {
                out.push_back(j);
                out.push_back(-j);
            }
        }
        t0 = t1;
        a0 = a1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Poles within |tau| <= T where the first root sits on a tangent pole.
inline std::vector<double> restricted_poles_within(double eta, double T, const HyperModel& model = {}) {
    std::vector<double> out;
    for (int n = 0;; ++n) {
        double pc = pole_candidate(eta, n, model);
        if (pc > T) break;
        double a = restricted_first_root(pc, eta, model);
        if (std::abs(std::cos(2.0 * std::sqrt(model.kappa) * a)) < 1e-6) {
            out.push_back(pc);
            out.push_back(-pc);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct KernelPanel {
    double a = 0.0, b = 0.0;
};

inline std::vector<KernelPanel> kernel_panels(double T, const std::vector<double>& poles, const std::vector<double>& jumps, double excl) {
    struct Cut {
        double x, half;
    };
    std::vector<Cut> cuts;
    for (double p : poles) cuts.push_back({p, excl});
    for (double j : jumps) cuts.push_back({j, 0.0});
    std::sort(cuts.begin(), cuts.end(), [](const Cut& l, const Cut& r) { return l.x < r.x; });
    std::vector<KernelPanel> out;
    double a = -T;
    for (const Cut& c : cuts) {
        if (c.x - c.half > a) out.push_back({a, c.x - c.half});
        a = std::max(a, c.x + c.half);
    }
    if (T > a) out.push_back({a, T});
    return out;
}

namespace detail {

// Derivative of a function that is smooth on (a, b) but may jump, or have a square-root
// singularity, at the ends. Central differences with h = 1e-5 in the interior and a step that
// shrinks with the distance to the nearest end, so the stencil never leaves the panel.
template <class F>
double panel_derivative(F&& f, double x, double a, double b) {
    const double h = 1e-5, floor = 1e-12;
    double d = std::min(x - a, b - x);
    if (d < floor) {
        x = (x - a < b - x) ? a + floor : b - floor;
        d = floor;
    }
    double hh = std::min(h, 0.5 * d);
    return (f(x + hh) - f(x - hh)) / (2 * hh);
}

}  // namespace detail

// Panels are integrated with tanh-sinh: the small-root side of a jump of A(tau) has a square-root
// endpoint singularity in f_tau that Gauss-Kronrod resolves only very slowly.
inline QuadResult kernel_integral(const KernelConfig& cfg, const HyperPoint& p, const VolumeCandidate& V, double T,
                                  const std::vector<double>& poles, const std::vector<double>& jumps, double excl) {
    auto f = [&](double tau) { return restricted_action(tau, p.zeta1, p.zeta2, p.eta, cfg.model, 0.0).value; };
    boost::math::quadrature::tanh_sinh<double> ts(10);
    QuadResult total;
    auto panels = kernel_panels(T, poles, jumps, excl);
    // Coarse scale of each panel from e^{-f/u} |V| on a few samples; panels far below double
    // precision relative to the largest one are skipped.
    std::vector<double> scale_of(panels.size(), 0.0);
    double biggest = 0.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
        const KernelPanel& pn = panels[i];
        for (int k = 1; k <= 16; ++k) {
            double tau = pn.a + (pn.b - pn.a) * k / 17.0;
            double fv = f(tau);
            double w = fv / cfg.u > 745.0 ? 0.0 : std::exp(-fv / cfg.u) * std::abs(V.value(tau, p));
            scale_of[i] = std::max(scale_of[i], w * (pn.b - pn.a));
        }
        biggest = std::max(biggest, scale_of[i]);
    }
    for (std::size_t i = 0; i < panels.size(); ++i) {
        const KernelPanel& pn = panels[i];
        if (scale_of[i] < 1e-20 * biggest) continue;
        // Two-argument form: tanh-sinh may sample at distance ~1e-16 from the ends.
        auto integrand = [&](double tau, double) {
            double fv = f(tau);
            if (fv / cfg.u > 745.0) return 0.0;
            return std::exp(-fv / cfg.u) * V.value(tau, p) * detail::panel_derivative(f, tau, pn.a, pn.b);
        };
        double err = 0.0;
        double v = ts.integrate(integrand, pn.a, pn.b, 1e-10, &err);
        total.value += v;
        total.error += err;
    }
    double scale = cfg.C_norm / std::pow(cfg.u, cfg.q);
    total.value *= scale;
    total.error *= std::abs(scale);
    return total;
}

inline KernelResult kernel_quadrature(const KernelConfig& cfg, const HyperPoint& p, const VolumeCandidate& V = constant_volume()) {
    if (!(cfg.u > 0.0)) throw Error(ErrorCode::DomainError, "u must be positive");
    require_chart(p.eta);
    KernelResult r;
    r.truncation = cfg.tau_truncation > 0.0 ? cfg.tau_truncation : default_truncation(cfg.u, p.eta);
    r.poles = restricted_poles_within(p.eta, r.truncation, cfg.model);
    r.jumps = restricted_root_jumps(p.eta, r.truncation, cfg.model);
    r.pole_count = int(r.poles.size());
    QuadResult full = kernel_integral(cfg, p, V, r.truncation, r.poles, r.jumps, cfg.pole_exclusion);
    r.value = full.value;
    r.error_estimate = full.error;
    auto rel = [&](double other) { return std::abs(other - full.value) / std::max(std::abs(full.value), 1e-300); };
    if (cfg.check_convergence) {
        double Th = 0.5 * r.truncation;
        auto within = [&](const std::vector<double>& v) {
            std::vector<double> o;
            for (double x : v)
                if (std::abs(x) < Th) o.push_back(x);
            return o;
        };
        QuadResult half = kernel_integral(cfg, p, V, Th, within(r.poles), within(r.jumps), cfg.pole_exclusion);
        r.window_change = rel(half.value);
        QuadResult ex = kernel_integral(cfg, p, V, r.truncation, r.poles, r.jumps, 0.5 * cfg.pole_exclusion);
        r.exclusion_change = rel(ex.value);
        if (r.window_change > cfg.rtol) throw Error(ErrorCode::NonConvergent, "kernel integral depends on the truncation window");
    }
    return r;
}

// Exact value for V = 1: e^{-f/u} f_tau is a derivative, so each panel contributes -u [e^{-f/u}].
inline double kernel_unit_volume_exact(const KernelConfig& cfg, const HyperPoint& p, double T, double excl) {
    auto poles = restricted_poles_within(p.eta, T, cfg.model);
    auto jumps = restricted_root_jumps(p.eta, T, cfg.model);
    double sum = 0.0;
    for (const KernelPanel& pn : kernel_panels(T, poles, jumps, excl)) {
        // Evaluate just inside the panel so one-sided limits are taken at jump points.
        double ea = pn.a + 1e-12 * std::max(1.0, std::abs(pn.a)), eb = pn.b - 1e-12 * std::max(1.0, std::abs(pn.b));
        auto e = [&](double tau) { return std::exp(-restricted_action(tau, p.zeta1, p.zeta2, p.eta, cfg.model, 0.0).value / cfg.u); };
        sum += -cfg.u * (e(eb) - e(ea));
    }
    return sum * cfg.C_norm / std::pow(cfg.u, cfg.q);
}

// Tail threshold: beyond it f >= (2 - eps) tau^2 follows from A >= 4 tau^2 and |arctan| <= pi/2.
inline double restricted_tail_threshold(double zeta1, double zeta2, double eps = 0.1, const HyperModel& model = {}) {
    double lin = std::abs(zeta1 - zeta2) + pi / (2.0 * std::sqrt(model.kappa));
    return lin / (2.0 + eps);
}

// ---------------------------------------------------------------------------------------------
// Green quadrature: integral of W E / g dt with g(t) = f(psi1 t) / t from the principal action.

struct GreenConfig {
    double psi1 = 1.0;
    double t_min = 0.05, t_max = 8.0;
    HyperModel model{};
};

inline QuadResult green_quadrature(const GreenConfig& cfg, const HyperPoint& p, const VolumeCandidate& W) {
    require_chart(p.eta);
    auto g = [&](double t) { return restricted_action(cfg.psi1 * t, p.zeta1, p.zeta2, p.eta, cfg.model, 0.0).value / t; };
    double T = std::abs(cfg.psi1) * cfg.t_max;
    auto poles = restricted_poles_within(p.eta, T, cfg.model);
    auto jumps = restricted_root_jumps(p.eta, T, cfg.model);
    std::vector<double> cuts;
    for (double x : poles)
        if (x > 0) cuts.push_back(x / std::abs(cfg.psi1));
    for (double x : jumps)
        if (x > 0) cuts.push_back(x / std::abs(cfg.psi1));
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> edges{cfg.t_min};
    for (double c : cuts)
        if (c > cfg.t_min && c < cfg.t_max) edges.push_back(c);
    edges.push_back(cfg.t_max);
    QuadResult total;
    const double excl = 1e-6;
    boost::math::quadrature::tanh_sinh<double> ts(10);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        double a = edges[i] + (i > 0 ? excl : 0.0), b = edges[i + 1] - (i + 2 < edges.size() ? excl : 0.0);
        if (b <= a) continue;
        auto integrand = [&](double t, double) {
            double gv = g(t);
            double E = -detail::panel_derivative(g, t, a, b);
            return W.value(t, p) * E / gv;
        };
        double err = 0.0;
        total.value += ts.integrate(integrand, a, b, 1e-10, &err);
        total.error += err;
    }
    return total;
}

// ---------------------------------------------------------------------------------------------
// Least-squares collocation for transport equations written as
//   a_s V_s + a_ss V_ss + a_sd V_sd + a_se V_se + a_dd V_dd + a_ee V_ee + a_e V_e
// in (s, delta = zeta1 - zeta2, eta).

struct TransportCoefficients {
    double a_s = 0, a_ss = 0, a_sd = 0, a_se = 0, a_dd = 0, a_ee = 0, a_e = 0;
};

inline TransportCoefficients heat_coefficients(double tau, double delta, double eta, const TransportOptions& o = {}) {
    const double k = o.model.kappa, ct = 1.0 / std::tan(2.0 * eta);
    const double ht = 1e-5;
    KernelAction ka = kernel_action(tau, delta, eta, o.branch, o.model);
    double f_tau = (kernel_action(tau + ht, delta, eta, o.branch, o.model).value -
                    kernel_action(tau - ht, delta, eta, o.branch, o.model).value) /
                   (2 * ht);
    double lxf = half_sublaplacian_f(tau, eta, o.branch, o.model);
    TransportCoefficients c;
    c.a_s = o.q - 2.0 - lxf;
    c.a_ss = -tau;
    c.a_sd = -4.0 * tau * ct * ct;  // grad_0 h . grad_0 with h_delta = 1, h_eta = theta / tau
    c.a_se = -k * ka.theta;
    c.a_dd = 2.0 * ct * ct * f_tau;
    c.a_ee = 0.5 * k * f_tau;
    c.a_e = std::sqrt(k) * ct * f_tau;
    return c;
}

inline TransportCoefficients green_coefficients(double t, double delta, double eta, double psi1, const TransportOptions& o = {}) {
    const double k = o.model.kappa, ct = 1.0 / std::tan(2.0 * eta);
    const double tau = psi1 * t;
    const double ht = 1e-5;
    auto g = [&](double tt) { return kernel_action(psi1 * tt, delta, eta, o.branch, o.model).value / tt; };
    KernelAction ka = kernel_action(tau, delta, eta, o.branch, o.model);
    double E = -(g(t + ht) - g(t - ht)) / (2 * ht);
    double g_eta = ka.theta / t;
    double lap_g = 2.0 * half_sublaplacian_f(tau, eta, o.branch, o.model) / t;
    TransportCoefficients c;
    c.a_s = lap_g;
    c.a_ss = 1.0;
    c.a_sd = 4.0 * ct * ct * psi1;
    c.a_se = k * g_eta;
    c.a_dd = 4.0 * ct * ct * E;
    c.a_ee = k * E;
    c.a_e = 2.0 * std::sqrt(k) * ct * E;
    return c;
}

struct Patch {
    std::array<double, 2> s{0.2, 0.3};
    std::array<double, 2> delta{-0.2, 0.2};
    std::array<double, 2> eta{0.70, 0.87};
};

// Tensor cubic B-spline on a patch with clamped uniform knots.
class TensorSpline {
public:
    using Spl = Eigen::Spline<double, 1, 3>;

    TensorSpline() = default;
    TensorSpline(const Patch& p, int nel) : patch_(p), nel_(nel) {
        for (int d = 0; d < 3; ++d) {
            Eigen::Array<double, 1, Eigen::Dynamic> k(nel + 7);
            for (int i = 0; i < nel + 7; ++i) k[i] = std::clamp(double(i - 3) / nel, 0.0, 1.0);
            knots_[d] = k;
        }
        coef_ = Eigen::VectorXd::Zero(size());
    }
    int per_dim() const { return nel_ + 3; }
    int size() const { return per_dim() * per_dim() * per_dim(); }
    int nel() const { return nel_; }
    const Patch& patch() const { return patch_; }
    Eigen::VectorXd& coefficients() { return coef_; }
    const Eigen::VectorXd& coefficients() const { return coef_; }

    struct Basis1D {
        int first = 0;
        std::array<std::array<double, 4>, 3> d{};  // d[order][local]
    };

    Basis1D basis(int dim, double x) const {
        const auto& r = range(dim);
        double len = r[1] - r[0];
        double u = std::clamp((x - r[0]) / len, 0.0, 1.0);
        Basis1D b;
        auto span = Spl::Span(u, 3, knots_[dim]);
        auto der = Spl::BasisFunctionDerivatives(u, 2, 3, knots_[dim]);
        b.first = int(span) - 3;
        for (int o = 0; o < 3; ++o)
            for (int j = 0; j < 4; ++j) b.d[o][j] = der(o, j) / std::pow(len, o);
        return b;
    }

    int index(int i, int j, int k) const { return (i * per_dim() + j) * per_dim() + k; }

    // Derivative of order (os, od, oe) in (s, delta, eta).
    double eval(double s, double delta, double eta, int os = 0, int od = 0, int oe = 0) const {
        auto bs = basis(0, s), bd = basis(1, delta), be = basis(2, eta);
        double v = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k)
                    v += coef_[index(bs.first + i, bd.first + j, be.first + k)] * bs.d[os][i] * bd.d[od][j] * be.d[oe][k];
        return v;
    }

    const std::array<double, 2>& range(int dim) const { return dim == 0 ? patch_.s : dim == 1 ? patch_.delta : patch_.eta; }

private:
    Patch patch_{};
    int nel_ = 1;
    std::array<Eigen::Array<double, 1, Eigen::Dynamic>, 3> knots_;
    Eigen::VectorXd coef_;
};

// Linear form of a smooth baseline b(delta, eta) constant in s.
struct Baseline {
    std::function<double(double, double)> value = [](double, double) { return 1.0; };
    std::function<double(double, double)> d_eta = [](double, double) { return 0.0; };
    std::function<double(double, double)> d_delta = [](double, double) { return 0.0; };
    std::function<double(double, double)> dd_eta = [](double, double) { return 0.0; };
    std::function<double(double, double)> dd_delta = [](double, double) { return 0.0; };
};

inline Baseline linear_baseline(double c0, double c_eta, double c_delta, double eta_ref) {
    Baseline b;
    b.value = [=](double d, double e) { return c0 + c_eta * (e - eta_ref) + c_delta * d; };
    b.d_eta = [=](double, double) { return c_eta; };
    b.d_delta = [=](double, double) { return c_delta; };
    return b;
}

inline double baseline_residual(const Baseline& b, const TransportCoefficients& c, double delta, double eta) {
    return c.a_dd * b.dd_delta(delta, eta) + c.a_ee * b.dd_eta(delta, eta) + c.a_e * b.d_eta(delta, eta);
}

struct FittedVolume {
    TensorSpline spline;
    Baseline baseline;
    double max_residual = 0.0;           // chart-form residual, max over the check grid
    double l2_residual = 0.0;            // chart-form residual, RMS over the check grid
    double baseline_max_residual = 0.0;  // same for V = baseline
    double baseline_l2_residual = 0.0;
    int rank = 0;

    double operator()(double s, double delta, double eta) const { return baseline.value(delta, eta) + spline.eval(s, delta, eta); }
    VolumeCandidate candidate() const {
        return {[this](double s, const HyperPoint& p) { return (*this)(s, p.zeta1 - p.zeta2, p.eta); }};
    }
    double chart_residual(const TransportCoefficients& c, double s, double delta, double eta) const {
        const TensorSpline& U = spline;
        return c.a_s * U.eval(s, delta, eta, 1, 0, 0) + c.a_ss * U.eval(s, delta, eta, 2, 0, 0) +
               c.a_sd * U.eval(s, delta, eta, 1, 1, 0) + c.a_se * U.eval(s, delta, eta, 1, 0, 1) +
               c.a_dd * U.eval(s, delta, eta, 0, 2, 0) + c.a_ee * U.eval(s, delta, eta, 0, 0, 2) +
               c.a_e * U.eval(s, delta, eta, 0, 0, 1) + baseline_residual(baseline, c, delta, eta);
    }
};

using CoefficientFn = std::function<TransportCoefficients(double, double, double)>;

struct FitOptions {
    int nel = 2;
    double regularization = 1e-10;
    int check_elements = 4;  // Gauss check grid, 3 points per check element per dimension, independent of nel
};

namespace detail {

inline std::vector<std::pair<double, double>> gauss_points(const std::array<double, 2>& r, int ne) {
    static const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    std::vector<std::pair<double, double>> pts;
    double h = (r[1] - r[0]) / ne;
    for (int e = 0; e < ne; ++e)
        for (int g = 0; g < 3; ++g) pts.push_back({r[0] + h * (e + 0.5 + 0.5 * gx[g]), 0.5 * h * gw[g]});
    return pts;
}

}  // namespace detail

// Least-squares collocation at 3^3 Gauss points per element. V = b on the s = s_min face is
// imposed exactly by dropping the B-spline coefficients that are nonzero there (clamped knots),
// so refinements span nested spaces. A small Tikhonov term fixes directions the residual does
// not see.
inline FittedVolume fit_volume_element(const Patch& patch, const CoefficientFn& coef, const Baseline& base, const FitOptions& opt = {}) {
    if (opt.nel < 1) throw Error(ErrorCode::DomainError, "nel must be positive");
    FittedVolume out{TensorSpline(patch, opt.nel), base};
    TensorSpline& U = out.spline;
    const int P = U.per_dim(), ne = opt.nel;
    const int N = (P - 1) * P * P;  // unknowns: s-index 1..P-1
    auto unknown = [&](int i, int j, int k) { return ((i - 1) * P + j) * P + k; };
    auto gs = detail::gauss_points(patch.s, ne), gd = detail::gauss_points(patch.delta, ne), ge = detail::gauss_points(patch.eta, ne);
    const int n_int = int(gs.size() * gd.size() * ge.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_int + N, N);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M.rows());
    int row = 0;
    for (auto [s, ws] : gs)
        for (auto [d, wd] : gd)
            for (auto [e, we] : ge) {
                double w = std::sqrt(ws * wd * we);
                TransportCoefficients c = coef(s, d, e);
                auto bs = U.basis(0, s), bd = U.basis(1, d), be = U.basis(2, e);
                for (int i = 0; i < 4; ++i) {
                    if (bs.first + i == 0) continue;
                    for (int j = 0; j < 4; ++j)
                        for (int k = 0; k < 4; ++k) {
                            double v = c.a_s * bs.d[1][i] * bd.d[0][j] * be.d[0][k] + c.a_ss * bs.d[2][i] * bd.d[0][j] * be.d[0][k] +
                                       c.a_sd * bs.d[1][i] * bd.d[1][j] * be.d[0][k] + c.a_se * bs.d[1][i] * bd.d[0][j] * be.d[1][k] +
                                       c.a_dd * bs.d[0][i] * bd.d[2][j] * be.d[0][k] + c.a_ee * bs.d[0][i] * bd.d[0][j] * be.d[2][k] +
                                       c.a_e * bs.d[0][i] * bd.d[0][j] * be.d[1][k];
                            M(row, unknown(bs.first + i, bd.first + j, be.first + k)) += w * v;
                        }
                }
                rhs[row] = -w * baseline_residual(base, c, d, e);
                ++row;
            }
    for (int i = 0; i < N; ++i) M(row + i, i) = opt.regularization;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    out.rank = int(qr.rank());
    if (qr.rank() < N) throw Error(ErrorCode::IllConditioned, "collocation matrix is rank deficient");
    Eigen::VectorXd x = qr.solve(rhs);
    U.coefficients().setZero();
    for (int i = 1; i < P; ++i)
        for (int j = 0; j < P; ++j)
            for (int k = 0; k < P; ++k) U.coefficients()[U.index(i, j, k)] = x[unknown(i, j, k)];

    // Check grid, the same for every nel.
    auto cs = detail::gauss_points(patch.s, opt.check_elements), cd = detail::gauss_points(patch.delta, opt.check_elements),
         ce = detail::gauss_points(patch.eta, opt.check_elements);
    double vol = 0.0, acc = 0.0, acc_b = 0.0;
    for (auto [s, ws] : cs)
        for (auto [d, wd] : cd)
            for (auto [e, we] : ce) {
                TransportCoefficients co = coef(s, d, e);
                double r = out.chart_residual(co, s, d, e), rb = baseline_residual(base, co, d, e);
                double w = ws * wd * we;
                vol += w;
                acc += w * r * r;
                acc_b += w * rb * rb;
                out.max_residual = std::max(out.max_residual, std::abs(r));
                out.baseline_max_residual = std::max(out.baseline_max_residual, std::abs(rb));
            }
    out.l2_residual = std::sqrt(acc / vol);
    out.baseline_l2_residual = std::sqrt(acc_b / vol);
    return out;
}

inline CoefficientFn heat_coefficient_fn(const TransportOptions& o = {}) {
    return [o](double tau, double delta, double eta) { return heat_coefficients(tau, delta, eta, o); };
}

inline CoefficientFn green_coefficient_fn(double psi1, const TransportOptions& o = {}) {
    return [o, psi1](double t, double delta, double eta) { return green_coefficients(t, delta, eta, psi1, o); };
}

}  // namespace s3sr
