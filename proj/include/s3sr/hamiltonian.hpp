#pragma once

// Hamiltonian H = 1/2(<I1 x, xi>^2 + <I2 x, xi>^2) on T*R^4 restricted to the sphere,
// its flow, first integrals, Poisson brackets and the control-theoretic layer.

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "core.hpp"
#include "error.hpp"

namespace s3sr {

struct CotangentState {
    Vec4 x{1.0, 0.0, 0.0, 0.0};
    Vec4 xi{0.0, 0.0, 0.0, 0.0};
};

inline double pairing_X(const CotangentState& s) { return dot(I1(s.x), s.xi); }
inline double pairing_Y(const CotangentState& s) { return dot(I2(s.x), s.xi); }

inline double hamiltonian_value(const CotangentState& s) {
    double a = pairing_X(s), b = pairing_Y(s);
    return 0.5 * (a * a + b * b);
}

inline CotangentState hamiltonian_rhs(const CotangentState& s) {
    double a = pairing_X(s), b = pairing_Y(s);
    return {a * I1(s.x) + b * I2(s.x), a * I1(s.xi) + b * I2(s.xi)};
}

struct FirstIntegrals {
    double J1 = 0.0, J2 = 0.0, J3 = 0.0, J4 = 0.0;
    double operator[](int k) const { return k == 0 ? J1 : k == 1 ? J2 : k == 2 ? J3 : J4; }
};

inline FirstIntegrals first_integrals(const CotangentState& s) {
    const Vec4& x = s.x;
    const Vec4& p = s.xi;
    return {x[0] * p[0] + x[1] * p[1] + x[2] * p[2] + x[3] * p[3],
            -x[1] * p[0] + x[0] * p[1] + x[3] * p[2] - x[2] * p[3],
            -x[2] * p[0] + x[3] * p[1] + x[0] * p[2] - x[1] * p[3],
            -x[3] * p[0] - x[2] * p[1] + x[1] * p[2] + x[0] * p[3]};
}

// {F, G} = sum_k dF/dx_k dG/dxi_k - dG/dx_k dF/dxi_k, central differences.
template <class F, class G>
double poisson_bracket(F&& f, G&& g, const CotangentState& s, double h = 0.0) {
    auto partial = [&](auto&& fn, int k, bool wrt_x) {
        CotangentState p = s, m = s;
        double base = wrt_x ? s.x[k] : s.xi[k];
        double step = h > 0.0 ? h : fd_step(base);
        (wrt_x ? p.x : p.xi)[k] += step;
        (wrt_x ? m.x : m.xi)[k] -= step;
        return (fn(p) - fn(m)) / (2.0 * step);
    };
    double r = 0.0;
    for (int k = 0; k < 4; ++k) {
        r += partial(f, k, true) * partial(g, k, false) - partial(g, k, true) * partial(f, k, false);
    }
    return r;
}

struct Control {
    double u = 0.0, v = 0.0;
};

inline Control optimal_control(const CotangentState& s) { return {pairing_X(s), pairing_Y(s)}; }

inline double pseudo_hamiltonian(const CotangentState& s, const Control& c) {
    return -0.5 * (c.u * c.u + c.v * c.v) + c.u * pairing_X(s) + c.v * pairing_Y(s);
}

inline CotangentState control_rhs(const CotangentState& s, const Control& c) {
    return {c.u * I1(s.x) + c.v * I2(s.x), c.u * I1(s.xi) + c.v * I2(s.xi)};
}

// Controls recovered from a velocity: the coefficients along X and Y.
inline Control control_from_velocity(const Vec4& x, const Vec4& xdot) { return {dot(I1(x), xdot), dot(I2(x), xdot)}; }

// Determinant of the linear system J1 = J2 = J3 = J4 = 0 in the unknowns xi.
inline double abnormal_system_determinant(const Vec4& x) {
    Eigen::Matrix4d M;
    M << x[0], x[1], x[2], x[3],
        -x[1], x[0], x[3], -x[2],
        -x[2], x[3], x[0], -x[1],
        -x[3], -x[2], x[1], x[0];
    return M.determinant();
}

// ---------------------------------------------------------------------------------------------
// Integration.

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 1e-3;
    int samples = 0;          // > 0: uniform dense-output samples instead of accepted steps
    bool renormalize = false; // project x back to the sphere after every accepted step
    std::size_t max_steps = 2000000;
};

struct TrajectoryPoint {
    double s = 0.0;
    CotangentState state;
};

struct DriftReport {
    double H = 0.0;         // relative to H(0)
    double H_scaled = 0.0;  // relative to max(H(0), |xi(0)|^2 / 2), the scale used for J
    double norm_x = 0.0;  // max ||x| - 1|
    std::array<double, 4> J{0.0, 0.0, 0.0, 0.0};  // relative to max(|J_k(0)|, |xi(0)|)
    double horizontality = 0.0;  // max |c| of the velocity
    double speed = 0.0;          // max ||xdot|^2 - 2H|
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    DriftReport drift;
};

namespace detail {
using OdeState = std::array<double, 8>;

inline OdeState pack(const CotangentState& s) { return {s.x[0], s.x[1], s.x[2], s.x[3], s.xi[0], s.xi[1], s.xi[2], s.xi[3]}; }
inline CotangentState unpack(const OdeState& y) { return {{y[0], y[1], y[2], y[3]}, {y[4], y[5], y[6], y[7]}}; }
}  // namespace detail

inline DriftReport measure_drift(const std::vector<TrajectoryPoint>& pts) {
    DriftReport d;
    if (pts.empty()) return d;
    const auto& s0 = pts.front().state;
    double H0 = hamiltonian_value(s0);
    FirstIntegrals J0 = first_integrals(s0);
    double xin = norm(s0.xi);
    for (const auto& p : pts) {
        double H = hamiltonian_value(p.state);
        d.H = std::max(d.H, H0 > 0.0 ? std::abs(H - H0) / H0 : std::abs(H));
        const double hs = std::max(H0, 0.5 * xin * xin);
        d.H_scaled = std::max(d.H_scaled, hs > 0.0 ? std::abs(H - H0) / hs : std::abs(H));
        d.norm_x = std::max(d.norm_x, std::abs(norm(p.state.x) - 1.0));
        FirstIntegrals J = first_integrals(p.state);
        for (int k = 0; k < 4; ++k) {
            double scale = std::max(std::abs(J0[k]), xin);
            d.J[k] = std::max(d.J[k], scale > 0.0 ? std::abs(J[k] - J0[k]) / scale : std::abs(J[k]));
        }
        CotangentState r = hamiltonian_rhs(p.state);
        d.horizontality = std::max(d.horizontality, std::abs(one_form_eval(S3Point::unchecked(p.state.x), r.x)));
        d.speed = std::max(d.speed, std::abs(dot(r.x, r.x) - 2.0 * H));
    }
    return d;
}

inline Trajectory integrate(const CotangentState& s0, double t, const IntegratorOptions& opt = {}) {
    namespace ode = boost::numeric::odeint;
    if (!(t >= 0.0)) throw Error(ErrorCode::DomainError, "negative duration");
    if (!(opt.rtol > 0.0 && opt.atol > 0.0)) throw Error(ErrorCode::DomainError, "tolerances must be positive");
    using detail::OdeState;
    Trajectory traj;
    auto sys = [](const OdeState& y, OdeState& dy, double) {
        CotangentState r = hamiltonian_rhs(detail::unpack(y));
        dy = detail::pack(r);
    };
    OdeState y = detail::pack(s0);
    traj.points.push_back({0.0, s0});
    if (t == 0.0) {
        traj.drift = measure_drift(traj.points);
        return traj;
    }
    using Stepper = ode::runge_kutta_dopri5<OdeState>;
    try {
        if (opt.samples > 0 && !opt.renormalize) {
            std::vector<double> times;
            for (int i = 0; i <= opt.samples; ++i) times.push_back(t * i / opt.samples);
            traj.points.clear();
            auto dense = ode::make_dense_output(opt.atol, opt.rtol, Stepper());
            ode::integrate_times(dense, sys, y, times.begin(), times.end(), opt.initial_step,
                                 [&](const OdeState& st, double s) { traj.points.push_back({s, detail::unpack(st)}); },
                                 ode::max_step_checker(opt.max_steps));
        } else {
            auto stepper = ode::make_controlled(opt.atol, opt.rtol, Stepper());
            double s = 0.0, dt = std::min(opt.initial_step, t);
            std::size_t steps = 0;
            while (s < t) {
                if (s + dt > t) dt = t - s;
                auto res = stepper.try_step(sys, y, s, dt);
                if (res == ode::success) {
                    if (opt.renormalize) {
                        double n = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]);
                        for (int i = 0; i < 4; ++i) y[i] /= n;
                    }
                    traj.points.push_back({s, detail::unpack(y)});
                }
                if (dt < 1e-14 * std::max(1.0, t)) throw Error(ErrorCode::StepSizeUnderflow, "step size underflow");
                if (++steps > opt.max_steps) throw Error(ErrorCode::StepSizeUnderflow, "step budget exhausted");
            }
        }
    } catch (const ode::no_progress_error& e) {
        throw Error(ErrorCode::StepSizeUnderflow, e.what());
    } catch (const ode::step_adjustment_error& e) {
        throw Error(ErrorCode::StepSizeUnderflow, e.what());
    }
    traj.drift = measure_drift(traj.points);
    return traj;
}

}  // namespace s3sr
