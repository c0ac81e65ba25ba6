#pragma once

// Invariant suites behind `s3sr verify`. Each returns a JSON report with the maximum residuals,
// the thresholds they were compared against and a pass flag. Output depends only on the
// arguments.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "json_io.hpp"
#include "run_config.hpp"
#include "s3sr/action.hpp"
#include "s3sr/cartesian.hpp"
#include "s3sr/hamiltonian.hpp"
#include "s3sr/kernel.hpp"
#include "sampling.hpp"

namespace s3sr::tools {

struct SuiteArgs {
    int count = 20;
    std::uint64_t seed = 12345;
    RunConfig cfg{};
};

inline json suite_conservation(const SuiteArgs& a) {
    Rng rng(a.seed);
    IntegratorOptions io;
    io.rtol = a.cfg.rtol;
    io.atol = a.cfg.atol;
    double dH = 0, dHs = 0, dJ = 0, dx = 0;
    for (int i = 0; i < a.count; ++i) {
        auto tr = integrate(random_cotangent(rng), 10.0, io);
        dH = std::max(dH, tr.drift.H);
        dHs = std::max(dHs, tr.drift.H_scaled);
        dx = std::max(dx, tr.drift.norm_x);
        for (double j : tr.drift.J) dJ = std::max(dJ, j);
    }
    const double tol = 1e-8;
    return {{"max_drift_H", dHs}, {"max_drift_H_over_H0", dH}, {"max_drift_J", dJ}, {"max_drift_norm", dx},
            {"threshold", tol}, {"pass", dHs < tol && dJ < tol && dx < tol}};
}

inline json suite_involutivity(const SuiteArgs& a) {
    Rng rng(a.seed);
    using JFn = std::function<double(const CotangentState&)>;
    std::array<JFn, 4> J;
    for (int k = 0; k < 4; ++k) J[k] = [k](const CotangentState& s) { return first_integrals(s)[k]; };
    JFn H = [](const CotangentState& s) { return hamiltonian_value(s); };
    json pairs = json::object();
    std::map<std::string, double> mx;
    double worst = 0, worst_H = 0;
    for (int i = 0; i < a.count; ++i) {
        CotangentState s = random_cotangent(rng);
        for (int k = 0; k < 4; ++k) {
            worst_H = std::max(worst_H, std::abs(poisson_bracket(J[k], H, s, 1e-5)));
            for (int m = k + 1; m < 4; ++m) {
                double b = std::abs(poisson_bracket(J[k], J[m], s, 1e-5));
                std::string key = "J" + std::to_string(k + 1) + "J" + std::to_string(m + 1);
                mx[key] = std::max(mx[key], b);
                worst = std::max(worst, b);
            }
        }
    }
    for (auto& [k, v] : mx) pairs[k] = v;
    const double tol = 1e-6;
    return {{"max_bracket", worst}, {"max_bracket_with_H", worst_H}, {"pairs", pairs}, {"threshold", tol},
            {"pass", worst < tol && worst_H < tol}};
}

inline json suite_hj(const SuiteArgs& a) {
    Rng rng(a.seed);
    ActionOptions o;
    o.model = a.cfg.model();
    double res = 0, grad = 0;
    for (int i = 0; i < a.count; ++i) {
        HJReport r = check_hamilton_jacobi(random_action_point(rng, o.model), a.cfg.fd_step, o);
        res = std::max(res, std::abs(r.residual));
        grad = std::max({grad, std::abs(r.grad_zeta1), std::abs(r.grad_zeta2)});
    }
    return {{"max_residual", res}, {"max_gradient_defect", grad}, {"threshold_residual", 1e-6}, {"threshold_gradient", 1e-7},
            {"pass", res < 1e-6 && grad < 1e-7}};
}

inline json suite_ghj(const SuiteArgs& a) {
    Rng rng(a.seed);
    ActionOptions o;
    o.model = a.cfg.model();
    double res = 0;
    for (int i = 0; i < a.count; ++i)
        res = std::max(res, std::abs(generalized_hj_residual(random_action_point(rng, o.model, true), a.cfg.fd_step, o)));
    return {{"max_residual", res}, {"threshold", 1e-6}, {"pass", res < 1e-6}};
}

// Heat transport residual of a non-constant candidate, compared at p and at p shifted along
// zeta1 + zeta2.
inline json suite_transport_symmetry(const SuiteArgs& a) {
    Rng rng(a.seed);
    TransportOptions o;
    o.model = a.cfg.model();
    VolumeCandidate V{[](double tau, const HyperPoint& p) {
        return 1.0 + 0.3 * tau * std::cos(p.zeta1 - p.zeta2) + 0.2 * (p.eta - pi / 4) * tau * tau;
    }};
    Patch patch;
    double diff = 0, scale = 0, cnst = 0;
    for (int i = 0; i < a.count; ++i) {
        double tau = uniform(rng, patch.s[0], patch.s[1]);
        double d = uniform(rng, patch.delta[0], patch.delta[1]), e = uniform(rng, patch.eta[0], patch.eta[1]);
        double z2 = uniform(rng, -pi, pi), alpha = uniform(rng, -pi, pi);
        HyperPoint p{z2 + d, z2, e}, q{z2 + d + alpha, z2 + alpha, e};
        double rp = heat_transport_residual(V, p, tau, o), rq = heat_transport_residual(V, q, tau, o);
        diff = std::max(diff, std::abs(rp - rq) / std::max(1.0, std::abs(rp)));
        scale = std::max(scale, std::abs(rp));
        cnst = std::max(cnst, std::abs(heat_transport_residual(constant_volume(1.0), p, tau, o)));
    }
    const double tol = 1e-6;
    return {{"max_relative_shift_difference", diff}, {"max_residual_magnitude", scale}, {"max_constant_residual", cnst},
            {"threshold", tol}, {"pass", diff < tol && cnst < 1e-12}};
}

// For horizontal curves the swept areas of the two coordinate projections coincide, since the
// contact form is the difference of the two area forms.
inline json suite_areas(const SuiteArgs& a) {
    Rng rng(a.seed);
    const int n = 20000;
    double gap = 0, defect = 0;
    for (int i = 0; i < a.count; ++i) {
        GeodesicParams p = random_params(rng);
        std::vector<CurveSample> smp;
        smp.reserve(n + 1);
        for (int k = 0; k <= n; ++k) {
            double s = p.t * k / n;
            CotangentState c = geodesic_cotangent_lift(p, s);
            smp.push_back({s, S3Point::unchecked(c.x), hamiltonian_rhs(c).x});
        }
        ProjectedAreas ar = swept_areas(smp);
        gap = std::max(gap, std::abs(ar.A - ar.B));
        defect = std::max(defect, is_horizontal_curve(smp, 1e-9).max_defect);
    }
    const double tol = 1e-6;
    return {{"max_area_gap", gap}, {"max_horizontality_defect", defect}, {"threshold", tol},
            {"pass", gap < tol && defect < 1e-9}};
}

inline const std::map<std::string, std::function<json(const SuiteArgs&)>>& suites() {
    static const std::map<std::string, std::function<json(const SuiteArgs&)>> m{
        {"conservation", suite_conservation}, {"involutivity", suite_involutivity}, {"hj", suite_hj},
        {"ghj", suite_ghj}, {"transport-symmetry", suite_transport_symmetry}, {"areas", suite_areas}};
    return m;
}

}  // namespace s3sr::tools
