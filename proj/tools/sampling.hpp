#pragma once

// Seeded random inputs shared by the verify suites, the tests and the acceptance run.

#include <cmath>
#include <optional>
#include <random>

#include "s3sr/action.hpp"
#include "s3sr/cartesian.hpp"
#include "s3sr/core.hpp"
#include "s3sr/hamiltonian.hpp"
#include "s3sr/hyper.hpp"

namespace s3sr::tools {

using Rng = std::mt19937_64;

inline double uniform(Rng& r, double a, double b) { return std::uniform_real_distribution<double>(a, b)(r); }
inline double gaussian(Rng& r) { return std::normal_distribution<double>(0.0, 1.0)(r); }

inline S3Point random_point(Rng& r) {
    Vec4 v{gaussian(r), gaussian(r), gaussian(r), gaussian(r)};
    return S3Point((1.0 / norm(v)) * v);
}

inline CotangentState random_cotangent(Rng& r) {
    return {random_point(r).vec(), {gaussian(r), gaussian(r), gaussian(r), gaussian(r)}};
}

inline GeodesicParams random_params(Rng& r, double t_max = pi) {
    GeodesicParams p;
    p.B = uniform(r, -2, 2);
    p.C = uniform(r, -2, 2);
    p.D = uniform(r, -2, 2);
    if (std::hypot(p.C, p.D) < 0.1) p.C += 0.5;
    p.t = uniform(r, 0.05, t_max);
    return p;
}

// A state well inside the chart, eta in [0.3, pi/2 - 0.3].
inline HyperState random_chart_state(Rng& r) {
    return {uniform(r, -pi, pi), uniform(r, -pi, pi), uniform(r, 0.3, pi / 2 - 0.3),
            uniform(r, -1, 1), uniform(r, -1, 1), uniform(r, -1, 1)};
}

// Mixed boundary data read off a forward geodesic, so the eta condition has a solution on a known
// branch. Endpoints close to a turning point or to the chart boundary are rejected.
inline ActionPoint random_action_point(Rng& r, const HyperModel& m, bool unit_time = false) {
    for (;;) {
        HyperState s{0.0, 0.0, uniform(r, 0.45, pi / 2 - 0.45), uniform(r, -1, 1), uniform(r, -1, 1), uniform(r, -1, 1)};
        if (std::abs(s.theta) < 0.2) continue;
        double t = unit_time ? 1.0 : uniform(r, 0.4, 1.3);
        HyperGeodesic g;
        try {
            g = hyper_geodesic_from_state(s, m, t);
        } catch (const Error&) {
            continue;
        }
        if (g.degenerate) continue;
        double eta = eta_of_s(g, t);
        if (!(eta > 0.2 && eta < pi / 2 - 0.2)) continue;
        if (std::abs(std::cos(g.phase(t))) < 0.15) continue;
        int turns = turning_points_passed(g, t);
        ActionPoint p;
        p.zeta1 = uniform(r, -1, 1);
        p.zeta2 = uniform(r, -1, 1);
        p.eta0 = s.eta;
        p.eta = eta;
        p.psi1 = s.psi1;
        p.psi2 = s.psi2;
        p.t = t;
        p.branch = {g.sign, turns, g.A};
        return p;
    }
}

}  // namespace s3sr::tools
