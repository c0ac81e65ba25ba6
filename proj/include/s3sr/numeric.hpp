#pragma once

// Small numerical helpers shared by the geometry modules.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace s3sr {

inline constexpr double pi = std::numbers::pi;

// Wrap to [-pi, pi).
inline double wrap_angle(double a) {
    double r = std::fmod(a + pi, 2.0 * pi);
    if (r < 0.0) r += 2.0 * pi;
    return r - pi;
}

inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }

// Refine a sign-changing bracket with TOMS 748. Returns the midpoint of the final bracket.
template <class F>
double refine_root(F&& f, double a, double b, double fa, double fb, double xtol = 1e-15) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    std::uintmax_t iters = 200;
    auto tol = [xtol](double l, double r) { return std::abs(r - l) <= xtol * std::max(1.0, std::abs(l)); };
    auto res = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    return 0.5 * (res.first + res.second);
}

// All sign changes of f on a uniform grid over [a, b], each refined.
template <class F>
std::vector<double> grid_roots(F&& f, double a, double b, int n, double xtol = 1e-15) {
    std::vector<double> roots;
    double x0 = a, f0 = f(a);
    for (int i = 1; i <= n; ++i) {
        double x1 = a + (b - a) * i / n;
        double f1 = f(x1);
        if (std::isfinite(f0) && std::isfinite(f1)) {
            if (f0 == 0.0) {
                roots.push_back(x0);
            } else if (f0 * f1 < 0.0) {
                roots.push_back(refine_root(f, x0, x1, f0, f1, xtol));
            }
        }
        x0 = x1;
        f0 = f1;
    }
    if (f0 == 0.0) roots.push_back(x0);
    return roots;
}

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a, b].
template <class F>
QuadResult integrate_gk(F&& f, double a, double b, double rtol = 1e-13, unsigned max_depth = 18) {
    QuadResult r;
    if (a == b) return r;
    double err = 0.0;
    r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rtol, &err);
    r.error = err;
    return r;
}

// Central difference with one Richardson step: O(h^4).
template <class F>
double diff_central(F&& f, double x, double h) {
    double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    double d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

// Second derivative with one Richardson step.
template <class F>
double diff2_central(F&& f, double x, double h) {
    double f0 = f(x);
    double d1 = (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h);
    double hh = 0.5 * h;
    double d2 = (f(x + hh) - 2.0 * f0 + f(x - hh)) / (hh * hh);
    return (4.0 * d2 - d1) / 3.0;
}

// Step selection for a difference-quotient estimate q(h) with noisy inputs: q is evaluated at
// h0, h0/2, ..., h0/2^levels and the value at the step where two neighbours agree best is kept,
// so neither truncation (large h) nor cancellation (small h) dominates.
struct StepChoice {
    double value = 0.0;
    double step = 0.0;
    double spread = 0.0;  // |q(h) - q(h/2)| at the chosen step
};

template <class Q>
StepChoice stable_step(Q&& q, double h0, int levels = 3) {
    std::vector<double> v;
    for (int k = 0; k <= levels; ++k) v.push_back(q(h0 * std::ldexp(1.0, -k)));
    StepChoice best{v[0], h0, std::numeric_limits<double>::infinity()};
    for (int k = 0; k < levels; ++k) {
        double d = std::abs(v[k] - v[k + 1]);
        if (d < best.spread) best = {v[k + 1], h0 * std::ldexp(1.0, -(k + 1)), d};
    }
    return best;
}

// h ~ eps^(1/3) scaled by magnitude.
inline double fd_step(double x) { return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(x)); }

}  // namespace s3sr
