#include <gtest/gtest.h>

#include <cmath>

#include "s3sr/action.hpp"
#include "sampling.hpp"

using namespace s3sr;
using s3sr::tools::Rng;

namespace {

// Numerical pole search for the principal restricted action: tan(2 sqrt(kappa A(tau))) blows up
// where cos changes sign continuously. Sign changes across jumps of A(tau) are discarded.
std::vector<double> locate_poles(double eta, double tmax, const HyperModel& m = {}) {
    const double k2 = 2 * std::sqrt(m.kappa);
    auto c = [&](double tau) { return std::cos(k2 * restricted_first_root(tau, eta, m)); };
    std::vector<double> out;
    const int n = 4000;
    double t0 = 1e-4, c0 = c(t0);
    for (int i = 1; i <= n; ++i) {
        double t1 = 1e-4 + (tmax - 1e-4) * i / n, c1 = c(t1);
        if (c0 * c1 < 0) {
            double a = t0, b = t1, ca = c0;
            for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
                double mid = 0.5 * (a + b), cm = c(mid);
                if (cm * ca < 0) b = mid; else { a = mid; ca = cm; }
            }
            if (std::abs(c(a)) < 1e-6 && std::abs(c(b)) < 1e-6) out.push_back(0.5 * (a + b));
        }
        t0 = t1;
        c0 = c1;
    }
    return out;
}

}  // namespace

TEST(ModifiedAction, ClosedFormMatchesQuadrature) {
    Rng r(40);
    for (double kappa : {4.0, 1.0}) {
        ActionOptions o;
        o.model = {kappa};
        o.cross_check = true;
        o.strict = true;
        for (int i = 0; i < 30; ++i) {
            ActionPoint p = tools::random_action_point(r, o.model);
            ActionEval e = modified_action(p.zeta1, p.zeta2, p.eta0, p.eta, p.psi1, p.psi2, p.t, p.branch, o);
            ASSERT_TRUE(e.quadrature.has_value());
            EXPECT_NEAR(e.value, *e.quadrature, 1e-7);
            EXPECT_FALSE(e.fallback);
        }
    }
}

TEST(ModifiedAction, CharacteristicDirectionFormula) {
    // psi = (p, -p) from eta0 = pi/4 with a short time so 4 t sqrt(A) < pi/2.
    const double p = 0.35, th0 = 0.4, t = 0.2;
    const double A = 4 * p * p + 4 * th0 * th0;
    HyperGeodesic g = make_hyper_geodesic(4.0, A, p / std::sqrt(A), -p / std::sqrt(A), pi / 4, 1, t);
    const double eta = eta_of_s(g, t), z1 = 0.3, z2 = -0.1;
    ActionEval e = modified_action(z1, z2, pi / 4, eta, p, -p, t, {1, turning_points_passed(g, t), A});
    double expect = p * (z1 - z2) + A * t / 2 + 2 * t * p * p - (p / 2) * std::atan((2 * p / std::sqrt(A)) * std::tan(4 * t * std::sqrt(A)));
    EXPECT_NEAR(e.A, A, 1e-10);
    EXPECT_NEAR(e.value, expect, 1e-10);
}

TEST(ModifiedAction, ZeroMomentumGivesHalfA) {
    ActionOptions o;
    o.cross_check = true;
    ActionEval e = modified_action(0.2, 0.1, pi / 4, 0.9, 0.0, 0.0, 1.0, {1, 0, std::nullopt}, o);
    EXPECT_NEAR(e.value, e.A / 2, 1e-12);
    EXPECT_NEAR(*e.quadrature, e.A / 2, 1e-9);
    EXPECT_NEAR(e.A, std::pow((0.9 - pi / 4) / 2, 2), 1e-10);  // eta(s) is linear with slope 2 sqrt(A)
    ActionEval f = f_action(0.2, 0.1, pi / 4, 0.9, 0.0, 0.0);
    EXPECT_NEAR(f.value, f.A / 2, 1e-12);
}

TEST(ModifiedAction, Stretching) {
    Rng r(41);
    ActionOptions o;
    for (int i = 0; i < 20; ++i) {
        ActionPoint p = tools::random_action_point(r, o.model);
        for (double lambda : {2.0, 1.0 / 3.0}) EXPECT_LT(std::abs(stretching_defect(p, lambda, o)), 1e-9);
    }
}

TEST(ModifiedAction, NoAmplitudeIsAnError) {
    // eta outside every reachable band for these momenta
    try {
        modified_action(0, 0, 0.3, 1.4, 2.0, 0.0, 1.0, {1, 0, std::nullopt});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ArgumentOutOfRange);
    }
}

TEST(HamiltonJacobi, ResidualAndGradients) {
    Rng r(42);
    for (double kappa : {4.0, 1.0}) {
        ActionOptions o;
        o.model = {kappa};
        for (int i = 0; i < 20; ++i) {
            HJReport h = check_hamilton_jacobi(tools::random_action_point(r, o.model), 1e-5, o);
            EXPECT_LT(std::abs(h.residual), 1e-6);
            EXPECT_LT(std::abs(h.grad_zeta1), 1e-7);
            EXPECT_LT(std::abs(h.grad_zeta2), 1e-7);
            EXPECT_LT(std::abs(h.theta_mismatch), 1e-6);
        }
    }
}

TEST(HamiltonJacobi, GeneralizedEquationAtUnitTime) {
    Rng r(43);
    ActionOptions o;
    for (int i = 0; i < 20; ++i) EXPECT_LT(std::abs(generalized_hj_residual(tools::random_action_point(r, o.model, true), 1e-5, o)), 1e-6);
}

TEST(HamiltonJacobi, TransportOperatorIdentities) {
    Rng r(44);
    ActionOptions o;
    for (int i = 0; i < 10; ++i) {
        TOperatorReport t = check_T_operator(tools::random_action_point(r, o.model), 1e-4, o);
        EXPECT_LT(std::abs(t.T_ht), 1e-5);
        EXPECT_LT(std::abs(t.T_h_plus_ht), 1e-5);
    }
}

TEST(HamiltonJacobi, CharacteristicLineIdentities) {
    for (double tau : {0.2, 0.3, 0.45}) {
        const double th0 = 0.5, A = 4 * tau * tau + 4 * th0 * th0;
        HyperGeodesic g = make_hyper_geodesic(4.0, A, tau / std::sqrt(A), -tau / std::sqrt(A), pi / 4, 1);
        const double eta = eta_of_s(g, 1.0);
        CharacteristicReport c = check_characteristic_identities(0.2, 0.1, eta, tau, {1, turning_points_passed(g, 1.0), A});
        EXPECT_LT(std::abs(c.item_ii), 1e-5);
        EXPECT_LT(std::abs(c.item_iii), 1e-5);
        EXPECT_LT(std::abs(c.item_iv), 1e-5);
        EXPECT_LT(std::abs(c.item_v), 1e-5);
    }
}

TEST(HamiltonJacobi, CharacteristicIdentitiesPickTheStretchedAmplitude) {
    // Here g(psi = (1, -1), t = tau) has two amplitudes; the right one is A_f / tau^2, not the smaller.
    const double tau = 0.35, th0 = 0.5, A = 4 * tau * tau + 4 * th0 * th0;
    HyperGeodesic g = make_hyper_geodesic(4.0, A, tau / std::sqrt(A), -tau / std::sqrt(A), pi / 4, 1);
    const double eta = eta_of_s(g, 1.0);
    const int turns = turning_points_passed(g, 1.0);
    auto amps = action_amplitudes(pi / 4, eta, 1.0, -1.0, tau, 1, turns, HyperModel{});
    ASSERT_GE(amps.size(), 2u);
    const ActionBranch br{1, turns, A};
    CharacteristicReport c = check_characteristic_identities(0.2, 0.1, eta, tau, br);
    EXPECT_LT(std::abs(c.item_ii), 1e-7);
    EXPECT_LT(std::abs(c.item_iii), 1e-7);
    EXPECT_LT(std::abs(c.item_v), 1e-7);
    // Second differences: step chosen where successive halvings agree.
    StepChoice iv = stable_step([&](double h) { return check_characteristic_identities(0.2, 0.1, eta, tau, br, h).item_iv; }, 2e-4);
    EXPECT_LT(std::abs(iv.value), 1e-5);
}

TEST(StableStep, BalancesTruncationAgainstNoise) {
    // Forward difference of exp with 1e-12 relative noise: the best step is near 1e-6.
    auto noisy = [](double x) { return std::exp(x) * (1.0 + 1e-12 * std::sin(1e9 * x)); };
    StepChoice c = stable_step([&](double h) { return (noisy(h) - noisy(0.0)) / h; }, 1e-3, 10);
    EXPECT_NEAR(c.value, 1.0, 1e-5);
    EXPECT_GT(c.step, 1e-8);
}

TEST(Distance, RecoversGeneratingMomenta) {
    Rng r(45);
    DistanceOptions o;
    o.bvp.max_turns = 1;
    for (int tested = 0; tested < 4;) {
        double p1 = tools::uniform(r, -0.4, 0.4), p2 = tools::uniform(r, -0.4, 0.4), th = tools::uniform(r, 0.05, 0.2);
        HyperGeodesic g = hyper_geodesic_from_state({0, 0, pi / 4, p1, p2, th}, o.bvp.model);
        if (turning_points_passed(g, 1.0) != 0) continue;
        ++tested;
        HyperState e = hyper_state_at(g, 1.0);
        DistanceResult d = distance({e.zeta1, e.zeta2, e.eta}, pi / 4, o);
        EXPECT_NEAR(d.psi1, p1, 1e-6);
        EXPECT_NEAR(d.psi2, p2, 1e-6);
        EXPECT_NEAR(d.distance, g.hamiltonian(), 1e-6);
        EXPECT_NEAR(d.H, d.distance, 1e-6);  // f = H at a critical point
        EXPECT_LT(d.critical_residual, 1e-5);
    }
}

TEST(Distance, VanishesTowardsTheBase) {
    DistanceOptions o;
    o.bvp.max_turns = 0;
    double prev = 1e9;
    for (double s : {0.5, 0.1, 0.02}) {
        HyperState e = hyper_state_at(hyper_geodesic_from_state({0, 0, pi / 4, 0.3 * s, -0.1 * s, 0.2 * s}, o.bvp.model), 1.0);
        DistanceResult d = distance({e.zeta1, e.zeta2, e.eta}, pi / 4, o);
        EXPECT_LT(d.distance, prev);
        prev = d.distance;
    }
    EXPECT_LT(prev, 1e-3);
    EXPECT_EQ(distance({0, 0, pi / 4}).distance, 0.0);
}

TEST(Distance, VerticalLineTargetIsRejected) {
    try {
        distance({0.4, -0.4, pi / 4});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::VerticalLineTarget);
    }
}

TEST(RestrictedAction, PolesMatchTheFormula) {
    for (auto [eta, ns] : {std::pair{pi / 3, std::vector<int>{0, 2}}, std::pair{pi / 5, std::vector<int>{1}}}) {
        auto found = locate_poles(eta, 1.6);
        for (int n : ns) {
            double pc = pole_candidate(eta, n);
            double best = 1e9;
            for (double f : found) best = std::min(best, std::abs(f - pc));
            EXPECT_LT(best, 1e-9) << "eta=" << eta << " n=" << n;
        }
        // every located pole is a formula pole
        for (double f : found) {
            double best = 1e9;
            for (int n = 0; n < 10; ++n) best = std::min(best, std::abs(f - pole_candidate(eta, n)));
            EXPECT_LT(best, 1e-9);
        }
        auto listed = restricted_action_poles(eta, 2);
        for (int n : ns) EXPECT_NE(std::find_if(listed.begin(), listed.end(), [&](double x) { return std::abs(x - pole_candidate(eta, n)) < 1e-12; }), listed.end());
    }
}

TEST(RestrictedAction, SingularAtPoles) {
    double pc = pole_candidate(pi / 3, 0);
    EXPECT_THROW(restricted_action(pc, 0.1, 0.0, pi / 3), Error);
    EXPECT_NO_THROW(restricted_action(pc + 1e-3, 0.1, 0.0, pi / 3));
}

TEST(RestrictedAction, PrincipalAndTrackedDifferByArctanTurns) {
    for (double tau : {0.05, 0.3, 0.7, 1.2, -0.9}) {
        RestrictedAction ra = restricted_action(tau, 0.2, -0.3, pi / 3);
        double k = (ra.value - ra.tracked) / (pi * tau / 2);
        EXPECT_NEAR(k, std::round(k), 1e-9) << tau;
    }
}

TEST(RestrictedAction, AgreesWithTheGeneralActionBeforeTheFirstPole) {
    const double eta = pi / 3;
    for (double tau : {0.03, 0.08, 0.12}) {
        RestrictedAction ra = restricted_action(tau, 0.2, -0.3, eta);
        double a = std::sqrt(ra.A);
        HyperGeodesic g = make_hyper_geodesic(4.0, ra.A, tau / a, -tau / a, pi / 4, 1);
        ASSERT_NEAR(eta_of_s(g, 1.0), eta, 1e-9);
        ActionEval e = f_action(0.2, -0.3, pi / 4, eta, tau, -tau, {1, turning_points_passed(g, 1.0), ra.A});
        EXPECT_NEAR(e.value, ra.value, 1e-8);
        EXPECT_NEAR(e.value, ra.tracked, 1e-8);
    }
}
