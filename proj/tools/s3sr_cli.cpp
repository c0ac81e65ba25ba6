// s3sr: command-line driver for geodesics, actions, distance, kernels and invariant checks.
// Exit codes: 0 ok, 1 invariant failure, 2 usage or domain error, 3 no solution.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "json_io.hpp"
#include "run_config.hpp"
#include "s3sr/action.hpp"
#include "s3sr/cartesian.hpp"
#include "s3sr/hamiltonian.hpp"
#include "s3sr/hyper.hpp"
#include "s3sr/kernel.hpp"
#include "suites.hpp"

using namespace s3sr;
using namespace s3sr::tools;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const json& j) { std::cout << to_text(j); }

std::string fmt(double v) { return format_double(v); }

json point_json(const Vec4& x) { return json::array({x[0], x[1], x[2], x[3]}); }

// ---------------------------------------------------------------------------------------------

struct GeodesicCmd {
    std::optional<double> B, C, D, t, omega;
    std::optional<int> n;
    bool vertical = false;
    int samples = 201;
    std::string out, trajectory;

    void bind(CLI::App* sub) {
        sub->add_option("--B", B, "vertical momentum");
        sub->add_option("--C", C, "horizontal momentum, real part");
        sub->add_option("--D", D, "horizontal momentum, imaginary part");
        sub->add_option("--t", t, "duration");
        sub->add_flag("--vertical", vertical, "geodesic to the vertical line (needs --omega, --t, --n)");
        sub->add_option("--omega", omega, "target phase on the vertical line");
        sub->add_option("--n", n, "family index");
        sub->add_option("--samples", samples, "number of intervals")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--out", out, "CSV path; a JSON sidecar is written to <out>.json");
        sub->add_option("--trajectory", trajectory, "CSV path for the integrated Hamiltonian trajectory");
    }

    int run(const RunConfig& cfg) const {
        GeodesicParams p;
        json j = envelope(cfg, "geodesic");
        if (vertical) {
            if (!omega || !t || !n) throw UsageError("--vertical requires --omega, --t and --n");
            VerticalFamily f = vertical_family(*omega, *t, *n);
            p = f.params;
            j["length_closed_form"] = f.length_law;
            j["family"] = *n;
        } else {
            if (!B || !C || !D || !t) throw UsageError("geodesic requires --B, --C, --D and --t (or --vertical)");
            p = {*B, *C, *D, *t};
            check_params(p);
        }
        std::ostringstream csv;
        csv << "s,x1,x2,x3,x4\n";
        std::vector<CurveSample> smp;
        for (int k = 0; k <= samples; ++k) {
            double s = p.t * k / samples;
            CotangentState c = geodesic_cotangent_lift(p, s);
            smp.push_back({s, S3Point::unchecked(c.x), hamiltonian_rhs(c).x});
            csv << fmt(s);
            for (int i = 0; i < 4; ++i) csv << "," << fmt(c.x[i]);
            csv << "\n";
        }
        double norm_dev = 0;
        for (const auto& q : smp) norm_dev = std::max(norm_dev, std::abs(norm(q.x.vec()) - 1.0));
        j["params"] = {{"B", p.B}, {"C", p.C}, {"D", p.D}, {"t", p.t}};
        j["length"] = p.t * p.speed();
        j["length_quadrature"] = geodesic_arc_length(p).value;
        j["H"] = hamiltonian_value(geodesic_cotangent_lift(p, 0.0));
        j["max_horizontality_defect"] = is_horizontal_curve(smp, 1e-9).max_defect;
        j["max_norm_deviation"] = norm_dev;
        j["endpoint"] = point_json(smp.back().x.vec());
        j["samples"] = samples + 1;
        if (!trajectory.empty()) {
            IntegratorOptions io;
            io.rtol = cfg.rtol;
            io.atol = cfg.atol;
            io.samples = samples;
            Trajectory tr = integrate(geodesic_cotangent_lift(p, 0.0), p.t, io);
            std::ofstream f(trajectory);
            f << "s,x1,x2,x3,x4,xi1,xi2,xi3,xi4,H,J1,J2,J3,J4\n";
            for (const auto& q : tr.points) {
                f << fmt(q.s);
                for (double v : q.state.x) f << "," << fmt(v);
                for (double v : q.state.xi) f << "," << fmt(v);
                f << "," << fmt(hamiltonian_value(q.state));
                FirstIntegrals J = first_integrals(q.state);
                for (int k = 0; k < 4; ++k) f << "," << fmt(J[k]);
                f << "\n";
            }
            j["trajectory"] = trajectory;
            j["trajectory_drift_H"] = tr.drift.H;
        }
        if (!out.empty()) {
            std::ofstream(out) << csv.str();
            std::ofstream(out + ".json") << to_text(j);
            j["csv"] = out;
            emit(j);
        } else if (cfg.format == "csv") {
            std::cout << csv.str();
        } else {
            emit(j);
        }
        return 0;
    }
};

// ---------------------------------------------------------------------------------------------

struct ConnectCmd {
    std::vector<double> x, hyper;
    std::string chart = "cartesian";
    double eta0 = pi / 4, t = 1.0;

    void bind(CLI::App* sub) {
        sub->add_option("--x", x, "endpoint x1 x2 x3 x4")->expected(4);
        sub->add_option("--hyper", hyper, "endpoint zeta1 zeta2 eta")->expected(3);
        sub->add_option("--chart", chart, "cartesian or hyper")->check(CLI::IsMember({"cartesian", "hyper"}))->capture_default_str();
        sub->add_option("--eta0", eta0, "initial eta (hyper chart)")->capture_default_str();
        sub->add_option("--t", t, "duration (hyper chart)")->capture_default_str();
    }

    int run(const RunConfig& cfg) const {
        if (x.empty() == hyper.empty()) throw UsageError("give exactly one of --x or --hyper");
        S3Point target = x.empty() ? from_hyper({hyper[0], hyper[1], hyper[2]}) : S3Point(x[0], x[1], x[2], x[3]);
        json j = envelope(cfg, "connect");
        j["chart"] = chart;
        j["target"] = point_json(target.vec());
        json list = json::array();
        if (chart == "cartesian") {
            for (const auto& s : connect_cartesian(target, std::max(1, cfg.n_max))) {
                list.push_back({{"label", s.label}, {"B", s.params.B}, {"C", s.params.C}, {"D", s.params.D}, {"t", s.params.t},
                                {"length", s.length}, {"endpoint_error", s.endpoint_error}, {"minimizer", s.minimizer}});
            }
        } else {
            BvpOptions o;
            o.model = cfg.model();
            o.max_turns = std::max(0, cfg.n_max);
            HyperPoint h = to_hyper(target, cfg.chart_eps);
            for (const auto& s : solve_bvp(h, eta0, t, o)) {
                // Re-verify by shooting the hyperspherical ODE.
                HyperState end = integrate_hyper(hyper_state_at(s.geo, 0.0), t, o.model);
                double err = std::max({std::abs(wrap_angle(end.zeta1 - h.zeta1)), std::abs(wrap_angle(end.zeta2 - h.zeta2)),
                                       std::abs(end.eta - h.eta)});
                list.push_back({{"psi1", s.geo.psi1()}, {"psi2", s.geo.psi2()}, {"A", s.geo.A}, {"sign", s.geo.sign},
                                {"turns", s.geo.turns}, {"H", s.geo.hamiltonian()}, {"length", std::sqrt(2 * s.geo.hamiltonian()) * t},
                                {"bvp_residual", s.residual}, {"shooting_error", err}, {"minimizer", s.minimizer}});
            }
            std::stable_sort(list.begin(), list.end(), [](const json& a, const json& b) { return a["length"].get<double>() < b["length"].get<double>(); });
        }
        j["solutions"] = list;
        emit(j);
        return list.empty() ? 3 : 0;
    }
};

// ---------------------------------------------------------------------------------------------

struct DistanceCmd {
    std::vector<double> target;
    double eta0 = pi / 4;

    void bind(CLI::App* sub) {
        sub->add_option("--target", target, "zeta1 zeta2 eta")->expected(3)->required();
        sub->add_option("--eta0", eta0, "base eta")->capture_default_str();
    }

    int run(const RunConfig& cfg) const {
        DistanceOptions o;
        o.bvp.model = cfg.model();
        o.bvp.max_turns = std::max(0, cfg.n_max);
        o.fd_step = 1e-6;
        DistanceResult d = distance({target[0], target[1], target[2]}, eta0, o);
        json j = envelope(cfg, "distance");
        j["target"] = target;
        j["distance"] = d.distance;
        j["length_scale"] = d.length_scale;
        j["psi1"] = d.psi1;
        j["psi2"] = d.psi2;
        j["H"] = d.H;
        j["sign"] = d.sign;
        j["turns"] = d.turns;
        j["bvp_residual"] = d.bvp_residual;
        j["critical_residual"] = d.critical_residual;
        j["critical_points"] = d.critical_points;
        emit(j);
        return 0;
    }
};

// ---------------------------------------------------------------------------------------------

struct ActionCmd {
    double zeta1 = 0, zeta2 = 0, eta0 = pi / 4, eta = pi / 4, psi1 = 0, psi2 = 0, t = 1;
    int sign = 1, turns = 0;
    std::string scan;
    double from = -1, to = 1;
    int steps = 200;

    void bind(CLI::App* sub) {
        sub->add_option("--zeta1", zeta1)->capture_default_str();
        sub->add_option("--zeta2", zeta2)->capture_default_str();
        sub->add_option("--eta0", eta0)->capture_default_str();
        sub->add_option("--eta", eta)->capture_default_str();
        sub->add_option("--psi1", psi1)->capture_default_str();
        sub->add_option("--psi2", psi2)->capture_default_str();
        sub->add_option("--t", t)->capture_default_str();
        sub->add_option("--sign", sign, "initial direction of eta")->capture_default_str();
        sub->add_option("--turns", turns, "turning points passed")->capture_default_str();
        sub->add_option("--scan", scan, "scan variable (tau): restricted action on psi = (tau, -tau)")->check(CLI::IsMember({"tau"}));
        sub->add_option("--from", from, "scan start")->capture_default_str();
        sub->add_option("--to", to, "scan end")->capture_default_str();
        sub->add_option("--steps", steps, "scan intervals")->check(CLI::PositiveNumber)->capture_default_str();
    }

    int run(const RunConfig& cfg) const {
        HyperModel m = cfg.model();
        if (!scan.empty()) {
            auto poles = restricted_action_poles(eta, 64, m);
            std::cout << "tau,A,f,pole_distance\n";
            for (int k = 0; k <= steps; ++k) {
                double tau = from + (to - from) * k / steps;
                double pd = std::numeric_limits<double>::infinity();
                for (double p : poles) pd = std::min({pd, std::abs(tau - p), std::abs(tau + p)});
                double A = NAN, f = NAN;
                try {
                    RestrictedAction r = restricted_action(tau, zeta1, zeta2, eta, m);
                    A = r.A;
                    f = r.value;
                } catch (const Error&) {
                }
                std::cout << fmt(tau) << "," << fmt(A) << "," << fmt(f) << "," << fmt(pd) << "\n";
            }
            return 0;
        }
        ActionOptions o;
        o.model = m;
        o.cross_check = true;
        ActionEval e = modified_action(zeta1, zeta2, eta0, eta, psi1, psi2, t, {sign, turns, std::nullopt}, o);
        json j = envelope(cfg, "action");
        j["value"] = e.value;
        j["A"] = e.A;
        j["quadrature"] = e.quadrature ? *e.quadrature : NAN;
        j["fallback"] = e.fallback;
        j["H"] = e.geo.hamiltonian();
        emit(j);
        return 0;
    }
};

// ---------------------------------------------------------------------------------------------

struct KernelCmd {
    double u = 1, zeta1 = 0.3, zeta2 = -0.1, eta = pi / 3, q = 2, C = 1, truncation = 0, exclusion = 1e-6;
    std::string scan;
    double from = 0.1, to = 2;
    int steps = 20;

    void bind(CLI::App* sub) {
        sub->add_option("--u", u, "time parameter")->capture_default_str();
        sub->add_option("--zeta1", zeta1)->capture_default_str();
        sub->add_option("--zeta2", zeta2)->capture_default_str();
        sub->add_option("--eta", eta)->capture_default_str();
        sub->add_option("--q", q, "power of u")->capture_default_str();
        sub->add_option("--C", C, "normalization")->capture_default_str();
        sub->add_option("--truncation", truncation, "tau window (0: automatic)")->capture_default_str();
        sub->add_option("--exclusion", exclusion, "pole exclusion half-width")->capture_default_str();
        sub->add_option("--scan", scan, "scan variable (u)")->check(CLI::IsMember({"u"}));
        sub->add_option("--from", from, "scan start")->capture_default_str();
        sub->add_option("--to", to, "scan end")->capture_default_str();
        sub->add_option("--steps", steps, "scan intervals")->check(CLI::PositiveNumber)->capture_default_str();
    }

    KernelResult eval(const RunConfig& cfg, double uu) const {
        KernelConfig kc;
        kc.u = uu;
        kc.q = q;
        kc.C_norm = C;
        kc.tau_truncation = truncation;
        kc.pole_exclusion = exclusion;
        kc.model = cfg.model();
        return kernel_quadrature(kc, {zeta1, zeta2, eta}, constant_volume(1.0));
    }

    int run(const RunConfig& cfg) const {
        if (!scan.empty()) {
            std::cout << "u,value,error_estimate,truncation,pole_count\n";
            for (int k = 0; k <= steps; ++k) {
                double uu = from + (to - from) * k / steps;
                KernelResult r = eval(cfg, uu);
                std::cout << fmt(uu) << "," << fmt(r.value) << "," << fmt(r.error_estimate) << "," << fmt(r.truncation) << ","
                          << r.pole_count << "\n";
            }
            return 0;
        }
        KernelResult r = eval(cfg, u);
        json j = envelope(cfg, "kernel");
        j["value"] = r.value;
        j["error_estimate"] = r.error_estimate;
        j["truncation"] = r.truncation;
        j["pole_count"] = r.pole_count;
        j["window_change"] = r.window_change;
        j["exclusion_change"] = r.exclusion_change;
        emit(j);
        return 0;
    }
};

// ---------------------------------------------------------------------------------------------

struct VerifyCmd {
    std::string suite;
    int count = 20;

    void bind(CLI::App* sub) {
        sub->add_option("suite", suite, "conservation, involutivity, hj, ghj, transport-symmetry or areas")->required();
        sub->add_option("--count", count, "number of random cases")->check(CLI::PositiveNumber)->capture_default_str();
    }

    int run(const RunConfig& cfg) const {
        auto it = suites().find(suite);
        if (it == suites().end()) throw UsageError("unknown suite '" + suite + "'");
        SuiteArgs a{count, cfg.seed, cfg};
        json j = envelope(cfg, "verify");
        j["suite"] = suite;
        j["count"] = count;
        j["result"] = it->second(a);
        emit(j);
        return j["result"]["pass"].get<bool>() ? 0 : 1;
    }
};

int exit_code(ErrorCode c) {
    switch (c) {
    case ErrorCode::NoSolutionInBranchRange:
    case ErrorCode::NoCriticalPointFound:
    case ErrorCode::NoRootInBranch: return 3;
    default: return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sub-Riemannian geometry on S^3"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    cfg.bind(app);
    app.set_version_flag("--version", S3SR_VERSION);

    GeodesicCmd geo;
    ConnectCmd con;
    DistanceCmd dis;
    ActionCmd act;
    KernelCmd ker;
    VerifyCmd ver;
    auto* s_geo = app.add_subcommand("geodesic", "sample a closed-form geodesic");
    auto* s_con = app.add_subcommand("connect", "enumerate geodesics from the identity to an endpoint");
    auto* s_dis = app.add_subcommand("distance", "action-based distance from (0, 0, eta0)");
    auto* s_act = app.add_subcommand("action", "modified action, or a restricted-action scan");
    auto* s_ker = app.add_subcommand("kernel", "heat-kernel quadrature with V = 1");
    auto* s_ver = app.add_subcommand("verify", "run an invariant suite");
    geo.bind(s_geo);
    con.bind(s_con);
    dis.bind(s_dis);
    act.bind(s_act);
    ker.bind(s_ker);
    ver.bind(s_ver);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        cfg.validate();
        if (*s_geo) return geo.run(cfg);
        if (*s_con) return con.run(cfg);
        if (*s_dis) return dis.run(cfg);
        if (*s_act) return act.run(cfg);
        if (*s_ker) return ker.run(cfg);
        if (*s_ver) return ver.run(cfg);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
