#pragma once

#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "json_io.hpp"
#include "s3sr/error.hpp"
#include "s3sr/hyper.hpp"
#include "s3sr/version.hpp"

namespace s3sr::tools {

// Shared run settings. Precedence: command-line flags, then the --config file
// (flat key=value lines), then these defaults.
struct RunConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    double fd_step = 1e-5;
    int n_min = -8;
    int n_max = 8;
    double chart_eps = 1e-8;
    std::string format = "json";
    std::uint64_t seed = 12345;
    double kappa = 4.0;

    HyperModel model() const { return {kappa}; }

    void validate() const {
        if (!(rtol > 0 && atol > 0 && fd_step > 0 && chart_eps > 0)) throw Error(ErrorCode::DomainError, "tolerances must be positive");
        if (n_min > n_max) throw Error(ErrorCode::DomainError, "n_min > n_max");
        if (format != "json" && format != "csv") throw Error(ErrorCode::DomainError, "format must be json or csv");
        if (!(kappa > 0)) throw Error(ErrorCode::DomainError, "kappa must be positive");
    }

    json snapshot() const {
        return {{"rtol", rtol}, {"atol", atol}, {"fd_step", fd_step}, {"n_min", n_min}, {"n_max", n_max},
                {"chart_eps", chart_eps}, {"format", format}, {"seed", seed}, {"kappa", kappa}};
    }

    void bind(CLI::App& app) {
        app.set_config("--config", "", "key=value configuration file");
        app.add_option("--rtol", rtol, "relative tolerance")->capture_default_str();
        app.add_option("--atol", atol, "absolute tolerance")->capture_default_str();
        app.add_option("--fd-step,--fd_step", fd_step, "finite-difference step")->capture_default_str();
        app.add_option("--n-min,--n_min", n_min, "lowest branch index")->capture_default_str();
        app.add_option("--n-max,--n_max", n_max, "highest branch index")->capture_default_str();
        app.add_option("--chart-eps,--chart_eps", chart_eps, "distance from the chart boundary")->capture_default_str();
        app.add_option("--format", format, "json or csv")->capture_default_str();
        app.add_option("--seed", seed, "seed for randomized checks")->capture_default_str();
        app.add_option("--kappa", kappa, "eta-weight of the hyperspherical frame")->capture_default_str();
    }
};

inline json envelope(const RunConfig& cfg, const std::string& command) {
    return {{"version", S3SR_VERSION}, {"command", command}, {"config", cfg.snapshot()}};
}

}  // namespace s3sr::tools
