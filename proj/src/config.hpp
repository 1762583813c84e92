#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gmclab {

// Experiment kinds mirror the CLI subcommands.
inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = {
        "identities", "covcheck",  "sample",    "gmc-moments",   "series-check",
        "growth-report", "thickness", "badmass", "toy-martingale"};
    return kinds;
}

struct ExperimentConfig {
    std::string kind;

    // field / grid
    int dim = 1;
    double frak_a = 0.0;
    double alpha = 1.0;
    int grid_m = 512;
    double t_max = 8.0;
    double delta_u = 0.25;
    int kernel_resolution = 4096;

    // run control
    std::uint64_t seed = 1;
    long replicas = 2000;
    int threads = 0;  // 0 = hardware concurrency
    std::string out_dir = "";

    // parameters
    double gamma = 0.5;
    double eta = 0.2;
    int k = 1;
    int k_max = 2;
    double gamma_hat = -1.0;  // < 0 selects gamma + 0.6 (sqrt(2d) - gamma)
    double series_tol = 1e-8;
    double radius_factor = 0.8;
    int n_gamma_prime = 12;

    // schedules; eps and delta are given as exponents n (eps = e^{-n})
    std::vector<int> eps_log_schedule;
    std::vector<int> delta_log_schedule;
    std::vector<double> t_schedule;
    std::vector<double> gamma_schedule;

    // test function (smoothed indicator of [f_lo, f_hi]^d)
    double f_lo = 0.25;
    double f_hi = 0.75;
    double f_width = 0.1;

    // "truncated" or "mollified"
    std::string regularization = "truncated";

    // throws std::invalid_argument naming the violated invariant
    void validate() const;

    // canonical serialization: sorted keys, fixed 12-significant-digit
    // floats; byte-stable for identical configs
    std::string canonical_json() const;

    static ExperimentConfig defaults(const std::string& kind);
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
};

}  // namespace gmclab
