#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace synthmix {

// Invalid user-facing parameterization (bad field value, parse failure).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The closed-form theory is outside its validity region (h <= 0, variance <= 0).
struct RegimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solver failure (non-convergence, NaN/Inf).
struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All free parameters of the experiment. n/m are the real/synthetic training
// counts, n_hat the generator's sample count. sigma, beta, mu_perp_norm only
// matter for the shifted-covariance variants.
struct ExperimentConfig {
    std::uint64_t p = 0;
    std::uint64_t n = 0;
    std::uint64_t m = 0;
    std::uint64_t n_hat = 0;
    double mu_norm = 0.0;
    double gamma = 0.0;
    double epsilon = 0.0;
    double rho = 0.0;
    double phi = 1.0;
    double sigma = 1.0;
    double beta = 1.0;
    double mu_perp_norm = 0.0;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError naming the offending field
};

struct DerivedRatios {
    double eta = 0.0;      // p / (n + m)
    double eta_hat = 0.0;  // p / n_hat
    double pi = 0.0;       // n / (n + m)
    std::optional<double> eta_s;  // p / m, absent when m == 0
    double alpha = 0.0;    // phi(1-eps) + rho*eps
    double lambda = 0.0;   // phi(1-eps) - rho*eps
};

DerivedRatios derive(const ExperimentConfig& cfg);

// Flat JSON object, snake_case keys matching the struct fields exactly.
// Unknown keys are an error so typos in sweep scripts fail fast.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_json(const std::string& text);

std::string config_to_json(const ExperimentConfig& cfg);

} // namespace synthmix
