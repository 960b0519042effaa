#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "synthmix/config.hpp"
#include "synthmix/rng.hpp"
#include "synthmix/theory.hpp"

namespace synthmix {

// Columns are samples. true_labels/keep_mask only exist for synthetic data.
struct LabeledMatrix {
    Eigen::MatrixXd features;                  // p x k
    Eigen::VectorXd labels;                    // k, entries in {-1,+1}
    std::optional<Eigen::VectorXd> true_labels;
    std::optional<Eigen::VectorXd> keep_mask;  // entries in {0,1}
};

struct GeneratorModel {
    Eigen::VectorXd mu_hat;
    Eigen::MatrixXd cov_hat;
    Eigen::MatrixXd cov_sqrt;  // symmetric PSD square root of cov_hat
};

struct RidgeModel {
    Eigen::VectorXd weights;
    double gamma = 0.0;
};

struct EmpiricalStats {
    double mean = 0.0;      // mean of y * w^T x
    double variance = 0.0;
    double accuracy = 0.0;
};

struct MonteCarloResult {
    double mean_acc = 0.0;
    double std_acc = 0.0;
    double mean_decision_mean = 0.0;
    double mean_decision_var = 0.0;
};

// x_i = y_i * mu + z_i, z ~ N(0, I); labels uniform on {-1,+1}.
LabeledMatrix sample_real(std::uint64_t n, std::uint64_t p,
                          const Eigen::VectorXd& mu, Rng& rng);

// Empirical (mu_hat, C_hat) and the symmetric square root of C_hat
// (eigendecomposition, negative roundoff eigenvalues clamped to 0).
GeneratorModel fit_generator(const LabeledMatrix& data);

// x~ = ybar * mu_hat + C^{1/2} z; observed labels flip with prob epsilon.
// One flip draw per sample, in sample order.
LabeledMatrix sample_synthetic(std::uint64_t m, const GeneratorModel& gen,
                               double epsilon, Rng& rng);

// Bernoulli keep-mask: keep prob phi when labels agree, rho when they do not.
LabeledMatrix prune(const LabeledMatrix& data, double rho, double phi, Rng& rng);

// Solves ((1/N) X X^T + gamma I) w = (1/N) X y by LLT; dropped synthetic
// columns are zeroed but still count toward N.
RidgeModel train_ridge(const LabeledMatrix& real, const LabeledMatrix& synthetic,
                       double gamma);

// Fresh real test points; sign(0) counts as +1.
EmpiricalStats decision_stats(const RidgeModel& model, const Eigen::VectorXd& mu,
                              std::uint64_t n_test, Rng& rng);

// Full pipeline per trial, independent substreams per (seed, purpose, trial).
MonteCarloResult monte_carlo(const ExperimentConfig& cfg, std::uint64_t trials,
                             std::uint64_t n_test);

// Run one trial of the pipeline and return the trained model (used by the
// Gaussianity checks that need a fixed w).
RidgeModel run_pipeline_trial(const ExperimentConfig& cfg, std::uint64_t trial,
                              const Eigen::VectorXd& mu);

// Ascending eigenvalues of a symmetric matrix.
Eigen::VectorXd spectrum(const Eigen::MatrixXd& cov);

// mu materialized as mu_norm * e_1 (direction is irrelevant by rotation
// invariance; fixing it keeps tests deterministic).
Eigen::VectorXd make_mu(std::uint64_t p, double mu_norm);

} // namespace synthmix
