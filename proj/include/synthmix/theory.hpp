#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "synthmix/config.hpp"

namespace synthmix {

// Self-consistent triple capturing real-data, synthetic-data and generator
// contributions in high dimension.
struct Deltas {
    double delta_r = 0.0;
    double delta_s = 0.0;
    double delta_g = 0.0;
    double residual = 0.0;
    std::uint64_t iterations = 0;
};

// Scalar constants of the mixed-data decision-statistics formulas.
// Evaluation order matters: (alpha, lambda) -> (a, b, c) -> h2 ->
// (a1, b1, b2) -> h1, since a1/b1/b2 carry h2 in their denominators.
struct ScalarLedger {
    double alpha, lambda;
    double a, b, c;
    double a1, b1, b2;
    double h1, h2;
};

struct TheoryStats {
    double mean = 0.0;           // decision-function mean on the +1 class
    double second_moment = 0.0;  // nu
    double variance = 0.0;       // nu - mean^2
    double accuracy = 0.5;       // Phi(mean / sqrt(variance))
};

double normal_cdf(double x);  // via erfc, |error| < 1e-15

// Damped Picard iteration from (0,0,0), sweep order delta_g, delta_r,
// delta_s; damping 0.5 kicks in when the residual grows. The degenerate
// alpha*(1-pi) == 0 case short-circuits to the real-only scalar equation.
Deltas solve_deltas(double eta, double eta_hat, double pi, double alpha,
                    double gamma, double tol = 1e-12,
                    std::uint64_t max_iter = 100000);

ScalarLedger build_ledger(const Deltas& d, const DerivedRatios& r, double gamma);

TheoryStats theorem1_stats(const ScalarLedger& L, double mu_norm_sq);

// Fully synthetic, label-noise-only closed form (identity feature covariance).
TheoryStats corollary_synthetic_stats(double eta_s, double alpha, double lambda,
                                      double gamma, double mu_norm_sq);

// Label-noise level where accuracy crosses 0.5: phi / (phi + rho).
double critical_epsilon(double rho, double phi);

// Synthetic covariance sigma^2*I and mean beta*mu + mu_perp; delta solves a
// cubic, all bilinear forms are evaluated on the span of {mu, mu_perp}.
TheoryStats isotropic_stats(const ExperimentConfig& cfg);

// Arbitrary deterministic synthetic covariance C = basis*diag(d)*basis^T and
// shifted mean mu_beta. mu/mu_beta are expressed in the same coordinates as
// cov_basis columns.
TheoryStats general_covariance_stats(const std::vector<double>& cov_eigenvalues,
                                     const Eigen::VectorXd& mu,
                                     const Eigen::VectorXd& mu_beta,
                                     const Eigen::MatrixXd& cov_basis,
                                     const DerivedRatios& ratios, double gamma);

// Density of the limiting spectral law at aspect ratio p/n_hat; the atom at 0
// (weight 1 - 1/ratio when ratio > 1) is reported separately.
double marchenko_pastur_density(double x, double ratio);
double marchenko_pastur_point_mass(double ratio);
void marchenko_pastur_support(double ratio, double& lo, double& hi);

} // namespace synthmix
