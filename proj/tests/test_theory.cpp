#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "synthmix/theory.hpp"

using namespace synthmix;

namespace {

// reference point frozen from a 200-digit fixed-point iteration
// (eta = eta_hat = 0.5, pi = 0.5, alpha = lambda = 1, gamma = 1)
constexpr double kA_dr = 0.2864119419453754696898;
constexpr double kA_ds = 0.2571217262874901439997;
constexpr double kA_dg = 0.1139157553148024091548;
constexpr double kA_b = 1.745737264318958034607;
constexpr double kA_a1 = 0.05062936365098826559171;
constexpr double kA_b1 = 0.04272708230216242198534;
constexpr double kA_b2 = 0.03443487761963695832438;
constexpr double kA_h1 = 0.9149357587293747760839;
constexpr double kA_h2 = 0.9790833133450167939342;
constexpr double kA_mean = 0.1808200590410854683566;
constexpr double kA_nu = 0.1756558831650605501477;
constexpr double kA_acc = 0.6837577377393746324499;

// second frozen point (eta = 0.1, eta_hat = 0.2, pi = 0.5, alpha = lambda =
// 0.8, gamma = 1, mu_norm_sq = 0.49)
constexpr double kB_dr = 0.0542622840474690073377;
constexpr double kB_ds = 0.04167317382160915526374;
constexpr double kB_mean = 0.1857999548514548058936;
constexpr double kB_acc = 0.7337976915601055401448;

DerivedRatios make_ratios(double eta, double eta_hat, double pi, double alpha,
                          double lambda) {
    DerivedRatios r;
    r.eta = eta;
    r.eta_hat = eta_hat;
    r.pi = pi;
    r.alpha = alpha;
    r.lambda = lambda;
    return r;
}

double rhs_residual(const Deltas& d, double eta, double eta_hat, double pi,
                    double alpha, double gamma) {
    const double as = alpha * (1.0 - pi);
    const double g = (as / (1.0 + d.delta_s)) * eta_hat /
                     (gamma + pi / (1.0 + d.delta_r) +
                      as / ((1.0 + d.delta_s) * (1.0 + d.delta_g)));
    const double r = (eta / eta_hat) * (1.0 + d.delta_s) / as * d.delta_g;
    const double s = alpha * d.delta_r / (1.0 + d.delta_g);
    return std::max({std::abs(g - d.delta_g), std::abs(r - d.delta_r),
                     std::abs(s - d.delta_s)});
}

} // namespace

TEST_CASE("normal_cdf basics") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.0) == doctest::Approx(0.841344746068543).epsilon(1e-12));
    CHECK(normal_cdf(-1.0) + normal_cdf(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(normal_cdf(10.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("solve_deltas: vanishing-dimension limit") {
    const Deltas d = solve_deltas(1e-8, 1e-8, 0.5, 1.0, 1.0);
    CHECK(d.delta_r < 1e-6);
    CHECK(d.delta_s < 1e-6);
    CHECK(d.delta_g < 1e-6);
}

TEST_CASE("solve_deltas: real-only branch (pi = 1)") {
    const double eta = 0.7, gamma = 0.9;
    const Deltas d = solve_deltas(eta, 0.4, 1.0, 1.0, gamma);
    CHECK(d.delta_s == 0.0);
    CHECK(d.delta_g == 0.0);
    // delta solves delta = eta / (gamma + 1/(1+delta))
    const double lhs = d.delta_r;
    const double rhs = eta / (gamma + 1.0 / (1.0 + d.delta_r));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("solve_deltas: frozen high-precision reference points") {
    const Deltas a = solve_deltas(0.5, 0.5, 0.5, 1.0, 1.0);
    CHECK(std::abs(a.delta_r - kA_dr) < 1e-10);
    CHECK(std::abs(a.delta_s - kA_ds) < 1e-10);
    CHECK(std::abs(a.delta_g - kA_dg) < 1e-10);
    CHECK(a.residual <= 1e-12);

    const Deltas b = solve_deltas(0.1, 0.2, 0.5, 0.8, 1.0);
    CHECK(std::abs(b.delta_r - kB_dr) < 1e-10);
    CHECK(std::abs(b.delta_s - kB_ds) < 1e-10);
}

TEST_CASE("solve_deltas: fixed-point residual on random draws") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double eta = 0.02 + 2.0 * U(gen);
        const double eta_hat = 0.02 + 2.0 * U(gen);
        const double pi = 0.05 + 0.9 * U(gen);
        const double alpha = 0.05 + 0.95 * U(gen);
        const double gamma = 0.1 + 5.0 * U(gen);
        const Deltas d = solve_deltas(eta, eta_hat, pi, alpha, gamma);
        CHECK(d.delta_r >= 0.0);
        CHECK(d.delta_s >= 0.0);
        CHECK(d.delta_g >= 0.0);
        CHECK(rhs_residual(d, eta, eta_hat, pi, alpha, gamma) < 1e-10);
    }
}

TEST_CASE("solve_deltas: monotone vanishing under (eta, eta_hat) scaling") {
    const double t = 1e-6;
    const Deltas d = solve_deltas(0.8 * t, 1.2 * t, 0.4, 0.9, 0.7);
    CHECK(std::max({d.delta_r, d.delta_s, d.delta_g}) < 1e-4);
}

TEST_CASE("build_ledger: low-dimensional limit") {
    const double pi = 0.35, alpha = 0.75, lambda = 0.4, gamma = 1.3;
    const DerivedRatios r = make_ratios(1e-8, 1e-8, pi, alpha, lambda);
    const Deltas d = solve_deltas(r.eta, r.eta_hat, pi, alpha, gamma);
    const ScalarLedger L = build_ledger(d, r, gamma);
    CHECK(std::abs(L.a - (pi + alpha * (1.0 - pi))) < 1e-5);
    CHECK(std::abs(L.b - gamma - L.a) < 1e-5);
    CHECK(std::abs(L.c - (pi + lambda * (1.0 - pi))) < 1e-5);
    CHECK(std::abs(L.a1) < 1e-5);
    CHECK(std::abs(L.b1) < 1e-5);
    CHECK(std::abs(L.b2) < 1e-5);
    CHECK(std::abs(L.h1 - 1.0) < 1e-5);
    CHECK(std::abs(L.h2 - 1.0) < 1e-5);
}

TEST_CASE("build_ledger: real-only branch zeroes the synthetic entries") {
    const DerivedRatios r = make_ratios(0.6, 0.3, 1.0, 0.5, 0.2);
    const Deltas d = solve_deltas(r.eta, r.eta_hat, 1.0, r.alpha, 2.0);
    const ScalarLedger L = build_ledger(d, r, 2.0);
    CHECK(L.a == doctest::Approx(1.0 / (1.0 + d.delta_r)).epsilon(1e-14));
    CHECK(L.c == doctest::Approx(L.a).epsilon(1e-14));
    CHECK(L.b == doctest::Approx(2.0 + L.a).epsilon(1e-14));
    CHECK(L.b1 == 0.0);
    CHECK(L.b2 == 0.0);
}

TEST_CASE("build_ledger: frozen reference ledger") {
    const DerivedRatios r = make_ratios(0.5, 0.5, 0.5, 1.0, 1.0);
    const Deltas d = solve_deltas(0.5, 0.5, 0.5, 1.0, 1.0);
    const ScalarLedger L = build_ledger(d, r, 1.0);
    CHECK(std::abs(L.b - kA_b) < 1e-10);
    CHECK(std::abs(L.a1 - kA_a1) < 1e-10);
    CHECK(std::abs(L.b1 - kA_b1) < 1e-10);
    CHECK(std::abs(L.b2 - kA_b2) < 1e-10);
    CHECK(std::abs(L.h1 - kA_h1) < 1e-10);
    CHECK(std::abs(L.h2 - kA_h2) < 1e-10);
    // the ledger's b reproduces the solver's internal denominator
    const double b_solver = 1.0 + 0.5 / (1.0 + d.delta_r) +
                            0.5 / ((1.0 + d.delta_s) * (1.0 + d.delta_g));
    CHECK(std::abs(L.b - b_solver) < 1e-12);
}

TEST_CASE("theorem1_stats: frozen reference statistics") {
    const DerivedRatios rA = make_ratios(0.5, 0.5, 0.5, 1.0, 1.0);
    const ScalarLedger LA =
        build_ledger(solve_deltas(0.5, 0.5, 0.5, 1.0, 1.0), rA, 1.0);
    const TheoryStats sA = theorem1_stats(LA, 0.49);
    CHECK(std::abs(sA.mean - kA_mean) < 1e-10);
    CHECK(std::abs(sA.second_moment - kA_nu) < 1e-10);
    CHECK(std::abs(sA.accuracy - kA_acc) < 1e-10);

    const DerivedRatios rB = make_ratios(0.1, 0.2, 0.5, 0.8, 0.8);
    const ScalarLedger LB =
        build_ledger(solve_deltas(0.1, 0.2, 0.5, 0.8, 1.0), rB, 1.0);
    const TheoryStats sB = theorem1_stats(LB, 0.49);
    CHECK(std::abs(sB.mean - kB_mean) < 1e-10);
    CHECK(std::abs(sB.accuracy - kB_acc) < 1e-10);
}

TEST_CASE("theorem1_stats: lambda = 0 with pi = 0 gives chance accuracy") {
    const DerivedRatios r = make_ratios(0.2, 0.3, 0.0, 0.6, 0.0);
    const ScalarLedger L =
        build_ledger(solve_deltas(0.2, 0.3, 0.0, 0.6, 1.0), r, 1.0);
    const TheoryStats s = theorem1_stats(L, 0.49);
    CHECK(s.mean == 0.0);
    CHECK(s.accuracy == 0.5);
}

TEST_CASE("theorem1_stats: clean verified synthetic data helps") {
    // near-infinite samples, oracle pruner, no label noise: the mixed
    // classifier beats real-only at the same real-sample budget
    const double gamma = 1.0, musq = 0.49;
    const DerivedRatios r_mix = make_ratios(1e-8, 1e-8, 0.5, 1.0, 1.0);
    const TheoryStats mixed = theorem1_stats(
        build_ledger(solve_deltas(1e-8, 1e-8, 0.5, 1.0, gamma), r_mix, gamma), musq);
    const DerivedRatios r_real = make_ratios(2e-8, 1e-8, 1.0, 1.0, 1.0);
    const TheoryStats real_only = theorem1_stats(
        build_ledger(solve_deltas(2e-8, 1e-8, 1.0, 1.0, gamma), r_real, gamma), musq);
    CHECK(mixed.accuracy >= real_only.accuracy);
}

TEST_CASE("corollary_synthetic_stats: transition pinning and symmetry") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double rho = U(gen), phi = 0.05 + 0.95 * U(gen);
        const double eta_s = 2.0 * U(gen), gamma = 0.1 + 3.0 * U(gen);
        const double musq = 0.1 + 2.0 * U(gen);
        const double eps = critical_epsilon(rho, phi);
        const double alpha = phi * (1.0 - eps) + rho * eps;
        const double lambda = phi * (1.0 - eps) - rho * eps;
        CHECK(std::abs(lambda) < 1e-14);
        const TheoryStats s = corollary_synthetic_stats(eta_s, alpha, lambda, gamma, musq);
        CHECK(std::abs(s.accuracy - 0.5) < 1e-12);

        // accuracy symmetry through the transition
        const double l2 = 0.3 * alpha;
        const TheoryStats sp = corollary_synthetic_stats(eta_s, alpha, l2, gamma, musq);
        const TheoryStats sm = corollary_synthetic_stats(eta_s, alpha, -l2, gamma, musq);
        CHECK(sp.mean == doctest::Approx(-sm.mean).epsilon(1e-14));
        CHECK(sp.accuracy == doctest::Approx(1.0 - sm.accuracy).epsilon(1e-12));
        CHECK(sp.second_moment == doctest::Approx(sm.second_moment).epsilon(1e-14));
    }
}

TEST_CASE("corollary_synthetic_stats: closed-form delta solves its quadratic") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double eta_s = 3.0 * U(gen), alpha = 0.05 + 0.95 * U(gen);
        const double gamma = 0.1 + 3.0 * U(gen);
        const double ds = (eta_s * alpha - alpha - gamma +
                           std::sqrt(std::pow(alpha + gamma - eta_s * alpha, 2) +
                                     4.0 * eta_s * alpha * gamma)) /
                          (2.0 * gamma);
        const double resid = gamma * ds * ds + (alpha + gamma - eta_s * alpha) * ds -
                             eta_s * alpha;
        CHECK(std::abs(resid) < 1e-12);
    }
}

TEST_CASE("corollary_synthetic_stats: eta_s = 0 reduces to infinite-sample form") {
    const double alpha = 0.7, lambda = 0.5, gamma = 0.8, musq = 1.0;
    const TheoryStats s = corollary_synthetic_stats(0.0, alpha, lambda, gamma, musq);
    const double D = alpha * musq + alpha + gamma;  // delta_s = 0, h = 1
    CHECK(s.mean == doctest::Approx(lambda * musq / D).epsilon(1e-14));
    CHECK(s.second_moment ==
          doctest::Approx(lambda * lambda * musq * (musq + 1.0) / (D * D)).epsilon(1e-14));
}

TEST_CASE("critical_epsilon") {
    CHECK(critical_epsilon(0.3, 0.8) == doctest::Approx(8.0 / 11.0).epsilon(1e-15));
    CHECK(critical_epsilon(0.0, 1.0) == 1.0);
    CHECK(critical_epsilon(0.4, 0.4) == 0.5);
    CHECK_THROWS_AS(critical_epsilon(0.3, 0.0), ConfigError);
}

TEST_CASE("cross-formula consistency: shift-free routes agree") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double pis[3] = {0.0, 0.3, 0.7};
    for (int i = 0; i < 60; ++i) {
        ExperimentConfig cfg;
        cfg.p = 100;
        const double pi = pis[i % 3];
        cfg.n = (pi == 0.0) ? 0 : static_cast<std::uint64_t>(1000 * pi);
        cfg.m = 1000 - cfg.n;
        cfg.n_hat = 1000000000000ULL;  // eta_hat ~ 1e-10: no distribution shift
        cfg.mu_norm = 0.3 + U(gen);
        cfg.gamma = 0.1 + 9.9 * U(gen);
        cfg.epsilon = U(gen);
        cfg.rho = U(gen);
        cfg.phi = 0.2 + 0.8 * U(gen);
        const DerivedRatios r = derive(cfg);
        if (!(r.alpha > 0.02)) continue;

        const TheoryStats iso = isotropic_stats(cfg);
        const TheoryStats t1 = theorem1_stats(
            build_ledger(solve_deltas(r.eta, r.eta_hat, r.pi, r.alpha, cfg.gamma),
                         r, cfg.gamma),
            cfg.mu_norm * cfg.mu_norm);
        CHECK(std::abs(iso.mean - t1.mean) < 1e-8);
        CHECK(std::abs(iso.second_moment - t1.second_moment) < 1e-8);
        CHECK(std::abs(iso.accuracy - t1.accuracy) < 1e-8);

        if (pi == 0.0) {
            const TheoryStats cor = corollary_synthetic_stats(
                *r.eta_s, r.alpha, r.lambda, cfg.gamma, cfg.mu_norm * cfg.mu_norm);
            CHECK(std::abs(iso.mean - cor.mean) < 1e-8);
            CHECK(std::abs(iso.second_moment - cor.second_moment) < 1e-8);
        }
    }
}

TEST_CASE("cross-formula consistency: general covariance specializations") {
    std::mt19937_64 gen(19);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        ExperimentConfig cfg;
        cfg.p = 80;
        cfg.n = 150;
        cfg.m = 250;
        cfg.n_hat = 100;
        cfg.mu_norm = 0.5 + U(gen);
        cfg.gamma = 0.3 + 2.0 * U(gen);
        cfg.epsilon = 0.3 * U(gen);
        cfg.rho = 0.3 * U(gen);
        cfg.phi = 0.5 + 0.5 * U(gen);
        cfg.sigma = 0.6 + U(gen);
        cfg.beta = 0.7 + 0.5 * U(gen);
        cfg.mu_perp_norm = 0.4 * U(gen);
        const DerivedRatios r = derive(cfg);

        const Eigen::Index p = static_cast<Eigen::Index>(cfg.p);
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
        mu(0) = cfg.mu_norm;
        Eigen::VectorXd mu_beta = cfg.beta * mu;
        mu_beta(1) += cfg.mu_perp_norm;

        // random orthogonal basis exercises the eigenbasis path
        Eigen::MatrixXd G(p, p);
        for (Eigen::Index a = 0; a < p; ++a)
            for (Eigen::Index b = 0; b < p; ++b) G(a, b) = N(gen);
        Eigen::MatrixXd Qb = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();

        const std::vector<double> d_iso(cfg.p, cfg.sigma * cfg.sigma);
        const TheoryStats gen_iso =
            general_covariance_stats(d_iso, mu, mu_beta, Qb, r, cfg.gamma);
        const TheoryStats iso = isotropic_stats(cfg);
        CHECK(std::abs(gen_iso.mean - iso.mean) < 1e-8);
        CHECK(std::abs(gen_iso.second_moment - iso.second_moment) < 1e-8);
        CHECK(std::abs(gen_iso.accuracy - iso.accuracy) < 1e-8);
    }
}

TEST_CASE("marchenko-pastur density") {
    double lo, hi;
    marchenko_pastur_support(1.0, lo, hi);
    CHECK(lo == 0.0);
    CHECK(hi == 4.0);

    CHECK(marchenko_pastur_density(5.0, 1.0) == 0.0);
    CHECK(marchenko_pastur_density(-0.1, 0.5) == 0.0);
    CHECK(marchenko_pastur_density(0.05, 0.5) == 0.0);  // below lower edge

    // density + atom integrate to one; the substitution x = lo + (hi-lo)
    // sin^2(t) absorbs the square-root edge singularities
    for (double ratio : {0.1, 0.5, 1.0, 2.0}) {
        marchenko_pastur_support(ratio, lo, hi);
        const int K = 200000;
        double integral = 0.0;
        const double dt = 1.5707963267948966 / K;
        for (int i = 0; i < K; ++i) {
            const double t = (i + 0.5) * dt;
            const double s = std::sin(t), c = std::cos(t);
            const double x = lo + (hi - lo) * s * s;
            integral += marchenko_pastur_density(x, ratio) * (hi - lo) * 2.0 * s * c * dt;
        }
        integral += marchenko_pastur_point_mass(ratio);
        CHECK(std::abs(integral - 1.0) < 1e-6);
    }

    CHECK(marchenko_pastur_point_mass(2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(marchenko_pastur_point_mass(0.5) == 0.0);
    CHECK_THROWS_AS(marchenko_pastur_density(1.0, 0.0), ConfigError);
}

TEST_CASE("invalid regimes are rejected, not silently returned") {
    CHECK_THROWS_AS(solve_deltas(0.5, 0.5, 0.5, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(corollary_synthetic_stats(1.0, 0.7, 0.5, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(corollary_synthetic_stats(1.0, 0.0, 0.0, 1.0, 1.0), ConfigError);
}
