#include "synthmix/theory.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace synthmix {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool finite3(double a, double b, double c) {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c);
}

// Positive root of g*d^2 + (g + pi - eta)*d - eta = 0, written to avoid
// cancellation when the linear coefficient is large.
double real_only_delta(double eta, double pi, double gamma) {
    if (eta == 0.0) return 0.0;
    const double B = gamma + pi - eta;
    const double disc = std::sqrt(B * B + 4.0 * gamma * eta);
    return (B >= 0.0) ? 2.0 * eta / (B + disc) : (disc - B) / (2.0 * gamma);
}

struct BilinearSet {
    // u^T Qbar v and u^T Qbar^2 v / u^T Qbar C Qbar v for u,v in {mu, mu_beta}
    double q_mm, q_mb, q_bb;
    double q2_mm, q2_mb, q2_bb;      // Qbar^2 forms
    double qc_mm, qc_mb, qc_bb;      // Qbar C Qbar forms
};

struct MixAssembly {
    double delta, delta_s;           // real / synthetic block deltas
    double pi, alpha, lambda;
    double a1, a2, b1, b2, h;
    double c1, c2;                   // trace-term coefficients of nu_q
    BilinearSet bl;
};

TheoryStats finish_stats(double mean, double nu, const char* who) {
    TheoryStats s;
    s.mean = mean;
    s.second_moment = nu;
    s.variance = nu - mean * mean;
    if (!(s.variance > 0.0) || !std::isfinite(s.variance)) {
        std::ostringstream os;
        os << who << ": invalid regime, variance = " << s.variance;
        throw RegimeError(os.str());
    }
    s.accuracy = (mean == 0.0) ? 0.5 : normal_cdf(mean / std::sqrt(s.variance));
    return s;
}

// Shared second-moment assembly for the shifted-mean / general-covariance
// formulas. c1/c2 carry the trace contributions with their leading factors
// already folded in, which keeps pi = 0 and alpha = 0 free of 0/0.
TheoryStats assemble_mixture_stats(const MixAssembly& A, const char* who) {
    const double od = 1.0 + A.delta;
    const double os_ = 1.0 + A.delta_s;
    const double pi = A.pi, al = A.alpha, la = A.lambda;
    const auto& B = A.bl;

    const double mean = (pi / od) * B.q_mm + (la * (1.0 - pi) / os_) * B.q_mb;

    // bilinear forms of the QSQ deterministic equivalent
    auto eform = [&](double qm_u, double qm_v, double qb_u, double qb_v,
                     double q2, double qc) {
        return ((1.0 - A.b2) * (qm_u * qm_v + q2) + A.b1 * (qb_u * qb_v + qc)) / A.h;
    };
    const double E_mm = eform(B.q_mm, B.q_mm, B.q_mb, B.q_mb, B.q2_mm, B.qc_mm);
    const double E_bb = eform(B.q_mb, B.q_mb, B.q_bb, B.q_bb, B.q2_bb, B.qc_bb);
    const double E_mb = eform(B.q_mm, B.q_mb, B.q_mb, B.q_bb, B.q2_mb, B.qc_mb);

    double nu = (pi * pi / (od * od)) * E_mm
              + (la * la * (1.0 - pi) * (1.0 - pi) / (os_ * os_)) * E_bb
              + (2.0 * la * pi * (1.0 - pi) / (od * os_)) * E_mb;
    nu += A.c1 * (1.0 - (2.0 * pi / od) * B.q_mm - (2.0 * la * (1.0 - pi) / os_) * B.q_mb);
    nu += A.c2 * (al - (2.0 * la * la * (1.0 - pi) / os_) * B.q_bb
                     - (2.0 * la * pi / od) * B.q_mb);
    return finish_stats(mean, nu, who);
}

// Real roots of a polynomial (ascending coefficients) via the companion
// matrix; leading near-zero coefficients are stripped first.
std::vector<double> real_poly_roots(std::vector<double> coeffs) {
    while (coeffs.size() > 1 && std::abs(coeffs.back()) < 1e-300) coeffs.pop_back();
    const int deg = static_cast<int>(coeffs.size()) - 1;
    std::vector<double> out;
    if (deg < 1) return out;
    if (deg == 1) {
        out.push_back(-coeffs[0] / coeffs[1]);
        return out;
    }
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coeffs[i] / coeffs[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
    for (int i = 0; i < deg; ++i) {
        const std::complex<double> z = es.eigenvalues()[i];
        if (std::abs(z.imag()) < 1e-9 * std::max(1.0, std::abs(z.real())))
            out.push_back(z.real());
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

Deltas solve_deltas(double eta, double eta_hat, double pi, double alpha,
                    double gamma, double tol, std::uint64_t max_iter) {
    if (!(eta >= 0.0) || !(eta_hat > 0.0) || !(pi >= 0.0 && pi <= 1.0) ||
        !(alpha >= 0.0 && alpha <= 1.0) || !(gamma > 0.0) || !(tol > 0.0))
        throw ConfigError("solve_deltas: parameter out of range");

    Deltas d;
    const double as = alpha * (1.0 - pi);
    if (as == 0.0) {
        // no kept synthetic data: the coupled system collapses to the
        // standalone real-data equation
        d.delta_r = real_only_delta(eta, pi, gamma);
        return d;
    }

    double dr = 0.0, ds = 0.0, dg = 0.0;
    double prev_res = std::numeric_limits<double>::infinity();
    for (std::uint64_t it = 1; it <= max_iter; ++it) {
        // one sweep, top to bottom, each line using the freshest values
        double g = (as / (1.0 + ds)) * eta_hat /
                   (gamma + pi / (1.0 + dr) + as / ((1.0 + ds) * (1.0 + dg)));
        double r = (eta / eta_hat) * (1.0 + ds) / as * g;
        double s = alpha * r / (1.0 + g);
        if (!finite3(g, r, s))
            throw SolveError("solve_deltas: NaN/Inf during iteration");

        double res = std::max({std::abs(g - dg), std::abs(r - dr), std::abs(s - ds)});
        if (res > prev_res) {
            g = dg + 0.5 * (g - dg);
            r = dr + 0.5 * (r - dr);
            s = ds + 0.5 * (s - ds);
            res = std::max({std::abs(g - dg), std::abs(r - dr), std::abs(s - ds)});
        }
        dg = g; dr = r; ds = s;
        d.iterations = it;
        d.residual = res;
        prev_res = res;
        if (res <= tol) {
            d.delta_r = dr; d.delta_s = ds; d.delta_g = dg;
            return d;
        }
    }
    std::ostringstream os;
    os << "solve_deltas: no convergence after " << max_iter
       << " iterations, last residual " << d.residual;
    throw SolveError(os.str());
}

ScalarLedger build_ledger(const Deltas& d, const DerivedRatios& r, double gamma) {
    ScalarLedger L{};
    L.alpha = r.alpha;
    L.lambda = r.lambda;
    const double or_ = 1.0 + d.delta_r;
    const double os_ = 1.0 + d.delta_s;
    const double og = 1.0 + d.delta_g;
    const double as = r.alpha * (1.0 - r.pi);

    L.a = r.pi / or_ + as / os_;
    L.b = gamma + r.pi / or_ + as / (os_ * og);
    L.c = r.pi / or_ + r.lambda * (1.0 - r.pi) / os_;

    const double t = as / (os_ * og);
    L.h2 = 1.0 - t * t * r.eta_hat / (L.b * L.b);
    if (!(L.h2 > 0.0))
        throw RegimeError("build_ledger: invalid regime, h2 <= 0");

    const double hb2 = L.h2 * L.b * L.b;
    L.a1 = r.pi * r.eta / (or_ * or_ * hb2);
    L.b1 = as * r.eta / (os_ * os_ * og * og * hb2);
    L.b2 = as * r.eta / (os_ * os_ * og * og * og * og * hb2);
    L.h1 = 1.0 - L.a1 - L.b2;
    if (!(L.h1 > 0.0))
        throw RegimeError("build_ledger: invalid regime, h1 <= 0");
    return L;
}

TheoryStats theorem1_stats(const ScalarLedger& L, double mu_norm_sq) {
    if (!(mu_norm_sq > 0.0))
        throw ConfigError("theorem1_stats: mu_norm_sq must be positive");
    if (L.alpha == 0.0 && L.b1 != 0.0)
        throw SolveError("theorem1_stats: alpha = 0 with b1 != 0");

    const double denom = L.b + L.a * mu_norm_sq;
    const double mean = L.c * mu_norm_sq / denom;
    const double noise_term = (L.alpha == 0.0) ? 0.0 : L.lambda * L.b1 / L.alpha;
    const double nu =
        L.c * mu_norm_sq / (L.h1 * denom * denom) *
            (L.c * (1.0 + L.b1 - L.b2) * mu_norm_sq + L.c / L.h2 -
             2.0 * (L.a1 + noise_term) * denom) +
        (L.a1 + L.b1) / L.h1;
    return finish_stats(mean, nu, "theorem1_stats");
}

TheoryStats corollary_synthetic_stats(double eta_s, double alpha, double lambda,
                                      double gamma, double mu_norm_sq) {
    if (!(gamma > 0.0)) throw ConfigError("corollary_synthetic_stats: gamma must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("corollary_synthetic_stats: alpha must be in (0,1]");
    if (!(eta_s >= 0.0)) throw ConfigError("corollary_synthetic_stats: eta_s must be nonnegative");
    if (!(mu_norm_sq > 0.0)) throw ConfigError("corollary_synthetic_stats: mu_norm_sq must be positive");

    const double ds = (eta_s * alpha - alpha - gamma +
                       std::sqrt((alpha + gamma - eta_s * alpha) * (alpha + gamma - eta_s * alpha) +
                                 4.0 * eta_s * alpha * gamma)) /
                      (2.0 * gamma);
    const double denom_h = alpha + gamma * (1.0 + ds);
    const double h = 1.0 - alpha * eta_s / (denom_h * denom_h);
    if (!(h > 0.0))
        throw RegimeError("corollary_synthetic_stats: invalid regime, h <= 0");

    const double D = alpha * mu_norm_sq + alpha + gamma * (1.0 + ds);
    const double mean = lambda * mu_norm_sq / D;
    const double nu = lambda * lambda * mu_norm_sq / (h * D) *
                          ((mu_norm_sq + 1.0) / D - 2.0 * (1.0 - h) / alpha) +
                      (1.0 - h) / h;
    return finish_stats(mean, nu, "corollary_synthetic_stats");
}

double critical_epsilon(double rho, double phi) {
    if (!(phi > 0.0)) throw ConfigError("critical_epsilon: phi must be positive");
    if (!(rho >= 0.0 && rho <= 1.0) || phi > 1.0)
        throw ConfigError("critical_epsilon: probabilities must lie in [0,1]");
    return phi / (phi + rho);
}

TheoryStats isotropic_stats(const ExperimentConfig& cfg) {
    const DerivedRatios r = derive(cfg);
    const double eta = r.eta, pi = r.pi, al = r.alpha, la = r.lambda;
    const double g = cfg.gamma, s2 = cfg.sigma * cfg.sigma;

    // delta is the unique nonnegative root of the cubic
    std::vector<double> roots = real_poly_roots(
        {-eta,
         g + pi - eta + al * s2 * (1.0 - pi - eta),
         g + al * s2 * (1.0 + g - eta),
         al * s2 * g});
    std::vector<double> nonneg;
    for (double x : roots)
        if (x >= -1e-12) nonneg.push_back(std::max(x, 0.0));
    if (nonneg.empty())
        throw SolveError("isotropic_stats: no nonnegative real root for delta");
    for (std::size_t i = 1; i < nonneg.size(); ++i)
        if (nonneg[i] - nonneg[0] > 1e-9)
            throw SolveError("isotropic_stats: multiple distinct nonnegative roots for delta");
    const double delta = nonneg[0];

    const double delta_s = al * s2 * delta;
    const double od = 1.0 + delta, os_ = 1.0 + delta_s;
    const double theta = g + pi / od + al * s2 * (1.0 - pi) / os_;

    // Everything lives on span{mu, mu_perp}; Qbar inverts as a 2x2 there and
    // as theta^{-1} I on the complement (which the bilinear forms never see).
    const double mn = cfg.mu_norm, mp = cfg.mu_perp_norm;
    Eigen::Vector2d u(mn, 0.0);                 // mu
    Eigen::Vector2d v(cfg.beta * mn, mp);       // mu_beta
    const double s1c = pi / od, s2c = al * (1.0 - pi) / os_;
    Eigen::Matrix2d Minv = theta * Eigen::Matrix2d::Identity() +
                           s1c * u * u.transpose() + s2c * v * v.transpose();
    Eigen::Matrix2d Q = Minv.inverse();

    BilinearSet B;
    Eigen::Vector2d qu = Q * u, qv = Q * v;
    B.q_mm = u.dot(qu); B.q_mb = u.dot(qv); B.q_bb = v.dot(qv);
    B.q2_mm = qu.dot(qu); B.q2_mb = qu.dot(qv); B.q2_bb = qv.dot(qv);
    B.qc_mm = s2 * B.q2_mm; B.qc_mb = s2 * B.q2_mb; B.qc_bb = s2 * B.q2_bb;

    MixAssembly A;
    A.delta = delta; A.delta_s = delta_s;
    A.pi = pi; A.alpha = al; A.lambda = la;
    const double t2 = theta * theta;
    A.a1 = pi * (eta / t2) / (od * od);
    A.a2 = pi * (eta * s2 / t2) / (od * od);
    A.b1 = al * (1.0 - pi) * (eta * s2 / t2) / (os_ * os_);
    A.b2 = al * (1.0 - pi) * (eta * s2 * s2 / t2) / (os_ * os_);
    A.h = (1.0 - A.b2) * (1.0 - A.a1) - A.a2 * A.b1;
    if (!(A.h > 0.0))
        throw RegimeError("isotropic_stats: invalid regime, h <= 0");
    const double trace_core = (eta / t2) * (1.0 - A.b2 + s2 * A.b1) / A.h;
    A.c1 = pi * trace_core / (od * od);
    A.c2 = (1.0 - pi) * s2 * trace_core / (os_ * os_);
    A.bl = B;
    return assemble_mixture_stats(A, "isotropic_stats");
}

TheoryStats general_covariance_stats(const std::vector<double>& cov_eigenvalues,
                                     const Eigen::VectorXd& mu,
                                     const Eigen::VectorXd& mu_beta,
                                     const Eigen::MatrixXd& cov_basis,
                                     const DerivedRatios& ratios, double gamma) {
    const Eigen::Index p = mu.size();
    if (static_cast<Eigen::Index>(cov_eigenvalues.size()) != p ||
        mu_beta.size() != p || cov_basis.rows() != p || cov_basis.cols() != p)
        throw ConfigError("general_covariance_stats: dimension mismatch");
    if (!(gamma > 0.0)) throw ConfigError("general_covariance_stats: gamma must be positive");
    for (double d : cov_eigenvalues)
        if (!(d > 0.0)) throw ConfigError("general_covariance_stats: eigenvalues must be positive");

    const double eta = ratios.eta, pi = ratios.pi;
    const double al = ratios.alpha, la = ratios.lambda;
    const double N = static_cast<double>(p) / eta;
    Eigen::Map<const Eigen::VectorXd> d(cov_eigenvalues.data(), p);

    // (delta, delta_s) eigen-sum fixed point, damped Picard from (0,0).
    // The rank-two mean correction is asymptotically negligible in the traces
    // and is deliberately excluded; keeping it would reintroduce O(1/p) terms
    // that the closed forms do not carry.
    double delta = 0.0, delta_s = 0.0;
    double prev_res = std::numeric_limits<double>::infinity();
    Eigen::VectorXd Delta(p);
    bool converged = false;
    for (int it = 0; it < 100000; ++it) {
        Delta = (gamma + pi / (1.0 + delta)) * Eigen::VectorXd::Ones(p) +
                (al * (1.0 - pi) / (1.0 + delta_s)) * d;
        double nd = Delta.cwiseInverse().sum() / N;
        double ns = al * (d.array() / Delta.array()).sum() / N;
        if (!std::isfinite(nd) || !std::isfinite(ns))
            throw SolveError("general_covariance_stats: NaN/Inf during iteration");
        double res = std::max(std::abs(nd - delta), std::abs(ns - delta_s));
        if (res > prev_res) {
            nd = delta + 0.5 * (nd - delta);
            ns = delta_s + 0.5 * (ns - delta_s);
            res = std::max(std::abs(nd - delta), std::abs(ns - delta_s));
        }
        delta = nd; delta_s = ns; prev_res = res;
        if (res <= 1e-13) { converged = true; break; }
    }
    if (!converged)
        throw SolveError("general_covariance_stats: fixed point did not converge");

    const double od = 1.0 + delta, os_ = 1.0 + delta_s;
    Delta = (gamma + pi / od) * Eigen::VectorXd::Ones(p) +
            (al * (1.0 - pi) / os_) * d;
    Eigen::VectorXd w = Delta.cwiseInverse();

    // work in the covariance eigenbasis
    Eigen::VectorXd mu_e = cov_basis.transpose() * mu;
    Eigen::VectorXd mb_e = cov_basis.transpose() * mu_beta;

    // Qbar = (diag(Delta) + s1 mu mu^T + s2 mb mb^T)^{-1} via 2x2 Woodbury
    const double s1c = pi / od, s2c = al * (1.0 - pi) / os_;
    Eigen::MatrixXd U(p, 2);
    U.col(0) = std::sqrt(s1c) * mu_e;
    U.col(1) = std::sqrt(s2c) * mb_e;
    Eigen::MatrixXd Aiu = w.asDiagonal() * U;
    Eigen::Matrix2d cap = Eigen::Matrix2d::Identity() + U.transpose() * Aiu;
    Eigen::Matrix2d capinv = cap.inverse();
    auto qbar_apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd ax = w.asDiagonal() * x;
        return ax - Aiu * (capinv * (Aiu.transpose() * x));
    };

    Eigen::VectorXd qmu = qbar_apply(mu_e), qmb = qbar_apply(mb_e);
    BilinearSet B;
    B.q_mm = mu_e.dot(qmu); B.q_mb = mu_e.dot(qmb); B.q_bb = mb_e.dot(qmb);
    B.q2_mm = qmu.dot(qmu); B.q2_mb = qmu.dot(qmb); B.q2_bb = qmb.dot(qmb);
    B.qc_mm = qmu.dot(d.asDiagonal() * qmu);
    B.qc_mb = qmu.dot(d.asDiagonal() * qmb);
    B.qc_bb = qmb.dot(d.asDiagonal() * qmb);

    // trace identities by eigen-sum (bulk part only, same reasoning as above)
    const double s11 = w.array().square().sum() / N;
    const double s1d = (d.array() * w.array().square()).sum() / N;
    const double sdd = (d.array().square() * w.array().square()).sum() / N;

    MixAssembly A;
    A.delta = delta; A.delta_s = delta_s;
    A.pi = pi; A.alpha = al; A.lambda = la;
    A.a1 = pi * s11 / (od * od);
    A.a2 = pi * s1d / (od * od);
    A.b1 = al * (1.0 - pi) * s1d / (os_ * os_);
    A.b2 = al * (1.0 - pi) * sdd / (os_ * os_);
    A.h = (1.0 - A.b2) * (1.0 - A.a1) - A.a2 * A.b1;
    if (!(A.h > 0.0))
        throw RegimeError("general_covariance_stats: invalid regime, h <= 0");
    A.c1 = (A.a1 * (1.0 - A.b2) + A.a2 * A.b1) / A.h;
    A.c2 = (1.0 - pi) * s1d / (os_ * os_ * A.h);
    A.bl = B;
    return assemble_mixture_stats(A, "general_covariance_stats");
}

void marchenko_pastur_support(double ratio, double& lo, double& hi) {
    if (!(ratio > 0.0)) throw ConfigError("marchenko_pastur: ratio must be positive");
    const double sr = std::sqrt(ratio);
    lo = (1.0 - sr) * (1.0 - sr);
    hi = (1.0 + sr) * (1.0 + sr);
}

double marchenko_pastur_density(double x, double ratio) {
    double lo, hi;
    marchenko_pastur_support(ratio, lo, hi);
    if (x <= 0.0 || x < lo || x > hi) return 0.0;
    return std::sqrt((hi - x) * (x - lo)) / (2.0 * kPi * ratio * x);
}

double marchenko_pastur_point_mass(double ratio) {
    if (!(ratio > 0.0)) throw ConfigError("marchenko_pastur: ratio must be positive");
    return ratio > 1.0 ? 1.0 - 1.0 / ratio : 0.0;
}

} // namespace synthmix
