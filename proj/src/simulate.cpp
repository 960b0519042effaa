#include "synthmix/simulate.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace synthmix {

Eigen::VectorXd make_mu(std::uint64_t p, double mu_norm) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    mu(0) = mu_norm;
    return mu;
}

LabeledMatrix sample_real(std::uint64_t n, std::uint64_t p,
                          const Eigen::VectorXd& mu, Rng& rng) {
    const auto ni = static_cast<Eigen::Index>(n);
    const auto pi = static_cast<Eigen::Index>(p);
    LabeledMatrix out;
    out.features.resize(pi, ni);
    out.labels.resize(ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
        const double y = rng.bernoulli(0.5) ? 1.0 : -1.0;
        out.labels(i) = y;
        for (Eigen::Index j = 0; j < pi; ++j)
            out.features(j, i) = y * mu(j) + rng.normal();
    }
    return out;
}

GeneratorModel fit_generator(const LabeledMatrix& data) {
    const Eigen::Index k = data.features.cols();
    if (k == 0) throw ConfigError("fit_generator: empty input");
    // columns y_i * x_i
    Eigen::MatrixXd Z = data.features * data.labels.asDiagonal();
    GeneratorModel g;
    g.mu_hat = Z.rowwise().mean();
    Z.colwise() -= g.mu_hat;
    g.cov_hat = (Z * Z.transpose()) / static_cast<double>(k);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.cov_hat);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    g.cov_sqrt = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
                 es.eigenvectors().transpose();
    return g;
}

LabeledMatrix sample_synthetic(std::uint64_t m, const GeneratorModel& gen,
                               double epsilon, Rng& rng) {
    const auto mi = static_cast<Eigen::Index>(m);
    const Eigen::Index p = gen.mu_hat.size();
    LabeledMatrix out;
    out.features.resize(p, mi);
    out.labels.resize(mi);
    out.true_labels = Eigen::VectorXd(mi);
    Eigen::VectorXd z(p);
    for (Eigen::Index i = 0; i < mi; ++i) {
        const double ybar = rng.bernoulli(0.5) ? 1.0 : -1.0;
        for (Eigen::Index j = 0; j < p; ++j) z(j) = rng.normal();
        out.features.col(i) = ybar * gen.mu_hat + gen.cov_sqrt * z;
        (*out.true_labels)(i) = ybar;
        const bool flip = rng.bernoulli(epsilon);
        out.labels(i) = flip ? -ybar : ybar;
    }
    return out;
}

LabeledMatrix prune(const LabeledMatrix& data, double rho, double phi, Rng& rng) {
    if (!data.true_labels)
        throw ConfigError("prune: input has no true labels");
    LabeledMatrix out = data;
    const Eigen::Index k = data.labels.size();
    out.keep_mask = Eigen::VectorXd(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const bool agree = data.labels(i) == (*data.true_labels)(i);
        (*out.keep_mask)(i) = rng.bernoulli(agree ? phi : rho) ? 1.0 : 0.0;
    }
    return out;
}

RidgeModel train_ridge(const LabeledMatrix& real, const LabeledMatrix& synthetic,
                       double gamma) {
    if (!(gamma > 0.0)) throw ConfigError("train_ridge: gamma must be positive");
    const Eigen::Index n = real.labels.size();
    const Eigen::Index m = synthetic.labels.size();
    const Eigen::Index N = n + m;
    if (N == 0) throw ConfigError("train_ridge: no training data");
    const Eigen::Index p = (n > 0) ? real.features.rows() : synthetic.features.rows();

    Eigen::MatrixXd X(p, N);
    Eigen::VectorXd y(N);
    if (n > 0) {
        X.leftCols(n) = real.features;
        y.head(n) = real.labels;
    }
    if (m > 0) {
        // dropped columns are zeroed but still count toward N
        X.rightCols(m) = synthetic.features;
        y.tail(m) = synthetic.labels;
        if (synthetic.keep_mask)
            X.rightCols(m) = X.rightCols(m) * synthetic.keep_mask->asDiagonal();
    }
    if (!X.allFinite() || !y.allFinite())
        throw ConfigError("train_ridge: non-finite inputs");

    const double Nd = static_cast<double>(N);
    Eigen::MatrixXd A = (X * X.transpose()) / Nd;
    A.diagonal().array() += gamma;
    RidgeModel model;
    model.gamma = gamma;
    model.weights = Eigen::LLT<Eigen::MatrixXd>(A).solve((X * y) / Nd);
    return model;
}

EmpiricalStats decision_stats(const RidgeModel& model, const Eigen::VectorXd& mu,
                              std::uint64_t n_test, Rng& rng) {
    const Eigen::Index p = mu.size();
    const double wmu = model.weights.dot(mu);
    double sum = 0.0, sumsq = 0.0;
    std::uint64_t correct = 0;
    for (std::uint64_t i = 0; i < n_test; ++i) {
        const double y = rng.bernoulli(0.5) ? 1.0 : -1.0;
        double wz = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) wz += model.weights(j) * rng.normal();
        const double score = y * wmu + wz;
        const double s = y * score;
        sum += s;
        sumsq += s * s;
        const double pred = (score >= 0.0) ? 1.0 : -1.0;  // sign(0) counts as +1
        if (pred == y) ++correct;
    }
    EmpiricalStats st;
    const double k = static_cast<double>(n_test);
    st.mean = sum / k;
    st.variance = sumsq / k - st.mean * st.mean;
    st.accuracy = static_cast<double>(correct) / k;
    return st;
}

RidgeModel run_pipeline_trial(const ExperimentConfig& cfg, std::uint64_t trial,
                              const Eigen::VectorXd& mu) {
    LabeledMatrix synth;
    synth.features.resize(mu.size(), 0);
    synth.labels.resize(0);
    if (cfg.m > 0) {
        Rng rg = Rng::substream(cfg.seed, "generator", trial);
        LabeledMatrix gen_data = sample_real(cfg.n_hat, cfg.p, mu, rg);
        GeneratorModel gen = fit_generator(gen_data);
        Rng rs = Rng::substream(cfg.seed, "synthetic", trial);
        synth = sample_synthetic(cfg.m, gen, cfg.epsilon, rs);
        Rng rp = Rng::substream(cfg.seed, "prune", trial);
        synth = prune(synth, cfg.rho, cfg.phi, rp);
    }
    LabeledMatrix real;
    real.features.resize(mu.size(), 0);
    real.labels.resize(0);
    if (cfg.n > 0) {
        Rng rr = Rng::substream(cfg.seed, "real", trial);
        real = sample_real(cfg.n, cfg.p, mu, rr);
    }
    return train_ridge(real, synth, cfg.gamma);
}

MonteCarloResult monte_carlo(const ExperimentConfig& cfg, std::uint64_t trials,
                             std::uint64_t n_test) {
    cfg.validate();
    if (trials == 0 || n_test == 0)
        throw ConfigError("monte_carlo: trials and n_test must be positive");
    const Eigen::VectorXd mu = make_mu(cfg.p, cfg.mu_norm);

    double acc_sum = 0.0, acc_sumsq = 0.0, mean_sum = 0.0, var_sum = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        RidgeModel model = run_pipeline_trial(cfg, t, mu);
        Rng rt = Rng::substream(cfg.seed, "test", t);
        EmpiricalStats st = decision_stats(model, mu, n_test, rt);
        acc_sum += st.accuracy;
        acc_sumsq += st.accuracy * st.accuracy;
        mean_sum += st.mean;
        var_sum += st.variance;
    }
    const double T = static_cast<double>(trials);
    MonteCarloResult res;
    res.mean_acc = acc_sum / T;
    res.std_acc = (trials > 1)
        ? std::sqrt(std::max(0.0, (acc_sumsq - T * res.mean_acc * res.mean_acc) / (T - 1.0)))
        : 0.0;
    res.mean_decision_mean = mean_sum / T;
    res.mean_decision_var = var_sum / T;
    return res;
}

Eigen::VectorXd spectrum(const Eigen::MatrixXd& cov) {
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if (asym > 1e-8 * scale)
        throw ConfigError("spectrum: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    return es.eigenvalues();
}

} // namespace synthmix
