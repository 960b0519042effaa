// Batch front-end: theory curves, Monte Carlo runs, sweeps and validation
// suites, emitted as CSV (with a #-prefixed JSON metadata line) or JSON.
// Exit codes: 0 ok, 2 config error, 3 numerical-regime error, 4 validation
// failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "synthmix/config.hpp"
#include "synthmix/datasets.hpp"
#include "synthmix/simulate.hpp"
#include "synthmix/theory.hpp"

using nlohmann::json;
using namespace synthmix;

namespace {

const char* kVersion = "1.0.0";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::vector<double> parse_grid(const std::string& spec) {
    // a:b:steps -> inclusive linspace
    double a, b;
    int steps;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &a, &b, &steps) != 3 || steps < 1)
        throw ConfigError("bad --grid spec '" + spec + "', expected a:b:steps");
    std::vector<double> g;
    if (steps == 1) {
        g.push_back(a);
        return g;
    }
    for (int i = 0; i < steps; ++i)
        g.push_back(a + (b - a) * static_cast<double>(i) / (steps - 1));
    return g;
}

std::vector<std::uint64_t> parse_uint_list(const std::string& spec) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoull(tok));
    if (out.empty()) throw ConfigError("empty list '" + spec + "'");
    return out;
}

struct PrunerPreset {
    std::string name;
    double rho, phi;
};

PrunerPreset preset_by_name(const std::string& name) {
    if (name == "oracle") return {name, 0.0, 1.0};
    if (name == "none") return {name, 1.0, 1.0};
    if (name == "weak") return {name, 1.0, 0.5};
    if (name == "strong") return {name, 0.2, 0.9};
    throw ConfigError("unknown pruner preset '" + name + "'");
}

std::vector<PrunerPreset> parse_presets(const std::string& spec) {
    std::vector<PrunerPreset> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(preset_by_name(tok));
    if (out.empty()) throw ConfigError("empty preset list");
    return out;
}

struct Output {
    std::ofstream file;
    bool to_file = false;
    std::ostream& stream() { return to_file ? file : std::cout; }
    void open(const std::string& path) {
        if (path.empty()) return;
        file.open(path, std::ios::binary);  // binary: byte-identical reruns
        if (!file) throw ConfigError("cannot open output file: " + path);
        to_file = true;
    }
};

void write_meta(std::ostream& os, const std::string& command,
                const ExperimentConfig& cfg, const json& extra = json::object()) {
    json meta;
    meta["tool"] = "synthmix";
    meta["version"] = kVersion;
    meta["command"] = command;
    meta["config"] = json::parse(config_to_json(cfg));
    for (const auto& [k, v] : extra.items()) meta[k] = v;
    os << "# " << meta.dump() << "\n";
}

// theorem route: fixed point -> ledger -> decision statistics
TheoryStats mixture_theory(const ExperimentConfig& cfg) {
    const DerivedRatios r = derive(cfg);
    const Deltas d = solve_deltas(r.eta, r.eta_hat, r.pi, r.alpha, cfg.gamma);
    const ScalarLedger L = build_ledger(d, r, cfg.gamma);
    return theorem1_stats(L, cfg.mu_norm * cfg.mu_norm);
}

// The "coupled" label-noise rule: epsilon equals the misclassification rate
// of a synthetic-only classifier, which itself depends on epsilon; solved by
// fixed-point iteration.
double coupled_epsilon(const ExperimentConfig& cfg, double eta_s) {
    double eps = 0.1;
    for (int it = 0; it < 500; ++it) {
        const double alpha = cfg.phi * (1.0 - eps) + cfg.rho * eps;
        const double lambda = cfg.phi * (1.0 - eps) - cfg.rho * eps;
        if (!(alpha > 0.0)) return eps;
        const TheoryStats s = corollary_synthetic_stats(
            eta_s, alpha, lambda, cfg.gamma, cfg.mu_norm * cfg.mu_norm);
        const double next = 1.0 - s.accuracy;
        if (std::abs(next - eps) < 1e-12) return next;
        eps = next;
    }
    return eps;
}

struct CommonOpts {
    std::string config_path, out_path, grid_spec;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::uint64_t n_test = 20000;
    ExperimentConfig overrides;
    bool has_p = false, has_n = false, has_m = false, has_nhat = false;
    bool has_mu = false, has_gamma = false, has_eps = false;
    bool has_rho = false, has_phi = false, has_sigma = false;
    bool has_beta = false, has_muperp = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--out", o.out_path, "output file (default stdout)");
    cmd->add_option("--grid", o.grid_spec, "grid spec a:b:steps");
    cmd->add_option("--seed", o.seed, "master RNG seed");
    cmd->add_option("--trials", o.trials, "Monte Carlo trials");
    cmd->add_option("--n-test", o.n_test, "test points per trial");
    cmd->add_option("--p", o.overrides.p)->each([&](const std::string&) { o.has_p = true; });
    cmd->add_option("--n", o.overrides.n)->each([&](const std::string&) { o.has_n = true; });
    cmd->add_option("--m", o.overrides.m)->each([&](const std::string&) { o.has_m = true; });
    cmd->add_option("--n-hat", o.overrides.n_hat)->each([&](const std::string&) { o.has_nhat = true; });
    cmd->add_option("--mu-norm", o.overrides.mu_norm)->each([&](const std::string&) { o.has_mu = true; });
    cmd->add_option("--gamma", o.overrides.gamma)->each([&](const std::string&) { o.has_gamma = true; });
    cmd->add_option("--epsilon", o.overrides.epsilon)->each([&](const std::string&) { o.has_eps = true; });
    cmd->add_option("--rho", o.overrides.rho)->each([&](const std::string&) { o.has_rho = true; });
    cmd->add_option("--phi", o.overrides.phi)->each([&](const std::string&) { o.has_phi = true; });
    cmd->add_option("--sigma", o.overrides.sigma)->each([&](const std::string&) { o.has_sigma = true; });
    cmd->add_option("--beta", o.overrides.beta)->each([&](const std::string&) { o.has_beta = true; });
    cmd->add_option("--mu-perp-norm", o.overrides.mu_perp_norm)->each([&](const std::string&) { o.has_muperp = true; });
}

ExperimentConfig resolve_config(const CommonOpts& o) {
    // documented baseline: the mixed-data toy configuration
    ExperimentConfig c;
    c.p = 200; c.n = 1000; c.m = 1000; c.n_hat = 1000;
    c.mu_norm = 0.7; c.gamma = 1.0; c.epsilon = 0.0;
    c.rho = 0.0; c.phi = 1.0; c.seed = 0;
    if (!o.config_path.empty()) c = load_config(o.config_path);
    if (o.has_p) c.p = o.overrides.p;
    if (o.has_n) c.n = o.overrides.n;
    if (o.has_m) c.m = o.overrides.m;
    if (o.has_nhat) c.n_hat = o.overrides.n_hat;
    if (o.has_mu) c.mu_norm = o.overrides.mu_norm;
    if (o.has_gamma) c.gamma = o.overrides.gamma;
    if (o.has_eps) c.epsilon = o.overrides.epsilon;
    if (o.has_rho) c.rho = o.overrides.rho;
    if (o.has_phi) c.phi = o.overrides.phi;
    if (o.has_sigma) c.sigma = o.overrides.sigma;
    if (o.has_beta) c.beta = o.overrides.beta;
    if (o.has_muperp) c.mu_perp_norm = o.overrides.mu_perp_norm;
    if (o.seed) c.seed = *o.seed;
    c.validate();
    return c;
}

json stats_to_json(const TheoryStats& s) {
    return {{"mean", s.mean},
            {"second_moment", s.second_moment},
            {"variance", s.variance},
            {"accuracy", s.accuracy}};
}

// ---- subcommand bodies -------------------------------------------------

int cmd_theory(const CommonOpts& o) {
    const ExperimentConfig cfg = resolve_config(o);
    Output out;
    out.open(o.out_path);
    json j = stats_to_json(mixture_theory(cfg));
    j["config"] = json::parse(config_to_json(cfg));
    out.stream() << j.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const CommonOpts& o) {
    const ExperimentConfig cfg = resolve_config(o);
    Output out;
    out.open(o.out_path);
    const std::uint64_t trials = o.trials.value_or(10);
    const MonteCarloResult r = monte_carlo(cfg, trials, o.n_test);
    json j = {{"mean_acc", r.mean_acc},
              {"std_acc", r.std_acc},
              {"mean_decision_mean", r.mean_decision_mean},
              {"mean_decision_var", r.mean_decision_var},
              {"trials", trials},
              {"n_test", o.n_test},
              {"config", json::parse(config_to_json(cfg))}};
    out.stream() << j.dump(2) << "\n";
    return 0;
}

int cmd_deltas(const CommonOpts& o) {
    const ExperimentConfig cfg = resolve_config(o);
    const DerivedRatios base = derive(cfg);
    const std::vector<double> grid =
        parse_grid(o.grid_spec.empty() ? "0.01:3:40" : o.grid_spec);
    Output out;
    out.open(o.out_path);
    std::ostream& os = out.stream();
    write_meta(os, "deltas", cfg, {{"grid_variable", "p_over_n"}});
    os << "ratio,delta_r,delta_s,delta_g,iterations,residual,error\n";
    for (double ratio : grid) {
        // rescale (eta, eta_hat) keeping the mix pi and n/n_hat fixed
        const double eta = ratio * base.pi;
        const double eta_hat = ratio * static_cast<double>(cfg.n) /
                               static_cast<double>(cfg.n_hat);
        os << fmt(ratio) << ",";
        try {
            const Deltas d = solve_deltas(eta, eta_hat, base.pi, base.alpha, cfg.gamma);
            os << fmt(d.delta_r) << "," << fmt(d.delta_s) << "," << fmt(d.delta_g)
               << "," << d.iterations << "," << fmt(d.residual) << ",\n";
        } catch (const std::exception& e) {
            os << ",,,,," << e.what() << "\n";
        }
    }
    return 0;
}

int cmd_phase(const CommonOpts& o, const std::string& m_list, bool empirical) {
    ExperimentConfig cfg = resolve_config(o);
    cfg.n = 0;  // fully synthetic by construction
    const std::vector<double> eps_grid =
        parse_grid(o.grid_spec.empty() ? "0:1:21" : o.grid_spec);
    const std::vector<std::uint64_t> m_grid =
        parse_uint_list(m_list.empty() ? "200,1000,10000" : m_list);
    const std::uint64_t trials = o.trials.value_or(10);
    Output out;
    out.open(o.out_path);
    std::ostream& os = out.stream();
    write_meta(os, "phase", cfg,
               {{"epsilon_star", critical_epsilon(cfg.rho, cfg.phi)}});
    os << "epsilon,m,theory_acc,emp_mean_acc,emp_std_acc,error\n";
    for (std::uint64_t m : m_grid) {
        for (double eps : eps_grid) {
            ExperimentConfig c = cfg;
            c.m = m;
            c.epsilon = eps;
            os << fmt(eps) << "," << m << ",";
            try {
                const DerivedRatios r = derive(c);
                const TheoryStats th = corollary_synthetic_stats(
                    *r.eta_s, r.alpha, r.lambda, c.gamma, c.mu_norm * c.mu_norm);
                os << fmt(th.accuracy) << ",";
                if (empirical) {
                    const MonteCarloResult mc = monte_carlo(c, trials, o.n_test);
                    os << fmt(mc.mean_acc) << "," << fmt(mc.std_acc) << ",\n";
                } else {
                    os << ",,\n";
                }
            } catch (const std::exception& e) {
                os << ",,," << e.what() << "\n";
            }
        }
    }
    return 0;
}

int cmd_mixing(const CommonOpts& o, const std::string& preset_spec,
               const std::string& eps_mode, bool empirical,
               const std::string& data_path, const std::string& label_column) {
    ExperimentConfig cfg = resolve_config(o);
    const std::vector<double> grid =
        parse_grid(o.grid_spec.empty() ? "0:0.75:4" : o.grid_spec);
    for (double pr : grid)
        if (!(pr >= 0.0 && pr < 1.0))
            throw ConfigError("mixing proportions must lie in [0,1)");
    const std::uint64_t trials = o.trials.value_or(10);
    const std::vector<PrunerPreset> presets =
        parse_presets(preset_spec.empty() ? "oracle,weak" : preset_spec);
    Output out;
    out.open(o.out_path);
    std::ostream& os = out.stream();

    if (!data_path.empty()) {
        // mixing experiment on an ingested tabular dataset
        const TabularDataset ds = load_csv(data_path, label_column);
        write_meta(os, "mixing", cfg,
                   {{"data", data_path}, {"mu_norm_estimate", estimate_mu_norm(ds)}});
        os << "proportion,preset,emp_mean_acc,emp_std_acc\n";
        for (const auto& pp : presets) {
            ExperimentConfig c = cfg;
            c.rho = pp.rho;
            c.phi = pp.phi;
            const auto recs = real_data_mixing_run(ds, c, grid, trials);
            for (const auto& rec : recs)
                os << fmt(rec.proportion) << "," << pp.name << ","
                   << fmt(rec.mean_acc) << "," << fmt(rec.std_acc) << "\n";
        }
        return 0;
    }

    write_meta(os, "mixing", cfg, {{"epsilon_mode", eps_mode}});
    os << "proportion,preset,epsilon,theory_acc,emp_mean_acc,emp_std_acc,error\n";
    for (const auto& pp : presets) {
        for (double prop : grid) {
            ExperimentConfig c = cfg;
            c.rho = pp.rho;
            c.phi = pp.phi;
            c.m = static_cast<std::uint64_t>(
                std::llround(prop / (1.0 - prop) * static_cast<double>(cfg.n)));
            os << fmt(prop) << "," << pp.name << ",";
            try {
                if (eps_mode == "coupled" && c.m > 0) {
                    const double eta_s = static_cast<double>(c.p) /
                                         static_cast<double>(c.m);
                    c.epsilon = coupled_epsilon(c, eta_s);
                }
                os << fmt(c.epsilon) << ",";
                os << fmt(mixture_theory(c).accuracy) << ",";
                if (empirical) {
                    const MonteCarloResult mc = monte_carlo(c, trials, o.n_test);
                    os << fmt(mc.mean_acc) << "," << fmt(mc.std_acc) << ",\n";
                } else {
                    os << ",,\n";
                }
            } catch (const std::exception& e) {
                os << ",,,," << e.what() << "\n";
            }
        }
    }
    return 0;
}

int cmd_spectrum(const CommonOpts& o, const std::string& nhat_list) {
    const ExperimentConfig cfg = resolve_config(o);
    const std::vector<std::uint64_t> nhats =
        parse_uint_list(nhat_list.empty() ? "500,50000" : nhat_list);
    Output out;
    out.open(o.out_path);
    std::ostream& os = out.stream();
    write_meta(os, "spectrum", cfg);
    os << "kind,n_hat,index,x,value\n";
    const Eigen::VectorXd mu = make_mu(cfg.p, cfg.mu_norm);
    for (std::uint64_t nh : nhats) {
        Rng rng = Rng::substream(cfg.seed, "spectrum", nh);
        const LabeledMatrix data = sample_real(nh, cfg.p, mu, rng);
        const GeneratorModel gen = fit_generator(data);
        const Eigen::VectorXd ev = spectrum(gen.cov_hat);
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            os << "eigenvalue," << nh << "," << i << "," << fmt(ev(i)) << ",\n";
        const double ratio = static_cast<double>(cfg.p) / static_cast<double>(nh);
        double lo, hi;
        marchenko_pastur_support(ratio, lo, hi);
        for (int i = 0; i < 512; ++i) {
            const double x = lo + (hi - lo) * (i + 0.5) / 512.0;
            os << "density," << nh << "," << i << "," << fmt(x) << ","
               << fmt(marchenko_pastur_density(x, ratio)) << "\n";
        }
        const double atom = marchenko_pastur_point_mass(ratio);
        if (atom > 0.0)
            os << "point_mass," << nh << ",0,0," << fmt(atom) << "\n";
    }
    return 0;
}

int cmd_validate(const CommonOpts& o) {
    const ExperimentConfig cfg = resolve_config(o);
    const std::uint64_t trials = o.trials.value_or(20);
    Output out;
    out.open(o.out_path);

    json report;
    report["config"] = json::parse(config_to_json(cfg));
    report["trials"] = trials;
    report["n_test"] = o.n_test;
    bool all_pass = true;
    json checks = json::array();

    TheoryStats th{};
    bool have_theory = false;
    try {
        th = mixture_theory(cfg);
        report["theory"] = stats_to_json(th);
        have_theory = true;
        checks.push_back({{"name", "theory_evaluates"}, {"pass", true}});
    } catch (const std::exception& e) {
        checks.push_back({{"name", "theory_evaluates"}, {"pass", false}, {"error", e.what()}});
        all_pass = false;
    }

    if (have_theory) {
        try {
            const MonteCarloResult mc = monte_carlo(cfg, trials, o.n_test);
            report["empirical"] = {{"mean_acc", mc.mean_acc},
                                   {"std_acc", mc.std_acc},
                                   {"mean_decision_mean", mc.mean_decision_mean},
                                   {"mean_decision_var", mc.mean_decision_var}};
            const double se = mc.std_acc / std::sqrt(static_cast<double>(trials));
            const double tol = 2.0 * se + 0.01;
            const double dev = std::abs(mc.mean_acc - th.accuracy);
            checks.push_back({{"name", "accuracy_concordance"},
                              {"pass", dev <= tol},
                              {"z", se > 0 ? dev / se : 0.0},
                              {"deviation", dev},
                              {"tolerance", tol}});
            if (dev > tol) all_pass = false;

            const double mdev = std::abs(mc.mean_decision_mean - th.mean);
            checks.push_back({{"name", "decision_mean_concordance"},
                              {"pass", mdev <= 0.05},
                              {"deviation", mdev}});
            if (mdev > 0.05) all_pass = false;
        } catch (const std::exception& e) {
            checks.push_back({{"name", "monte_carlo"}, {"pass", false}, {"error", e.what()}});
            all_pass = false;
        }
    }

    report["checks"] = checks;
    report["pass"] = all_pass;
    out.stream() << report.dump(2) << "\n";
    return all_pass ? 0 : 4;
}

int cmd_ingest(const CommonOpts& o, const std::string& data_path,
               const std::string& label_column) {
    Output out;
    out.open(o.out_path);
    const TabularDataset ds = load_csv(data_path, label_column);
    json j = {{"path", data_path},
              {"p", ds.features.rows()},
              {"samples", ds.features.cols()},
              {"neg_label", ds.neg_label},
              {"pos_label", ds.pos_label},
              {"mu_norm_estimate", estimate_mu_norm(ds)}};
    out.stream() << j.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& spec_path) {
    std::ifstream in(spec_path);
    if (!in) throw ConfigError("cannot open sweep spec: " + spec_path);
    json spec;
    try {
        in >> spec;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("sweep spec parse failure: ") + e.what());
    }
    const std::string variable = spec.at("variable").get<std::string>();
    const std::vector<double> grid = spec.at("grid").get<std::vector<double>>();
    if (grid.empty()) throw ConfigError("sweep grid must be nonempty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw ConfigError("sweep grid must be strictly ascending");
    ExperimentConfig base = parse_config_json(spec.at("base").dump());
    if (o.seed) base.seed = *o.seed;
    const std::uint64_t trials =
        o.trials.value_or(spec.value("trials", std::uint64_t{10}));
    const std::uint64_t n_test = spec.value("n_test", o.n_test);
    bool want_theory = true, want_empirical = false;
    if (spec.contains("outputs")) {
        want_theory = want_empirical = false;
        for (const auto& s : spec.at("outputs"))
            if (s == "theory") want_theory = true;
            else if (s == "empirical") want_empirical = true;
            else throw ConfigError("unknown sweep output '" + s.get<std::string>() + "'");
    }

    Output out;
    out.open(o.out_path);
    std::ostream& os = out.stream();
    write_meta(os, "sweep", base, {{"variable", variable}});
    os << variable << ",theory_acc,emp_mean_acc,emp_std_acc,error\n";
    for (double v : grid) {
        ExperimentConfig c = base;
        if (variable == "synthetic_proportion") {
            if (!(v >= 0.0 && v < 1.0)) throw ConfigError("synthetic_proportion must lie in [0,1)");
            c.m = static_cast<std::uint64_t>(
                std::llround(v / (1.0 - v) * static_cast<double>(base.n)));
        } else if (variable == "epsilon") {
            c.epsilon = v;
        } else if (variable == "p_over_n") {
            c.p = static_cast<std::uint64_t>(
                std::llround(v * static_cast<double>(base.n)));
        } else if (variable == "eta_s") {
            if (!(v > 0.0)) throw ConfigError("eta_s grid values must be positive");
            c.m = static_cast<std::uint64_t>(
                std::llround(static_cast<double>(base.p) / v));
        } else {
            throw ConfigError("unknown sweep variable '" + variable + "'");
        }
        os << fmt(v) << ",";
        try {
            os << (want_theory ? fmt(mixture_theory(c).accuracy) : "") << ",";
            if (want_empirical) {
                const MonteCarloResult mc = monte_carlo(c, trials, n_test);
                os << fmt(mc.mean_acc) << "," << fmt(mc.std_acc) << ",\n";
            } else {
                os << ",,\n";
            }
        } catch (const std::exception& e) {
            os << ",,," << e.what() << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ridge classification on real/synthetic data mixtures: "
                 "closed-form theory and Monte Carlo validation"};
    app.require_subcommand(1);

    CommonOpts o_theory, o_sim, o_deltas, o_phase, o_mixing, o_spectrum,
        o_validate, o_ingest, o_sweep;
    std::string m_list, preset_spec, eps_mode = "fixed", nhat_list;
    std::string data_path, label_column, sweep_spec_path;
    bool phase_empirical = false, mixing_empirical = false;

    auto* c_theory = app.add_subcommand("theory", "single-point closed-form statistics (JSON)");
    add_common(c_theory, o_theory);

    auto* c_sim = app.add_subcommand("simulate", "single-point Monte Carlo (JSON)");
    add_common(c_sim, o_sim);

    auto* c_deltas = app.add_subcommand("deltas", "fixed-point triple along a p/n grid (CSV)");
    add_common(c_deltas, o_deltas);

    auto* c_phase = app.add_subcommand("phase", "label-noise phase transition, fully synthetic (CSV)");
    add_common(c_phase, o_phase);
    c_phase->add_option("--m-grid", m_list, "comma-separated synthetic sample counts");
    c_phase->add_flag("--empirical", phase_empirical, "add Monte Carlo columns");

    auto* c_mixing = app.add_subcommand("mixing", "accuracy along a synthetic-proportion grid (CSV)");
    add_common(c_mixing, o_mixing);
    c_mixing->add_option("--presets", preset_spec, "pruner presets (oracle,none,weak,strong)");
    c_mixing->add_option("--epsilon-mode", eps_mode, "fixed|coupled")
        ->check(CLI::IsMember({"fixed", "coupled"}));
    c_mixing->add_flag("--empirical", mixing_empirical, "add Monte Carlo columns");
    c_mixing->add_option("--data", data_path, "run on an ingested CSV dataset instead of the Gaussian model");
    c_mixing->add_option("--label-column", label_column, "label column name or index");

    auto* c_spectrum = app.add_subcommand("spectrum", "empirical spectra with limiting-density overlay (CSV)");
    add_common(c_spectrum, o_spectrum);
    c_spectrum->add_option("--n-hat-grid", nhat_list, "comma-separated generator sample counts");

    auto* c_validate = app.add_subcommand("validate", "theory-vs-simulation concordance report (JSON)");
    add_common(c_validate, o_validate);

    auto* c_ingest = app.add_subcommand("ingest", "load a CSV dataset and report its summary (JSON)");
    add_common(c_ingest, o_ingest);
    c_ingest->add_option("--data", data_path, "CSV path")->required();
    c_ingest->add_option("--label-column", label_column, "label column name or index")->required();

    auto* c_sweep = app.add_subcommand("sweep", "generic sweep from a JSON spec file (CSV)");
    add_common(c_sweep, o_sweep);
    c_sweep->add_option("--spec", sweep_spec_path, "sweep spec JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_theory->parsed()) return cmd_theory(o_theory);
        if (c_sim->parsed()) return cmd_simulate(o_sim);
        if (c_deltas->parsed()) return cmd_deltas(o_deltas);
        if (c_phase->parsed()) return cmd_phase(o_phase, m_list, phase_empirical);
        if (c_mixing->parsed())
            return cmd_mixing(o_mixing, preset_spec, eps_mode, mixing_empirical,
                              data_path, label_column);
        if (c_spectrum->parsed()) return cmd_spectrum(o_spectrum, nhat_list);
        if (c_validate->parsed()) return cmd_validate(o_validate);
        if (c_ingest->parsed()) return cmd_ingest(o_ingest, data_path, label_column);
        if (c_sweep->parsed()) return cmd_sweep(o_sweep, sweep_spec_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const RegimeError& e) {
        std::cerr << "numerical-regime error: " << e.what() << "\n";
        return 3;
    } catch (const SolveError& e) {
        std::cerr << "numerical-regime error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
