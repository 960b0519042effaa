#include "synthmix/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace synthmix {

using nlohmann::json;

void ExperimentConfig::validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
        throw ConfigError("invalid config: field '" + field + "' " + why);
    };
    if (p == 0) bad("p", "must be positive");
    if (n + m == 0) bad("n", "n + m must be at least 1");
    if (n_hat == 0) bad("n_hat", "must be positive");
    if (!(mu_norm > 0.0) || !std::isfinite(mu_norm)) bad("mu_norm", "must be a positive real");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) bad("gamma", "must be a positive real");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) bad("epsilon", "must lie in [0,1]");
    if (!(rho >= 0.0 && rho <= 1.0)) bad("rho", "must lie in [0,1]");
    if (!(phi >= 0.0 && phi <= 1.0)) bad("phi", "must lie in [0,1]");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) bad("sigma", "must be a positive real");
    if (!std::isfinite(beta)) bad("beta", "must be finite");
    if (!(mu_perp_norm >= 0.0) || !std::isfinite(mu_perp_norm)) bad("mu_perp_norm", "must be nonnegative");
}

DerivedRatios derive(const ExperimentConfig& cfg) {
    cfg.validate();
    DerivedRatios r;
    const double N = static_cast<double>(cfg.n + cfg.m);
    r.eta = static_cast<double>(cfg.p) / N;
    r.eta_hat = static_cast<double>(cfg.p) / static_cast<double>(cfg.n_hat);
    r.pi = static_cast<double>(cfg.n) / N;
    if (cfg.m > 0) r.eta_s = static_cast<double>(cfg.p) / static_cast<double>(cfg.m);
    r.alpha = cfg.phi * (1.0 - cfg.epsilon) + cfg.rho * cfg.epsilon;
    r.lambda = cfg.phi * (1.0 - cfg.epsilon) - cfg.rho * cfg.epsilon;
    return r;
}

namespace {

const std::set<std::string> kKnownKeys = {
    "p", "n", "m", "n_hat", "mu_norm", "gamma", "epsilon",
    "rho", "phi", "sigma", "beta", "mu_perp_norm", "seed"};

std::uint64_t get_uint(const json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number_unsigned())
        throw ConfigError("invalid config: field '" + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

double get_real(const json& j, const std::string& key, double fallback, bool required) {
    if (!j.contains(key)) {
        if (required) throw ConfigError("invalid config: missing field '" + key + "'");
        return fallback;
    }
    const auto& v = j.at(key);
    if (!v.is_number())
        throw ConfigError("invalid config: field '" + key + "' must be numeric");
    return v.get<double>();
}

} // namespace

ExperimentConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a flat JSON object");
    for (const auto& [key, _] : j.items())
        if (!kKnownKeys.count(key))
            throw ConfigError("unknown config key '" + key + "'");

    ExperimentConfig c;
    for (const std::string k : {"p", "n", "m", "n_hat"})
        if (!j.contains(k)) throw ConfigError("invalid config: missing field '" + k + "'");
    c.p = get_uint(j, "p");
    c.n = get_uint(j, "n");
    c.m = get_uint(j, "m");
    c.n_hat = get_uint(j, "n_hat");
    c.mu_norm = get_real(j, "mu_norm", 0.0, true);
    c.gamma = get_real(j, "gamma", 0.0, true);
    c.epsilon = get_real(j, "epsilon", 0.0, true);
    c.rho = get_real(j, "rho", 0.0, true);
    c.phi = get_real(j, "phi", 1.0, true);
    c.sigma = get_real(j, "sigma", 1.0, false);
    c.beta = get_real(j, "beta", 1.0, false);
    c.mu_perp_norm = get_real(j, "mu_perp_norm", 0.0, false);
    c.seed = j.contains("seed") ? get_uint(j, "seed") : 0;
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["p"] = cfg.p;
    j["n"] = cfg.n;
    j["m"] = cfg.m;
    j["n_hat"] = cfg.n_hat;
    j["mu_norm"] = cfg.mu_norm;
    j["gamma"] = cfg.gamma;
    j["epsilon"] = cfg.epsilon;
    j["rho"] = cfg.rho;
    j["phi"] = cfg.phi;
    j["sigma"] = cfg.sigma;
    j["beta"] = cfg.beta;
    j["mu_perp_norm"] = cfg.mu_perp_norm;
    j["seed"] = cfg.seed;
    return j.dump();
}

} // namespace synthmix
