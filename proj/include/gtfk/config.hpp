#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "models.hpp"

namespace gtfk {

/// Every tunable of the numerical pipeline, with the defaults used throughout the tests.
struct NumericsConfig {
    // Gaussian smearing (generic path)
    int gh_order = 40;
    int gh_max_order = 320;
    double smear_tol = 1e-10;

    // self-consistent solve
    double sc_damping = 0.5;
    double sc_tol = 1e-12;
    int sc_max_iters = 200;
    double branch_eps = 1e-6 * std::numbers::pi;

    // GTFK quadratures
    int xbar_order = 64;
    int xt_order = 96;
    double xbar_span = 8.0;     // half-width of the average-point window in units of sqrt(alpha_max)
    double tail_factor = 10.0;  // half-width of the terminal window in units of the lambda=0 spread
    double long_horizon = 10.0; // orders are doubled for T above this

    // PDE oracle
    int pde_n_space = 2001;
    int pde_n_time = 2000;
    double pde_window_std = 10.0;

    // short-time convolution oracle
    int conv_n_space = 801;

    // Monte Carlo oracle
    long mc_paths = 200000;
    double mc_dt = 1.0 / 250.0;
    unsigned long long seed = 20190101ULL;

    int threads = 0;  // 0: GTFK_NUM_THREADS or hardware concurrency
};

/// Contents of a model configuration file (`key = value` lines, `#` comments).
struct ModelConfig {
    ModelKind kind = ModelKind::black_karasinski;
    ModelParams params;
    double lambda = 1.0;
    std::optional<double> y0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
    auto e = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
    return b < e ? std::string(b, e) : std::string();
}

inline double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw InputError("config: key '" + key + "' expects a number, got '" + value + "'");
    }
    if (pos != value.size() || !std::isfinite(v))
        throw InputError("config: key '" + key + "' expects a finite number, got '" + value + "'");
    return v;
}

}  // namespace detail

inline ModelConfig parse_model_config(std::istream& in) {
    ModelConfig cfg;
    std::string line;
    int lineno = 0;
    bool have_model = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key == "model") {
            cfg.kind = parse_model_kind(value);
            have_model = true;
        } else if (key == "a") {
            cfg.params.a = detail::parse_double(key, value);
        } else if (key == "b") {
            cfg.params.b = detail::parse_double(key, value);
        } else if (key == "sigma") {
            cfg.params.sigma = detail::parse_double(key, value);
        } else if (key == "beta") {
            cfg.params.beta = detail::parse_double(key, value);
        } else if (key == "gamma") {
            cfg.params.gamma = detail::parse_double(key, value);
        } else if (key == "lambda") {
            cfg.lambda = detail::parse_double(key, value);
        } else if (key == "y0") {
            cfg.y0 = detail::parse_double(key, value);
        } else {
            throw InputError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    if (!have_model) throw InputError("config: missing 'model' key");
    return cfg;
}

inline ModelConfig load_model_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    return parse_model_config(in);
}

inline std::string format_model_config(const ModelConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "model = " << to_string(cfg.kind) << "\n"
       << "a = " << cfg.params.a << "\n"
       << "b = " << cfg.params.b << "\n"
       << "sigma = " << cfg.params.sigma << "\n";
    if (cfg.kind == ModelKind::quadratic)
        os << "beta = " << cfg.params.beta << "\n"
           << "gamma = " << cfg.params.gamma << "\n";
    os << "lambda = " << cfg.lambda << "\n";
    if (cfg.y0) os << "y0 = " << *cfg.y0 << "\n";
    return os.str();
}

}  // namespace gtfk
