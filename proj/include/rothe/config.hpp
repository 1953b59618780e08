#pragma once

/// @file config.hpp
/// @brief Experiment configuration: a flat key = value text format, initial
///        condition presets, and validation that reports every violation in
///        one error.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rothe/params.hpp"
#include "rothe/stepper.hpp"

namespace rothe {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ExperimentConfig {
    Params params;

    std::string preset = "equilibrium";  ///< equilibrium | gaussian-bump | shear-slip | compressive-pulse
    double rho0 = 0.1;        ///< background density
    double bump_amp = 0.05;   ///< density bump amplitude (gaussian-bump, compressive-pulse)
    double bump_width = 0.12; ///< density bump width
    double v_amp = 0.08;      ///< shear velocity amplitude
    double pulse_v0 = 0.2;    ///< radial inflow speed scale
    double pulse_width = 0.18;///< inflow profile width

    std::string mode = "run";  ///< run | sweep-eps | sweep-dt | verify
    int steps = 50;
    double final_time = 0.0;  ///< 0 means steps * dt
    int dt_warmup_steps = 0;  ///< sweep-dt: steps at the coarsest dt that shed
                              ///< the stiff initial transient before measuring
    bool eps_auto = true;     ///< eps = hx * hy unless given explicitly

    std::vector<double> eps_sequence;            ///< empty means hx*hy * 2^-j, j = 0..4
    std::vector<double> dt_sequence{0.02, 0.01, 0.005};
    std::vector<double> superlevel_thresholds;   ///< empty means {m1/2, 3 m1/4, 0.9 m1}

    std::string out_dir = "out";
    uint64_t seed = 12345;
    int parallel = 1;
    int dump_interval = 1;  ///< <= 0 dumps only the initial and final states

    std::vector<double> resolved_eps_sequence() const {
        if (!eps_sequence.empty()) return eps_sequence;
        std::vector<double> s;
        const double base = params.hx() * params.hy();
        for (int j = 0; j < 5; ++j) s.push_back(base * std::pow(2.0, -j));
        return s;
    }

    std::vector<double> resolved_thresholds() const {
        if (!superlevel_thresholds.empty()) return superlevel_thresholds;
        return {0.5 * params.m1, 0.75 * params.m1, 0.9 * params.m1};
    }

    double resolved_final_time() const {
        return final_time > 0.0 ? final_time : steps * params.dt;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<double> parse_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("invalid number '" + item + "' in list for key '" + key + "'");
        }
    }
    return out;
}

}  // namespace detail

/// Parses the flat key = value format. '#' starts a comment; unknown keys and
/// malformed lines are reported with their line number.
inline ExperimentConfig parse_config(std::istream& is, const std::string& origin = "<config>") {
    ExperimentConfig cfg;
    bool m1_given = false;
    double m1_value = 0.0;

    std::string line;
    int lineno = 0;
    std::vector<std::string> problems;
    std::map<std::string, std::string> kv;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back(origin + ":" + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            problems.push_back(origin + ":" + std::to_string(lineno) + ": empty key or value");
            continue;
        }
        kv[key] = val;
    }
    if (!problems.empty()) {
        std::string msg = "config parse errors:";
        for (const auto& s : problems) msg += "\n  - " + s;
        throw ConfigError(msg);
    }

    auto num = [&problems](const std::string& key, const std::string& val, double& dst) {
        try {
            size_t pos = 0;
            dst = std::stod(val, &pos);
            if (pos != val.size()) throw std::invalid_argument(val);
        } catch (const std::exception&) {
            problems.push_back("invalid number for key '" + key + "': " + val);
        }
    };
    auto integer = [&problems](const std::string& key, const std::string& val, int& dst) {
        try {
            size_t pos = 0;
            dst = std::stoi(val, &pos);
            if (pos != val.size()) throw std::invalid_argument(val);
        } catch (const std::exception&) {
            problems.push_back("invalid integer for key '" + key + "': " + val);
        }
    };

    for (const auto& [key, val] : kv) {
        if (key == "mu") num(key, val, cfg.params.mu);
        else if (key == "nu") num(key, val, cfg.params.nu);
        else if (key == "gamma") num(key, val, cfg.params.gamma);
        else if (key == "friction") num(key, val, cfg.params.friction);
        else if (key == "dt") num(key, val, cfg.params.dt);
        else if (key == "eps") {
            if (val == "auto") {
                cfg.eps_auto = true;
            } else {
                num(key, val, cfg.params.eps);
                cfg.eps_auto = false;
            }
        } else if (key == "m2") num(key, val, cfg.params.m2);
        else if (key == "m1") { num(key, val, m1_value); m1_given = true; }
        else if (key == "lx") num(key, val, cfg.params.domain_lx);
        else if (key == "ly") num(key, val, cfg.params.domain_ly);
        else if (key == "nx") integer(key, val, cfg.params.nx);
        else if (key == "ny") integer(key, val, cfg.params.ny);
        else if (key == "fp_tol") num(key, val, cfg.params.fp_tol);
        else if (key == "fp_max_iter") integer(key, val, cfg.params.fp_max_iter);
        else if (key == "lin_tol") num(key, val, cfg.params.lin_tol);
        else if (key == "theta") num(key, val, cfg.params.theta);
        else if (key == "preset") cfg.preset = val;
        else if (key == "rho0") num(key, val, cfg.rho0);
        else if (key == "bump_amp") num(key, val, cfg.bump_amp);
        else if (key == "bump_width") num(key, val, cfg.bump_width);
        else if (key == "v_amp") num(key, val, cfg.v_amp);
        else if (key == "pulse_v0") num(key, val, cfg.pulse_v0);
        else if (key == "pulse_width") num(key, val, cfg.pulse_width);
        else if (key == "steps") integer(key, val, cfg.steps);
        else if (key == "final_time") num(key, val, cfg.final_time);
        else if (key == "dt_warmup_steps") integer(key, val, cfg.dt_warmup_steps);
        else if (key == "eps_sequence") {
            if (val != "auto") cfg.eps_sequence = detail::parse_list(val, key);
        } else if (key == "dt_sequence") cfg.dt_sequence = detail::parse_list(val, key);
        else if (key == "superlevel_thresholds") {
            if (val != "auto") cfg.superlevel_thresholds = detail::parse_list(val, key);
        } else if (key == "out_dir") cfg.out_dir = val;
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "parallel") integer(key, val, cfg.parallel);
        else if (key == "dump_interval") integer(key, val, cfg.dump_interval);
        else if (key == "mode") cfg.mode = val;
        else problems.push_back("unknown key '" + key + "'");
    }
    if (!problems.empty()) {
        std::string msg = "config errors:";
        for (const auto& s : problems) msg += "\n  - " + s;
        throw ConfigError(msg);
    }

    // derive m1 = m2 - 1 unless given explicitly (then it must match)
    cfg.params.m1 = m1_given ? m1_value : cfg.params.m2 - 1.0;
    if (cfg.eps_auto) cfg.params.eps = cfg.params.hx() * cfg.params.hy();
    return cfg;
}

/// Peak initial density of a preset, used for the admissibility invariant.
inline double preset_max_density(const ExperimentConfig& cfg) {
    if (cfg.preset == "equilibrium" || cfg.preset == "shear-slip") return cfg.rho0;
    return cfg.rho0 + cfg.bump_amp;
}

/// Full validation; every violated invariant is listed in one error.
inline void validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> bad = cfg.params.validate();

    if (cfg.preset != "equilibrium" && cfg.preset != "gaussian-bump" &&
        cfg.preset != "shear-slip" && cfg.preset != "compressive-pulse")
        bad.push_back("unknown preset '" + cfg.preset + "'");
    else if (!(preset_max_density(cfg) < cfg.params.m1))
        bad.push_back("preset initial max density must stay below m1");
    if (!(cfg.rho0 > 0.0)) bad.push_back("rho0 must be > 0");
    if (cfg.bump_amp < 0.0) bad.push_back("bump_amp must be >= 0");
    if (cfg.steps < 1) bad.push_back("steps must be >= 1");
    if (cfg.final_time > 0.0) {
        const double ratio = cfg.final_time / cfg.params.dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            bad.push_back("final_time must be an integer multiple of dt");
    }
    if (cfg.mode != "run" && cfg.mode != "sweep-eps" && cfg.mode != "sweep-dt" &&
        cfg.mode != "verify")
        bad.push_back("unknown mode '" + cfg.mode + "'");
    for (size_t k = 0; k + 1 < cfg.eps_sequence.size(); ++k)
        if (!(cfg.eps_sequence[k] > cfg.eps_sequence[k + 1]))
            bad.push_back("eps_sequence must be strictly decreasing");
    for (double e : cfg.eps_sequence)
        if (!(e > 0.0)) bad.push_back("eps_sequence entries must be > 0");
    for (double d : cfg.dt_sequence)
        if (!(d > 0.0)) bad.push_back("dt_sequence entries must be > 0");
    for (double m : cfg.resolved_thresholds())
        if (!(m > 0.0)) bad.push_back("superlevel thresholds must be > 0");
    if (cfg.parallel < 1) bad.push_back("parallel must be >= 1");
    if (cfg.dt_warmup_steps < 0) bad.push_back("dt_warmup_steps must be >= 0");

    if (!bad.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& s : bad) msg += "\n  - " + s;
        throw ConfigError(msg);
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    ExperimentConfig cfg = parse_config(is, path);
    validate_config(cfg);
    return cfg;
}

/// Initial state for the configured preset; velocities are projected to
/// admissibility after sampling.
inline State make_initial_state(const ExperimentConfig& cfg) {
    const Params& p = cfg.params;
    const Grid g(p.nx, p.ny, p.domain_lx, p.domain_ly);
    const double cx = 0.5 * g.lx(), cy = 0.5 * g.ly();
    ScalarField rho(g, cfg.rho0);
    VectorField v(g);

    auto gauss = [&](double x, double y, double w) {
        const double dx = x - cx, dy = y - cy;
        return std::exp(-(dx * dx + dy * dy) / (2.0 * w * w));
    };

    if (cfg.preset == "gaussian-bump" || cfg.preset == "compressive-pulse") {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                rho.at(i, j) = cfg.rho0 + cfg.bump_amp * gauss(g.xc(i), g.yc(j), cfg.bump_width);
    }
    if (cfg.preset == "shear-slip") {
        constexpr double kPi = 3.14159265358979323846;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i)
                v.uat(i, j) = cfg.v_amp * std::sin(kPi * g.xf(i) / g.lx()) *
                              std::cos(kPi * g.yc(j) / g.ly());
    }
    if (cfg.preset == "compressive-pulse") {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i)
                v.uat(i, j) = -cfg.pulse_v0 * (g.xf(i) - cx) * gauss(g.xf(i), g.yc(j), cfg.pulse_width);
        for (int j = 0; j <= g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                v.vat(i, j) = -cfg.pulse_v0 * (g.yf(j) - cy) * gauss(g.xc(i), g.yf(j), cfg.pulse_width);
    }
    v.project_admissible();
    State s(std::move(rho), std::move(v));
    s.eps_used = p.eps;
    return s;
}

/// Writes the fully resolved configuration back out in the same format.
inline void write_config(std::ostream& os, const ExperimentConfig& cfg) {
    auto d = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    os << "mode = " << cfg.mode << "\n";
    os << "preset = " << cfg.preset << "\n";
    os << "mu = " << d(cfg.params.mu) << "\n";
    os << "nu = " << d(cfg.params.nu) << "\n";
    os << "gamma = " << d(cfg.params.gamma) << "\n";
    os << "friction = " << d(cfg.params.friction) << "\n";
    os << "dt = " << d(cfg.params.dt) << "\n";
    os << "eps = " << d(cfg.params.eps) << "\n";
    os << "m2 = " << d(cfg.params.m2) << "\n";
    os << "lx = " << d(cfg.params.domain_lx) << "\n";
    os << "ly = " << d(cfg.params.domain_ly) << "\n";
    os << "nx = " << cfg.params.nx << "\n";
    os << "ny = " << cfg.params.ny << "\n";
    os << "fp_tol = " << d(cfg.params.fp_tol) << "\n";
    os << "fp_max_iter = " << cfg.params.fp_max_iter << "\n";
    os << "lin_tol = " << d(cfg.params.lin_tol) << "\n";
    os << "theta = " << d(cfg.params.theta) << "\n";
    os << "rho0 = " << d(cfg.rho0) << "\n";
    os << "bump_amp = " << d(cfg.bump_amp) << "\n";
    os << "bump_width = " << d(cfg.bump_width) << "\n";
    os << "v_amp = " << d(cfg.v_amp) << "\n";
    os << "pulse_v0 = " << d(cfg.pulse_v0) << "\n";
    os << "pulse_width = " << d(cfg.pulse_width) << "\n";
    os << "steps = " << cfg.steps << "\n";
    os << "final_time = " << d(cfg.resolved_final_time()) << "\n";
    os << "dt_warmup_steps = " << cfg.dt_warmup_steps << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "parallel = " << cfg.parallel << "\n";
    os << "dump_interval = " << cfg.dump_interval << "\n";
    {
        const auto es = cfg.resolved_eps_sequence();
        os << "eps_sequence = ";
        for (size_t k = 0; k < es.size(); ++k) os << (k ? "," : "") << d(es[k]);
        os << "\n";
    }
    {
        os << "dt_sequence = ";
        for (size_t k = 0; k < cfg.dt_sequence.size(); ++k)
            os << (k ? "," : "") << d(cfg.dt_sequence[k]);
        os << "\n";
    }
    {
        const auto ms = cfg.resolved_thresholds();
        os << "superlevel_thresholds = ";
        for (size_t k = 0; k < ms.size(); ++k) os << (k ? "," : "") << d(ms[k]);
        os << "\n";
    }
}

}  // namespace rothe
