#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "becho/echo.hpp"
#include "becho/version.hpp"

// Plain-text experiment configs: one `key = value` per line, `#` comments.
// Unknown keys are rejected with a line number, and the resolved config can
// be serialized back into a file that reproduces the run.

namespace becho {

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

enum class ExperimentKind {
    echo_curve,
    loschmidt_curve,
    sigma_sweep,
    eps_sweep,
    k2_independence,
    lyapunov,
    gamma_estimate,
    fig1_repro,
};

enum class FitModelChoice { automatic, exponential, gaussian, lyapunov_capped, none };

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::echo_curve;

    ModelParams params;
    WavepacketSpec psi1;
    Rho2Kind rho2_kind = Rho2Kind::random_pure;
    double beta = 1.0;
    std::vector<double> mixture_weights;
    std::optional<std::uint64_t> rho2_seed;  // defaults to `seed`

    std::vector<int> times;  // empty = default grid from t_max (sweeps adapt per value)
    int t_max = 100;
    int realizations = 50;
    std::uint64_t seed = 0;
    std::uint64_t max_steps = default_step_budget;

    std::string output_dir = "out";
    int workers = 1;
    bool full_scale = false;
    bool dump_realizations = false;

    std::vector<double> sweep_values;
    std::vector<double> k2_values = {7.2, 10.09, 13.4};
    std::vector<double> sigma2_values = {0.0, 0.1};

    int n_traj = 100000;
    int t_steps = 10000;
    int max_lag = 10;
    int transient = 100;

    FitModelChoice fit_model = FitModelChoice::automatic;
    std::optional<std::pair<int, int>> fit_window;
    double tail_fraction = 0.25;

    // bookkeeping for "K2 defaults to K1" and friends
    bool k2_given = false;
    bool eps_b_given = false;
    bool k1_given = false;
    bool sigma1_given = false;
    bool t_max_given = false;

    Rho2Spec rho2_spec() const {
        Rho2Spec r;
        r.kind = rho2_kind;
        r.wavepacket = psi1;
        r.mixture_weights = mixture_weights;
        r.beta = beta;
        r.sample_count = realizations;
        r.seed = rho2_seed.value_or(seed);
        return r;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ConfigError(line, "expected a number, got '" + v + "'");
    }
}

inline long long parse_int(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return i;
    } catch (...) {
        throw ConfigError(line, "expected an integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(line, "expected a boolean, got '" + v + "'");
}

inline std::vector<std::string> split_csv(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

inline std::vector<double> parse_double_list(const std::string& v, int line) {
    std::vector<double> out;
    for (const std::string& item : split_csv(v)) out.push_back(parse_double(item, line));
    if (out.empty()) throw ConfigError(line, "empty list");
    return out;
}

/// Time-grid grammar: comma-separated "t", "a..b", or "a..b:step".
inline std::vector<int> parse_times(const std::string& v, int line) {
    std::vector<int> out;
    for (const std::string& item : split_csv(v)) {
        std::size_t dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(static_cast<int>(parse_int(item, line)));
            continue;
        }
        std::string rest = item.substr(dots + 2);
        std::size_t colon = rest.find(':');
        int a = static_cast<int>(parse_int(item.substr(0, dots), line));
        int step = 1;
        int b;
        if (colon == std::string::npos) {
            b = static_cast<int>(parse_int(rest, line));
        } else {
            b = static_cast<int>(parse_int(rest.substr(0, colon), line));
            step = static_cast<int>(parse_int(rest.substr(colon + 1), line));
        }
        if (step < 1) throw ConfigError(line, "time range step must be >= 1");
        if (b < a) throw ConfigError(line, "time range end before start");
        for (int t = a; t <= b; t += step) out.push_back(t);
    }
    for (std::size_t i = 0; i + 1 < out.size(); ++i)
        if (out[i + 1] <= out[i])
            throw ConfigError(line, "times must be strictly increasing");
    if (out.empty()) throw ConfigError(line, "empty time grid");
    return out;
}

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_g17(v[i]);
    }
    return out;
}

inline std::string join_times(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace detail

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::echo_curve: return "echo_curve";
        case ExperimentKind::loschmidt_curve: return "loschmidt_curve";
        case ExperimentKind::sigma_sweep: return "sigma_sweep";
        case ExperimentKind::eps_sweep: return "eps_sweep";
        case ExperimentKind::k2_independence: return "k2_independence";
        case ExperimentKind::lyapunov: return "lyapunov";
        case ExperimentKind::gamma_estimate: return "gamma_estimate";
        case ExperimentKind::fig1_repro: return "fig1_repro";
    }
    return "?";
}

inline const char* to_string(Rho2Kind k) {
    switch (k) {
        case Rho2Kind::wavepacket: return "wavepacket";
        case Rho2Kind::random_pure: return "random_pure";
        case Rho2Kind::random_mixture: return "random_mixture";
        case Rho2Kind::thermal: return "thermal";
    }
    return "?";
}

inline const char* to_string(FitModelChoice m) {
    switch (m) {
        case FitModelChoice::automatic: return "auto";
        case FitModelChoice::exponential: return "exponential";
        case FitModelChoice::gaussian: return "gaussian";
        case FitModelChoice::lyapunov_capped: return "lyapunov_capped";
        case FitModelChoice::none: return "none";
    }
    return "?";
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    bool have_experiment = false;
    std::optional<double> declared_hbar;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(lineno, "expected 'key = value'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(lineno, "missing key");
        if (val.empty()) throw ConfigError(lineno, "missing value for '" + key + "'");

        if (key == "experiment") {
            have_experiment = true;
            if (val == "echo_curve") cfg.kind = ExperimentKind::echo_curve;
            else if (val == "loschmidt_curve") cfg.kind = ExperimentKind::loschmidt_curve;
            else if (val == "sigma_sweep") cfg.kind = ExperimentKind::sigma_sweep;
            else if (val == "eps_sweep") cfg.kind = ExperimentKind::eps_sweep;
            else if (val == "k2_independence") cfg.kind = ExperimentKind::k2_independence;
            else if (val == "lyapunov") cfg.kind = ExperimentKind::lyapunov;
            else if (val == "gamma_estimate") cfg.kind = ExperimentKind::gamma_estimate;
            else if (val == "fig1_repro") cfg.kind = ExperimentKind::fig1_repro;
            else throw ConfigError(lineno, "unknown experiment kind '" + val + "'");
        } else if (key == "N") {
            cfg.params.n = static_cast<int>(detail::parse_int(val, lineno));
        } else if (key == "K1") {
            cfg.params.k1 = detail::parse_double(val, lineno);
            cfg.k1_given = true;
        } else if (key == "K2") {
            cfg.params.k2 = detail::parse_double(val, lineno);
            cfg.k2_given = true;
        } else if (key == "sigma1") {
            cfg.params.sigma1 = detail::parse_double(val, lineno);
            cfg.sigma1_given = true;
        } else if (key == "sigma2") {
            cfg.params.sigma2 = detail::parse_double(val, lineno);
        } else if (key == "eps") {
            cfg.params.eps_f = detail::parse_double(val, lineno);
        } else if (key == "eps_b") {
            cfg.params.eps_b = detail::parse_double(val, lineno);
            cfg.eps_b_given = true;
        } else if (key == "phase_offset") {
            cfg.params.phase_offset = detail::parse_double(val, lineno);
        } else if (key == "period") {
            cfg.params.period = detail::parse_double(val, lineno);
        } else if (key == "r0") {
            cfg.psi1.r0 = detail::parse_double(val, lineno);
        } else if (key == "p0") {
            cfg.psi1.p0 = detail::parse_double(val, lineno);
        } else if (key == "sigma_x") {
            cfg.psi1.sigma_x = detail::parse_double(val, lineno);
        } else if (key == "rho2_kind") {
            if (val == "wavepacket") cfg.rho2_kind = Rho2Kind::wavepacket;
            else if (val == "random_pure") cfg.rho2_kind = Rho2Kind::random_pure;
            else if (val == "random_mixture") cfg.rho2_kind = Rho2Kind::random_mixture;
            else if (val == "thermal") cfg.rho2_kind = Rho2Kind::thermal;
            else throw ConfigError(lineno, "unknown rho2 kind '" + val + "'");
        } else if (key == "beta") {
            cfg.beta = detail::parse_double(val, lineno);
        } else if (key == "mixture_weights") {
            cfg.mixture_weights = detail::parse_double_list(val, lineno);
        } else if (key == "rho2_seed") {
            cfg.rho2_seed = static_cast<std::uint64_t>(detail::parse_int(val, lineno));
        } else if (key == "times") {
            cfg.times = detail::parse_times(val, lineno);
        } else if (key == "t_max") {
            cfg.t_max = static_cast<int>(detail::parse_int(val, lineno));
            cfg.t_max_given = true;
        } else if (key == "realizations") {
            cfg.realizations = static_cast<int>(detail::parse_int(val, lineno));
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(detail::parse_int(val, lineno));
        } else if (key == "max_steps") {
            cfg.max_steps = static_cast<std::uint64_t>(detail::parse_int(val, lineno));
        } else if (key == "output_dir") {
            cfg.output_dir = val;
        } else if (key == "workers") {
            cfg.workers = static_cast<int>(detail::parse_int(val, lineno));
        } else if (key == "full") {
            cfg.full_scale = detail::parse_bool(val, lineno);
        } else if (key == "dump_realizations") {
            cfg.dump_realizations = detail::parse_bool(val, lineno);
        } else if (key == "sweep_values") {
            cfg.sweep_values = detail::parse_double_list(val, lineno);
        } else if (key == "k2_values") {
            cfg.k2_values = detail::parse_double_list(val, lineno);
        } else if (key == "sigma2_values") {
            cfg.sigma2_values = detail::parse_double_list(val, lineno);
        } else if (key == "n_traj") {
            cfg.n_traj = static_cast<int>(detail::parse_int(val, lineno));
        } else if (key == "t_steps") {
            cfg.t_steps = static_cast<int>(detail::parse_int(val, lineno));
        } else if (key == "max_lag") {
            cfg.max_lag = static_cast<int>(detail::parse_int(val, lineno));
        } else if (key == "transient") {
            cfg.transient = static_cast<int>(detail::parse_int(val, lineno));
        } else if (key == "fit_model") {
            if (val == "auto") cfg.fit_model = FitModelChoice::automatic;
            else if (val == "exponential") cfg.fit_model = FitModelChoice::exponential;
            else if (val == "gaussian") cfg.fit_model = FitModelChoice::gaussian;
            else if (val == "lyapunov_capped") cfg.fit_model = FitModelChoice::lyapunov_capped;
            else if (val == "none") cfg.fit_model = FitModelChoice::none;
            else throw ConfigError(lineno, "unknown fit model '" + val + "'");
        } else if (key == "fit_window") {
            if (val == "auto") {
                cfg.fit_window.reset();
            } else {
                std::vector<int> w = detail::parse_times(val, lineno);
                cfg.fit_window = std::make_pair(w.front(), w.back());
            }
        } else if (key == "tail_fraction") {
            cfg.tail_fraction = detail::parse_double(val, lineno);
        } else if (key == "hbar_eff") {
            declared_hbar = detail::parse_double(val, lineno);
        } else if (key == "version") {
            // informational echo from meta.txt; accepted, not interpreted
        } else {
            throw ConfigError(lineno, "unknown key '" + key + "'");
        }
    }

    if (!have_experiment) throw ConfigError(0, "missing required key 'experiment'");
    if (cfg.params.n == 0) cfg.params.n = 256;
    if (cfg.kind == ExperimentKind::fig1_repro) {
        // paper operating point unless overridden
        if (!cfg.k1_given) cfg.params.k1 = 10.09;
        if (!cfg.sigma1_given) cfg.params.sigma1 = 0.0018;
        if (!cfg.t_max_given) cfg.t_max = 150;
    }
    if (!cfg.k2_given) cfg.params.k2 = cfg.params.k1;
    if (!cfg.eps_b_given) cfg.params.eps_b = cfg.params.eps_f;

    try {
        cfg.params.validate();
    } catch (const std::exception& e) {
        throw ConfigError(0, e.what());
    }
    if (cfg.realizations < 0) throw ConfigError(0, "realizations must be >= 0");
    if (cfg.workers < 1) throw ConfigError(0, "workers must be >= 1");
    if (cfg.t_max < 1) throw ConfigError(0, "t_max must be >= 1");
    if (!(cfg.tail_fraction > 0.0 && cfg.tail_fraction <= 1.0))
        throw ConfigError(0, "tail_fraction must be in (0, 1]");
    if (declared_hbar && std::abs(*declared_hbar - cfg.params.hbar_eff()) > 1e-12)
        throw ConfigError(0, "declared hbar_eff conflicts with 2*pi/N");

    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Default measurement grid: every period up to 30, then every 5.
inline std::vector<int> default_time_grid(int t_max) {
    std::vector<int> t;
    for (int k = 0; k <= std::min(30, t_max); ++k) t.push_back(k);
    for (int k = 35; k <= t_max; k += 5) t.push_back(k);
    return t;
}

/// Serialized resolved config; reparsing it reproduces the run.
inline std::string serialize_config(const ExperimentConfig& cfg) {
    using detail::format_g17;
    std::ostringstream out;
    out << "# resolved configuration (reparseable)\n";
    out << "version = " << becho_version << "\n";
    out << "experiment = " << to_string(cfg.kind) << "\n";
    out << "N = " << cfg.params.n << "\n";
    out << "hbar_eff = " << format_g17(cfg.params.hbar_eff()) << "\n";
    out << "K1 = " << format_g17(cfg.params.k1) << "\n";
    out << "K2 = " << format_g17(cfg.params.k2) << "\n";
    out << "sigma1 = " << format_g17(cfg.params.sigma1) << "\n";
    out << "sigma2 = " << format_g17(cfg.params.sigma2) << "\n";
    out << "eps = " << format_g17(cfg.params.eps_f) << "\n";
    out << "eps_b = " << format_g17(cfg.params.eps_b) << "\n";
    out << "phase_offset = " << format_g17(cfg.params.phase_offset) << "\n";
    out << "period = " << format_g17(cfg.params.period) << "\n";
    out << "r0 = " << format_g17(cfg.psi1.r0) << "\n";
    out << "p0 = " << format_g17(cfg.psi1.p0) << "\n";
    out << "sigma_x = "
        << format_g17(cfg.psi1.sigma_x.value_or(std::sqrt(cfg.params.hbar_eff()))) << "\n";
    out << "rho2_kind = " << to_string(cfg.rho2_kind) << "\n";
    out << "beta = " << format_g17(cfg.beta) << "\n";
    if (!cfg.mixture_weights.empty())
        out << "mixture_weights = " << detail::join_doubles(cfg.mixture_weights) << "\n";
    out << "rho2_seed = " << cfg.rho2_seed.value_or(cfg.seed) << "\n";
    if (!cfg.times.empty())
        out << "times = " << detail::join_times(cfg.times) << "\n";
    out << "t_max = " << cfg.t_max << "\n";
    out << "realizations = " << cfg.realizations << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "max_steps = " << cfg.max_steps << "\n";
    out << "output_dir = " << cfg.output_dir << "\n";
    out << "workers = " << cfg.workers << "\n";
    out << "full = " << (cfg.full_scale ? "true" : "false") << "\n";
    out << "dump_realizations = " << (cfg.dump_realizations ? "true" : "false") << "\n";
    if (!cfg.sweep_values.empty())
        out << "sweep_values = " << detail::join_doubles(cfg.sweep_values) << "\n";
    if (cfg.kind == ExperimentKind::k2_independence) {
        out << "k2_values = " << detail::join_doubles(cfg.k2_values) << "\n";
        out << "sigma2_values = " << detail::join_doubles(cfg.sigma2_values) << "\n";
    }
    out << "n_traj = " << cfg.n_traj << "\n";
    out << "t_steps = " << cfg.t_steps << "\n";
    out << "max_lag = " << cfg.max_lag << "\n";
    out << "transient = " << cfg.transient << "\n";
    out << "fit_model = " << to_string(cfg.fit_model) << "\n";
    if (cfg.fit_window)
        out << "fit_window = " << cfg.fit_window->first << ".." << cfg.fit_window->second << "\n";
    out << "tail_fraction = " << format_g17(cfg.tail_fraction) << "\n";
    return out.str();
}

}  // namespace becho
