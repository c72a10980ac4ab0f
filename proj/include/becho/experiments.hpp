#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "becho/analysis.hpp"
#include "becho/classical.hpp"
#include "becho/config.hpp"

// Experiment dispatch: turns a parsed config into curves, fits and the three
// output files (curve.csv / fit.txt / meta.txt), plus per-value
// subdirectories for sweeps.  Also the cost estimator behind `estimate`.

namespace becho::experiments {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// planning

/// fig1_repro honors --full by switching to the paper's N = 1024.
inline ExperimentConfig resolve_scale(const ExperimentConfig& cfg) {
    ExperimentConfig out = cfg;
    if (cfg.kind == ExperimentKind::fig1_repro && cfg.full_scale) out.params.n = 1024;
    return out;
}

/// Classical golden-rule prediction used to size measurement grids.
inline double expected_rate(const ExperimentConfig& cfg, double sigma1, double eps) {
    double hbar = cfg.params.hbar_eff();
    double rate = 0.0;
    if (sigma1 > 0.0)
        rate += classical::gamma_sigma1(sigma1, cfg.params.k1, hbar, 20000,
                                        cfg.max_lag, cfg.seed).gamma;
    if (eps > 0.0)
        rate += 2.0 * classical::gamma_coupling(eps, cfg.params.k1, cfg.params.k2,
                                                cfg.params.phase_offset, hbar, 20000,
                                                cfg.max_lag, cfg.seed).gamma;
    return rate;
}

/// Grid sized so the fit window (mean in [10/N, 0.8]) is well sampled:
/// dense early, then ~16 coarser points out to saturation.
inline std::vector<int> adaptive_time_grid(double rate, int n_hilbert, int fallback_t_max) {
    int t_max;
    if (rate > 1e-9) {
        double t_target = std::log(0.8 * n_hilbert / 10.0) / rate;
        t_max = static_cast<int>(std::ceil(1.2 * t_target)) + 4;
        t_max = std::clamp(t_max, 8, 600);
    } else {
        t_max = fallback_t_max;
    }
    std::vector<int> t = {0};
    for (int k = 1; k <= std::min(12, t_max); ++k) t.push_back(k);
    int step = std::max(1, (t_max - 12 + 15) / 16);
    for (int k = 12 + step; k <= t_max; k += step) t.push_back(k);
    return t;
}

struct SubRun {
    std::string label;  // subdirectory name; empty = top level
    EchoRunSpec spec;
};

inline EchoRunSpec base_spec(const ExperimentConfig& cfg) {
    EchoRunSpec spec;
    spec.params = cfg.params;
    spec.psi1 = cfg.psi1;
    spec.rho2 = cfg.rho2_spec();
    spec.times = cfg.times.empty() ? default_time_grid(cfg.t_max) : cfg.times;
    spec.realizations = cfg.realizations;
    spec.seed = cfg.seed;
    spec.max_steps = cfg.max_steps;
    spec.keep_realization_values = cfg.dump_realizations;
    return spec;
}

inline std::string value_label(const std::string& prefix, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s_%.6g", prefix.c_str(), v);
    return buf;
}

/// The echo runs an experiment will execute, shared between `run` and
/// `estimate` so predicted and actual cost always agree.
inline std::vector<SubRun> plan_echo_subruns(const ExperimentConfig& raw) {
    ExperimentConfig cfg = resolve_scale(raw);
    std::vector<SubRun> runs;
    switch (cfg.kind) {
        case ExperimentKind::echo_curve: {
            runs.push_back({"", base_spec(cfg)});
            break;
        }
        case ExperimentKind::sigma_sweep:
        case ExperimentKind::eps_sweep: {
            if (cfg.sweep_values.empty())
                throw ConfigError(0, "sweep requires sweep_values");
            bool sigma_axis = cfg.kind == ExperimentKind::sigma_sweep;
            for (double v : cfg.sweep_values) {
                EchoRunSpec spec = base_spec(cfg);
                double sigma1 = sigma_axis ? v : cfg.params.sigma1;
                double eps = sigma_axis ? cfg.params.eps_f : v;
                spec.params.sigma1 = sigma1;
                spec.params.eps_f = spec.params.eps_b = eps;
                if (cfg.times.empty())
                    spec.times = adaptive_time_grid(expected_rate(cfg, sigma1, eps),
                                                    cfg.params.n, cfg.t_max);
                runs.push_back({value_label(sigma_axis ? "sigma" : "eps", v), spec});
            }
            break;
        }
        case ExperimentKind::k2_independence: {
            std::vector<int> times = cfg.times;
            if (times.empty())
                times = adaptive_time_grid(
                    expected_rate(cfg, cfg.params.sigma1, cfg.params.eps_f),
                    cfg.params.n, cfg.t_max);
            for (double v : cfg.k2_values) {
                EchoRunSpec spec = base_spec(cfg);
                spec.params.k2 = v;
                spec.times = times;
                runs.push_back({value_label("k2", v), spec});
            }
            for (double w : cfg.sigma2_values) {
                EchoRunSpec spec = base_spec(cfg);
                spec.params.sigma2 = w;
                spec.times = times;
                runs.push_back({value_label("sigma2", w), spec});
            }
            break;
        }
        case ExperimentKind::fig1_repro: {
            std::vector<double> eps_list =
                cfg.sweep_values.empty() ? std::vector<double>{0.0, 0.0018, 0.0037}
                                         : cfg.sweep_values;
            for (double eps : eps_list) {
                EchoRunSpec spec = base_spec(cfg);
                spec.params.eps_f = spec.params.eps_b = eps;
                runs.push_back({value_label("eps", eps), spec});
            }
            break;
        }
        default:
            break;
    }
    return runs;
}

inline LoschmidtRunSpec loschmidt_spec(const ExperimentConfig& cfg) {
    LoschmidtRunSpec spec;
    spec.n = cfg.params.n;
    spec.k1 = cfg.params.k1;
    spec.sigma1 = cfg.params.sigma1;
    spec.period = cfg.params.period;
    spec.psi1 = cfg.psi1;
    spec.times = cfg.times.empty() ? default_time_grid(cfg.t_max) : cfg.times;
    spec.realizations = cfg.realizations;
    spec.seed = cfg.seed;
    spec.max_steps = cfg.max_steps;
    spec.keep_realization_values = cfg.dump_realizations;
    return spec;
}

// ---------------------------------------------------------------------------
// output files

inline void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

inline std::string curve_csv(const EchoCurve& curve) {
    std::string out = "t,mean,stderr,realizations\n";
    char buf[128];
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d\n", curve.times[i],
                      curve.mean[i], curve.stderr_[i], curve.realizations);
        out += buf;
    }
    return out;
}

inline std::string realizations_csv(const EchoCurve& curve) {
    std::string out = "t,realization,value\n";
    char buf[96];
    std::size_t nt = curve.times.size();
    for (int r = 0; r < curve.realizations; ++r)
        for (std::size_t i = 0; i < nt; ++i) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", curve.times[i], r,
                          curve.realization_values[std::size_t(r) * nt + i]);
            out += buf;
        }
    return out;
}

inline std::string fit_block(const DecayFit& fit) {
    using detail::format_g17;
    std::string out;
    switch (fit.model) {
        case DecayModel::exponential: out += "model = exponential\n"; break;
        case DecayModel::gaussian: out += "model = gaussian\n"; break;
        case DecayModel::lyapunov_capped: out += "model = lyapunov_capped\n"; break;
    }
    if (fit.model == DecayModel::gaussian) {
        out += "quad_coeff = " + format_g17(fit.quad_coeff) + "\n";
        out += "quad_coeff_stderr = " + format_g17(fit.rate_stderr) + "\n";
    } else {
        out += "rate = " + format_g17(fit.rate) + "\n";
        out += "rate_stderr = " + format_g17(fit.rate_stderr) + "\n";
    }
    out += "prefactor = " + format_g17(fit.prefactor) + "\n";
    out += "window = [" + std::to_string(fit.window_lo) + ", " +
           std::to_string(fit.window_hi) + "]\n";
    out += "residual_rms_log = " + format_g17(fit.residual_rms_log) + "\n";
    out += "dof = " + std::to_string(fit.dof) + "\n";
    return out;
}

inline FitWindowPolicy window_policy(const ExperimentConfig& cfg) {
    if (cfg.fit_window)
        return FitWindowPolicy::window(cfg.fit_window->first, cfg.fit_window->second);
    return FitWindowPolicy::auto_window();
}

/// Fit text for one curve under the configured model choice; fit failures
/// are reported in the file rather than aborting the run.
inline std::string fit_report(const EchoCurve& curve, const ExperimentConfig& cfg,
                              std::optional<DecayFit>* headline = nullptr) {
    FitWindowPolicy policy = window_policy(cfg);
    std::string out;
    auto run_fit = [&](FitModelChoice m) -> std::optional<DecayFit> {
        try {
            switch (m) {
                case FitModelChoice::exponential: return fit_exponential(curve, policy);
                case FitModelChoice::gaussian: return fit_gaussian(curve, policy);
                case FitModelChoice::lyapunov_capped: {
                    double lambda =
                        classical::lyapunov_exponent(curve.params.k1, 200, 2000, cfg.seed)
                            .lambda;
                    return fit_lyapunov_capped(curve, policy, lambda);
                }
                default: return std::nullopt;
            }
        } catch (const FitError& e) {
            out += std::string("fit_error = ") + e.what() + "\n";
            return std::nullopt;
        }
    };

    std::optional<DecayFit> chosen;
    if (cfg.fit_model == FitModelChoice::none) {
        out += "model = none\n";
    } else if (cfg.fit_model == FitModelChoice::automatic) {
        std::optional<DecayFit> e = run_fit(FitModelChoice::exponential);
        std::optional<DecayFit> g = run_fit(FitModelChoice::gaussian);
        if (e) out += fit_block(*e);
        if (g) out += fit_block(*g);
        if (e && g) {
            chosen = e->residual_rms_log <= g->residual_rms_log ? e : g;
            out += std::string("selected = ") +
                   (chosen->model == DecayModel::exponential ? "exponential" : "gaussian") +
                   "\n";
        } else {
            chosen = e ? e : g;
        }
    } else {
        chosen = run_fit(cfg.fit_model);
        if (chosen) out += fit_block(*chosen);
    }

    try {
        SaturationEstimate sat = detect_saturation(curve, cfg.tail_fraction);
        if (!sat.decaying) {
            out += "plateau = " + detail::format_g17(sat.plateau) + "\n";
            out += "plateau_expected = " + detail::format_g17(sat.expected) + "\n";
            out += std::string("plateau_matches_inverse_n = ") +
                   (sat.matches_expected ? "true" : "false") + "\n";
        }
    } catch (const FitError&) {
    }

    if (headline) *headline = chosen;
    return out;
}

inline void write_run_outputs(const fs::path& dir, const EchoCurve& curve,
                              const ExperimentConfig& cfg, const std::string& fit_text) {
    fs::create_directories(dir);
    write_file(dir / "curve.csv", curve_csv(curve));
    write_file(dir / "fit.txt", fit_text);
    write_file(dir / "meta.txt", serialize_config(cfg));
    if (cfg.dump_realizations && !curve.realization_values.empty())
        write_file(dir / "realizations.csv", realizations_csv(curve));
}

/// Config echoed into a subdirectory's meta.txt: the sub-run resolved as a
/// plain echo_curve so it can be replayed in isolation.
inline ExperimentConfig subrun_config(const ExperimentConfig& cfg, const EchoRunSpec& spec,
                                      const std::string& label) {
    ExperimentConfig sub = resolve_scale(cfg);
    sub.kind = ExperimentKind::echo_curve;
    sub.params = spec.params;
    sub.times = spec.times;
    sub.output_dir = (fs::path(cfg.output_dir) / label).string();
    sub.sweep_values.clear();
    sub.fit_model = cfg.fit_model == FitModelChoice::gaussian ? FitModelChoice::gaussian
                                                              : FitModelChoice::exponential;
    return sub;
}

// ---------------------------------------------------------------------------
// experiment bodies

inline void run_single_curve(const ExperimentConfig& cfg, std::ostream& log) {
    EchoCurve curve;
    if (cfg.kind == ExperimentKind::loschmidt_curve)
        curve = loschmidt_echo_curve(loschmidt_spec(cfg), cfg.workers);
    else
        curve = boltzmann_echo_curve(plan_echo_subruns(cfg)[0].spec, cfg.workers);

    ExperimentConfig resolved = resolve_scale(cfg);
    if (resolved.times.empty())
        resolved.times = cfg.kind == ExperimentKind::loschmidt_curve
                             ? loschmidt_spec(cfg).times
                             : plan_echo_subruns(cfg)[0].spec.times;
    std::string fit_text = fit_report(curve, resolved);
    write_run_outputs(cfg.output_dir, curve, resolved, fit_text);
    log << "wrote " << (fs::path(cfg.output_dir) / "curve.csv").string() << "\n";
}

struct LabeledFit {
    std::string label;
    double value = 0.0;
    std::optional<DecayFit> fit;
};

inline std::vector<LabeledFit> run_subruns(const ExperimentConfig& cfg,
                                           const std::vector<SubRun>& runs,
                                           std::ostream& log) {
    std::vector<LabeledFit> fits;
    for (const SubRun& sub : runs) {
        EchoCurve curve = boltzmann_echo_curve(sub.spec, cfg.workers);
        ExperimentConfig subcfg = subrun_config(cfg, sub.spec, sub.label);
        std::optional<DecayFit> fit;
        std::string fit_text = fit_report(curve, subcfg, &fit);
        write_run_outputs(fs::path(cfg.output_dir) / sub.label, curve, subcfg, fit_text);
        log << "  " << sub.label << ": done\n";
        LabeledFit lf;
        lf.label = sub.label;
        std::size_t us = sub.label.rfind('_');
        if (us != std::string::npos) lf.value = std::stod(sub.label.substr(us + 1));
        lf.fit = fit;
        fits.push_back(std::move(lf));
    }
    return fits;
}

inline std::string rates_csv(const std::vector<LabeledFit>& fits) {
    std::string out = "label,value,rate,rate_stderr\n";
    char buf[160];
    for (const LabeledFit& f : fits) {
        double rate = 0.0, se = 0.0;
        if (f.fit) {
            rate = f.fit->model == DecayModel::gaussian ? f.fit->quad_coeff : f.fit->rate;
            se = f.fit->rate_stderr;
        }
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\n", f.label.c_str(), f.value,
                      rate, se);
        out += buf;
    }
    return out;
}

inline void run_sweep(const ExperimentConfig& cfg, std::ostream& log) {
    ExperimentConfig resolved = resolve_scale(cfg);
    std::vector<SubRun> runs = plan_echo_subruns(cfg);
    std::vector<LabeledFit> fits = run_subruns(cfg, runs, log);

    bool gaussian = cfg.fit_model == FitModelChoice::gaussian;
    std::string report;
    std::vector<std::pair<double, double>> points;
    for (const LabeledFit& f : fits) {
        if (!f.fit) {
            report += f.label + ": fit failed\n";
            continue;
        }
        double r = gaussian ? f.fit->quad_coeff : f.fit->rate;
        report += f.label + ": " + (gaussian ? "quad_coeff = " : "rate = ") +
                  detail::format_g17(r) + " +- " + detail::format_g17(f.fit->rate_stderr) +
                  "  window [" + std::to_string(f.fit->window_lo) + ", " +
                  std::to_string(f.fit->window_hi) + "]  residual " +
                  detail::format_g17(f.fit->residual_rms_log) + "\n";
        if (f.value > 0.0 && r > 0.0) points.push_back({f.value, r});
    }
    if (points.size() >= 3) {
        try {
            ScalingFit sf = scaling_regression(points);
            report += "scaling_exponent = " + detail::format_g17(sf.exponent) + "\n";
            report += "scaling_exponent_stderr = " + detail::format_g17(sf.exponent_stderr) + "\n";
            report += "scaling_coefficient = " + detail::format_g17(sf.coefficient) + "\n";
        } catch (const std::exception& e) {
            report += std::string("scaling_error = ") + e.what() + "\n";
        }
    }
    fs::create_directories(cfg.output_dir);
    write_file(fs::path(cfg.output_dir) / "fit.txt", report);
    write_file(fs::path(cfg.output_dir) / "rates.csv", rates_csv(fits));
    write_file(fs::path(cfg.output_dir) / "meta.txt", serialize_config(resolved));
}

inline void run_k2_independence(const ExperimentConfig& cfg, std::ostream& log) {
    ExperimentConfig resolved = resolve_scale(cfg);
    std::vector<SubRun> runs = plan_echo_subruns(cfg);
    std::vector<LabeledFit> fits = run_subruns(cfg, runs, log);

    std::string report;
    double worst = 0.0;
    bool all_fit = true;
    for (const LabeledFit& f : fits) {
        if (!f.fit) {
            report += f.label + ": fit failed\n";
            all_fit = false;
            continue;
        }
        report += f.label + ": rate = " + detail::format_g17(f.fit->rate) + " +- " +
                  detail::format_g17(f.fit->rate_stderr) + "\n";
    }
    if (all_fit) {
        for (std::size_t i = 0; i < fits.size(); ++i)
            for (std::size_t j = i + 1; j < fits.size(); ++j) {
                double d = std::abs(fits[i].fit->rate - fits[j].fit->rate);
                double se = std::sqrt(sqr(fits[i].fit->rate_stderr) +
                                      sqr(fits[j].fit->rate_stderr));
                if (se > 0.0) worst = std::max(worst, d / se);
            }
        report += "max_pairwise_sigma = " + detail::format_g17(worst) + "\n";
        report += std::string("consistent_within_2sigma = ") +
                  (worst <= 2.0 ? "true" : "false") + "\n";
    }
    fs::create_directories(cfg.output_dir);
    write_file(fs::path(cfg.output_dir) / "fit.txt", report);
    write_file(fs::path(cfg.output_dir) / "rates.csv", rates_csv(fits));
    write_file(fs::path(cfg.output_dir) / "meta.txt", serialize_config(resolved));
}

inline void run_fig1(const ExperimentConfig& cfg, std::ostream& log) {
    ExperimentConfig resolved = resolve_scale(cfg);
    if (resolved.sweep_values.empty())
        resolved.sweep_values = {0.0, 0.0018, 0.0037};
    std::vector<SubRun> runs = plan_echo_subruns(cfg);

    std::vector<EchoCurve> curves;
    std::vector<LabeledFit> fits;
    for (const SubRun& sub : runs) {
        EchoCurve curve = boltzmann_echo_curve(sub.spec, cfg.workers);
        ExperimentConfig subcfg = subrun_config(resolved, sub.spec, sub.label);
        std::optional<DecayFit> fit;
        std::string fit_text = fit_report(curve, subcfg, &fit);
        write_run_outputs(fs::path(cfg.output_dir) / sub.label, curve, subcfg, fit_text);
        log << "  " << sub.label << ": done\n";
        LabeledFit lf;
        lf.label = sub.label;
        lf.value = sub.spec.params.eps_f;
        lf.fit = fit;
        curves.push_back(std::move(curve));
        fits.push_back(std::move(lf));
    }

    // Decay-speed ordering: at common mid-decay times a stronger coupling
    // must sit at or below a weaker one (right-to-left in Fig. 1 terms).
    std::string report;
    for (const LabeledFit& f : fits)
        if (f.fit)
            report += f.label + ": rate = " + detail::format_g17(f.fit->rate) + " +- " +
                      detail::format_g17(f.fit->rate_stderr) + "\n";
    bool ordered = true;
    const std::vector<int>& times = curves[0].times;
    for (std::size_t i = 0; i + 1 < curves.size(); ++i)
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            if (times[ti] < 10 || times[ti] > 30) continue;
            double tol = 3.0 * (curves[i].stderr_[ti] + curves[i + 1].stderr_[ti]);
            if (curves[i + 1].mean[ti] > curves[i].mean[ti] + tol) ordered = false;
        }
    report += std::string("decay_order_matches_coupling_order = ") +
              (ordered ? "true" : "false") + "\n";

    fs::create_directories(cfg.output_dir);
    write_file(fs::path(cfg.output_dir) / "fit.txt", report);
    write_file(fs::path(cfg.output_dir) / "rates.csv", rates_csv(fits));
    write_file(fs::path(cfg.output_dir) / "meta.txt", serialize_config(resolved));
}

inline void run_lyapunov(const ExperimentConfig& cfg, std::ostream& log) {
    std::string csv = "t,mean,stderr,realizations\n";
    char buf[128];
    classical::LyapunovEstimate final_est;
    for (int quarter = 1; quarter <= 4; ++quarter) {
        int steps = cfg.t_steps * quarter / 4;
        if (steps <= cfg.transient) continue;
        classical::LyapunovEstimate est = classical::lyapunov_exponent(
            cfg.params.k1, cfg.n_traj, steps, cfg.seed, cfg.transient);
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d\n", steps, est.lambda,
                      est.stderr_, est.n_trajectories);
        csv += buf;
        final_est = est;
    }
    std::string report = "model = lyapunov\n";
    report += "lambda = " + detail::format_g17(final_est.lambda) + "\n";
    report += "lambda_stderr = " + detail::format_g17(final_est.stderr_) + "\n";
    report += "ln_k_half = " + detail::format_g17(std::log(cfg.params.k1 / 2.0)) + "\n";
    report += "n_trajectories = " + std::to_string(cfg.n_traj) + "\n";
    report += "t_steps = " + std::to_string(cfg.t_steps) + "\n";
    report += "transient = " + std::to_string(cfg.transient) + "\n";

    fs::create_directories(cfg.output_dir);
    write_file(fs::path(cfg.output_dir) / "curve.csv", csv);
    write_file(fs::path(cfg.output_dir) / "fit.txt", report);
    write_file(fs::path(cfg.output_dir) / "meta.txt", serialize_config(cfg));
    log << "lambda = " << final_est.lambda << "\n";
}

inline std::string correlator_csv(const classical::RateEstimate& est) {
    std::string out = "t,mean,stderr,realizations\n";
    char buf[128];
    for (std::size_t m = 0; m < est.correlators.size(); ++m) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d\n", m, est.correlators[m],
                      est.correlator_stderr[m], est.n_trajectories);
        out += buf;
    }
    return out;
}

inline void run_gamma_estimate(const ExperimentConfig& cfg, std::ostream& log) {
    if (cfg.params.sigma1 <= 0.0 && cfg.params.eps_f <= 0.0)
        throw ConfigError(0, "gamma_estimate requires sigma1 > 0 or eps > 0");
    double hbar = cfg.params.hbar_eff();
    std::string report;
    std::optional<classical::RateEstimate> sig, cpl;
    if (cfg.params.sigma1 > 0.0) {
        sig = classical::gamma_sigma1(cfg.params.sigma1, cfg.params.k1, hbar, cfg.n_traj,
                                      cfg.max_lag, cfg.seed);
        report += "gamma_sigma1 = " + detail::format_g17(sig->gamma) + "\n";
        report += "gamma_sigma1_coefficient = " +
                  detail::format_g17(sig->gamma / sqr(cfg.params.sigma1)) + "\n";
        report += "correlator_sum_sigma = " + detail::format_g17(sig->correlator_sum) + "\n";
    }
    if (cfg.params.eps_f > 0.0) {
        cpl = classical::gamma_coupling(cfg.params.eps_f, cfg.params.k1, cfg.params.k2,
                                        cfg.params.phase_offset, hbar, cfg.n_traj,
                                        cfg.max_lag, cfg.seed);
        report += "gamma_coupling = " + detail::format_g17(cpl->gamma) + "\n";
        report += "gamma_coupling_coefficient = " +
                  detail::format_g17(cpl->gamma / sqr(cfg.params.eps_f)) + "\n";
        report += "correlator_sum_coupling = " + detail::format_g17(cpl->correlator_sum) + "\n";
        report += "predicted_echo_rate = " +
                  detail::format_g17(2.0 * cpl->gamma +
                                     (sig ? sig->gamma : 0.0)) + "\n";
    }
    fs::create_directories(cfg.output_dir);
    write_file(fs::path(cfg.output_dir) / "curve.csv",
               correlator_csv(sig ? *sig : *cpl));
    if (sig && cpl)
        write_file(fs::path(cfg.output_dir) / "correlators_coupling.csv",
                   correlator_csv(*cpl));
    write_file(fs::path(cfg.output_dir) / "fit.txt", report);
    write_file(fs::path(cfg.output_dir) / "meta.txt", serialize_config(cfg));
    log << "gamma estimate written\n";
}

inline void run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    switch (cfg.kind) {
        case ExperimentKind::echo_curve:
        case ExperimentKind::loschmidt_curve:
            run_single_curve(cfg, log);
            return;
        case ExperimentKind::sigma_sweep:
        case ExperimentKind::eps_sweep:
            run_sweep(cfg, log);
            return;
        case ExperimentKind::k2_independence:
            run_k2_independence(cfg, log);
            return;
        case ExperimentKind::fig1_repro:
            run_fig1(cfg, log);
            return;
        case ExperimentKind::lyapunov:
            run_lyapunov(cfg, log);
            return;
        case ExperimentKind::gamma_estimate:
            run_gamma_estimate(cfg, log);
            return;
    }
}

// ---------------------------------------------------------------------------
// cost estimation

struct CostEstimate {
    std::uint64_t joint_steps = 0;    // two-particle Floquet periods
    std::uint64_t single_steps = 0;   // one-particle periods
    std::uint64_t map_steps = 0;      // classical map iterations
    std::uint64_t state_bytes = 0;    // one joint grid, N^2 complex doubles
    double per_step_seconds = 0.0;
    double wall_seconds = 0.0;
    double model_relative_cost = 0.0;  // ~ N^2 log2 N per step
    bool over_budget = false;
    std::uint64_t budget = 0;
};

/// Leading-order per-step cost model for the spectral propagation.
inline double step_cost_model(int n) {
    return double(n) * double(n) * std::log2(double(n));
}

/// Measured seconds per one-particle Floquet period at this N.
inline double benchmark_step_1p_seconds(int n) {
    Step1P fwd = build_forward_step_1p(n, 10.09);
    WaveFunction1P psi;
    psi.amp.assign(n, cplx(1.0 / std::sqrt(double(n))));
    int reps = 2000;
    apply_step_1p(fwd, psi);
    auto t0 = std::chrono::steady_clock::now();
    for (int k = 0; k < reps; ++k) apply_step_1p(fwd, psi);
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / reps;
}

/// Measured seconds per joint Floquet period at this N.
inline double benchmark_step_seconds(int n) {
    ModelParams p;
    p.n = n;
    p.k1 = p.k2 = 10.09;
    FloquetStep fwd = build_forward_step(p);
    JointState psi;
    psi.n = n;
    psi.amp.assign(std::size_t(n) * n, cplx(1.0 / n));
    int reps = n >= 1024 ? 3 : (n >= 512 ? 6 : (n >= 256 ? 12 : 50));
    apply_step(fwd, psi);  // touch plans once before timing
    auto t0 = std::chrono::steady_clock::now();
    for (int k = 0; k < reps; ++k) apply_step(fwd, psi);
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / reps;
}

inline CostEstimate estimate_cost(const ExperimentConfig& raw) {
    ExperimentConfig cfg = resolve_scale(raw);
    CostEstimate est;
    est.budget = cfg.max_steps;
    est.state_bytes = std::uint64_t(cfg.params.n) * cfg.params.n * sizeof(cplx);
    est.model_relative_cost = step_cost_model(cfg.params.n);

    switch (cfg.kind) {
        case ExperimentKind::loschmidt_curve: {
            LoschmidtRunSpec spec = loschmidt_spec(cfg);
            est.single_steps = std::uint64_t(spec.realizations) *
                               detail::periods_per_realization(spec.times);
            est.state_bytes = std::uint64_t(cfg.params.n) * sizeof(cplx);
            est.per_step_seconds = benchmark_step_1p_seconds(cfg.params.n);
            est.wall_seconds = double(est.single_steps) * est.per_step_seconds /
                               std::max(1, cfg.workers);
            est.over_budget = est.single_steps > cfg.max_steps;
            return est;
        }
        case ExperimentKind::lyapunov:
            est.map_steps = std::uint64_t(cfg.n_traj) * cfg.t_steps;
            est.wall_seconds = double(est.map_steps) * 4e-8;
            return est;
        case ExperimentKind::gamma_estimate:
            est.map_steps = std::uint64_t(cfg.n_traj) * (cfg.max_lag + 1) * 2;
            est.wall_seconds = double(est.map_steps) * 4e-8;
            return est;
        default: {
            for (const SubRun& sub : plan_echo_subruns(cfg))
                est.joint_steps += std::uint64_t(sub.spec.realizations) *
                                   detail::periods_per_realization(sub.spec.times);
            est.per_step_seconds = benchmark_step_seconds(cfg.params.n);
            est.wall_seconds =
                double(est.joint_steps) * est.per_step_seconds / std::max(1, cfg.workers);
            est.over_budget = est.joint_steps > cfg.max_steps;
            return est;
        }
    }
}

inline void print_cost_estimate(const CostEstimate& est, std::ostream& out) {
    char buf[256];
    if (est.joint_steps) {
        std::snprintf(buf, sizeof buf, "joint Floquet periods: %llu\n",
                      static_cast<unsigned long long>(est.joint_steps));
        out << buf;
    }
    if (est.single_steps) {
        std::snprintf(buf, sizeof buf, "one-particle periods: %llu\n",
                      static_cast<unsigned long long>(est.single_steps));
        out << buf;
    }
    if (est.map_steps) {
        std::snprintf(buf, sizeof buf, "classical map steps: %llu\n",
                      static_cast<unsigned long long>(est.map_steps));
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "state memory per worker: %.1f MiB\n",
                  double(est.state_bytes) / (1024.0 * 1024.0));
    out << buf;
    if (est.per_step_seconds > 0.0) {
        std::snprintf(buf, sizeof buf, "benchmarked per-step time: %.3g s\n",
                      est.per_step_seconds);
        out << buf;
        std::snprintf(buf, sizeof buf, "relative cost model (N^2 log2 N): %.4g\n",
                      est.model_relative_cost);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "estimated wall time: %.3g s\n", est.wall_seconds);
    out << buf;
    if (est.over_budget) {
        std::snprintf(buf, sizeof buf, "OVER BUDGET: exceeds max_steps = %llu\n",
                      static_cast<unsigned long long>(est.budget));
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// entry point shared by the CLI and the tests

struct RunOverrides {
    int workers = 0;           // 0 = keep config value
    std::string output_dir;    // empty = keep config value
    bool full = false;
};

inline int run_config_file(const std::string& path, const RunOverrides& overrides,
                           bool estimate_only, std::ostream& log) {
    try {
        ExperimentConfig cfg = parse_config_file(path);
        if (overrides.workers > 0) cfg.workers = overrides.workers;
        if (!overrides.output_dir.empty()) cfg.output_dir = overrides.output_dir;
        if (overrides.full) cfg.full_scale = true;
        if (estimate_only) {
            print_cost_estimate(estimate_cost(cfg), log);
            return 0;
        }
        run_experiment(cfg, log);
        return 0;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetError& e) {
        log << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace becho::experiments
