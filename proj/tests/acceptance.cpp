// Acceptance suite: one test per release criterion, each printing a PASS/FAIL
// line with the measured numbers.  Run all of them with `ctest` or a single
// one with `./acceptance "[c05]"`.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "becho/dense_oracle.hpp"
#include "becho/experiments.hpp"

using namespace becho;
namespace fs = std::filesystem;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(const char* id, const char* name, bool pass, const std::string& details) {
    std::printf("[acceptance] %s %s: %s  %s\n", id, name, pass ? "PASS" : "FAIL",
                details.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

ModelParams paper_params(int n) {
    ModelParams p;
    p.n = n;
    p.k1 = p.k2 = 10.09;
    return p;
}

EchoRunSpec echo_spec(const ModelParams& p, std::vector<int> times, int realizations,
                      std::uint64_t seed) {
    EchoRunSpec spec;
    spec.params = p;
    spec.times = std::move(times);
    spec.realizations = realizations;
    spec.seed = seed;
    return spec;
}

std::vector<int> grid_to(int t_max) {
    std::vector<int> t;
    for (int k = 1; k <= std::min(12, t_max); ++k) t.push_back(k);
    int step = std::max(1, (t_max - 12 + 15) / 16);
    for (int k = 12 + step; k <= t_max; k += step) t.push_back(k);
    return t;
}

DecayFit fit_rate(const EchoCurve& curve) {
    return fit_exponential(curve, FitWindowPolicy::auto_window());
}

WaveFunction1P random_pure_state(int n, std::uint64_t seed) {
    RandomStream rng(seed);
    WaveFunction1P psi;
    psi.amp.resize(n);
    for (auto& z : psi.amp) z = rng.complex_normal();
    normalize(psi.amp);
    return psi;
}

}  // namespace

TEST_CASE("c01 exact reversal identity", "[c01]") {
    Timer timer;
    ModelParams p = paper_params(64);  // sigma1 = sigma2 = eps = 0
    std::vector<int> times;
    for (int t = 1; t <= 10; ++t) times.push_back(t);
    for (int t = 15; t <= 100; t += 5) times.push_back(t);
    EchoRunSpec spec = echo_spec(p, times, 10, 2024);
    spec.keep_realization_values = true;
    EchoCurve curve = boltzmann_echo_curve(spec);

    double worst = 0.0;
    for (double v : curve.realization_values) worst = std::max(worst, std::abs(v - 1.0));
    double secs = timer.seconds();
    bool pass = worst < 1e-10 && secs < 5.0;
    report("c01", "exact-reversal", pass,
           fmt("max |M_B - 1| = %.2e over 10 states, t <= 100 (tol 1e-10); %.2f s (< 5 s)",
               worst, secs));
    REQUIRE(pass);
}

TEST_CASE("c02 dense-oracle equivalence", "[c02]") {
    Timer timer;
    double worst = 0.0;
    for (int draw = 0; draw < 20; ++draw) {
        RandomStream rng(9000 + draw);
        int n = 8;
        ModelParams p;
        p.n = n;
        p.k1 = rng.uniform(6.0, 14.0);
        p.k2 = rng.uniform(6.0, 14.0);
        p.sigma1 = rng.uniform(0.0, 0.3);
        p.sigma2 = rng.uniform(0.0, 0.3);
        p.eps_f = rng.uniform(0.0, 0.3);
        p.eps_b = rng.uniform(0.0, 0.3);
        int t = 1 + draw % 5;

        WaveFunction1P psi1 = make_wavepacket(
            {rng.uniform(0.0, two_pi), rng.uniform(0.0, two_pi)}, n);
        WaveFunction1P phi2 = random_pure_state(n, 500 + draw);

        Eigen::MatrixXcd uf = dense_propagator(build_forward_step(p));
        Eigen::MatrixXcd ub = dense_propagator(build_backward_step(p));
        Eigen::VectorXcd joint(n * n);
        for (int m1 = 0; m1 < n; ++m1)
            for (int m2 = 0; m2 < n; ++m2)
                joint(m1 * n + m2) = psi1.amp[m1] * phi2.amp[m2];
        for (int k = 0; k < t; ++k) joint = uf * joint;
        for (int k = 0; k < t; ++k) joint = ub * joint;
        Eigen::MatrixXcd rho1 = Eigen::MatrixXcd::Zero(n, n);
        for (int m = 0; m < n; ++m)
            for (int mp = 0; mp < n; ++mp)
                for (int j = 0; j < n; ++j)
                    rho1(m, mp) += joint(m * n + j) * std::conj(joint(mp * n + j));
        Eigen::VectorXcd v(n);
        for (int m = 0; m < n; ++m) v(m) = psi1.amp[m];
        double expected = (v.adjoint() * rho1 * v)(0, 0).real();

        double got = boltzmann_echo_single(p, psi1, phi2, t);
        worst = std::max(worst, std::abs(got - expected));
    }
    double secs = timer.seconds();
    bool pass = worst < 1e-10 && secs < 10.0;
    report("c02", "dense-oracle-equivalence", pass,
           fmt("max |split-step - dense| = %.2e over 20 random parameter sets (tol 1e-10); "
               "%.2f s (< 10 s)", worst, secs));
    REQUIRE(pass);
}

TEST_CASE("c03 Loschmidt limit of the decoupled echo", "[c03]") {
    int n = 256;
    std::uint64_t seed = 77;
    std::vector<int> times;
    for (int t = 1; t <= 10; ++t) times.push_back(t);
    for (int t = 15; t <= 50; t += 5) times.push_back(t);
    int realizations = 5;

    EchoRunSpec bspec = echo_spec(paper_params(n), times, realizations, seed);
    bspec.params.sigma1 = 0.004;
    bspec.keep_realization_values = true;
    EchoCurve mb = boltzmann_echo_curve(bspec);

    LoschmidtRunSpec lspec;
    lspec.n = n;
    lspec.k1 = 10.09;
    lspec.sigma1 = 0.004;
    lspec.times = times;
    lspec.realizations = realizations;
    lspec.seed = seed;
    lspec.keep_realization_values = true;
    EchoCurve ml = loschmidt_echo_curve(lspec);

    double worst = 0.0;
    for (std::size_t i = 0; i < mb.realization_values.size(); ++i)
        worst = std::max(worst,
                         std::abs(mb.realization_values[i] - ml.realization_values[i]));
    bool pass = worst < 1e-10;
    report("c03", "loschmidt-limit", pass,
           fmt("max per-realization |M_B - M_L| = %.2e at N=256, t <= 50 (tol 1e-10)", worst));
    REQUIRE(pass);
}

TEST_CASE("c04 Lyapunov exponent of the standard map", "[c04]") {
    Timer timer;
    classical::LyapunovEstimate est = classical::lyapunov_exponent(10.09, 1000, 10000, 11);
    double expected = std::log(10.09 / 2.0);  // 1.619
    double secs = timer.seconds();
    bool pass = std::abs(est.lambda - expected) < 0.05 * expected && secs < 10.0;
    report("c04", "lyapunov-exponent", pass,
           fmt("lambda = %.4f +- %.4f vs ln(K/2) = %.4f (tol 5%%); %.2f s (< 10 s)",
               est.lambda, est.stderr_, expected, secs));
    REQUIRE(pass);
}

TEST_CASE("c05 quadratic scaling of golden-rule rates", "[c05]") {
    Timer timer;
    int n = 512;
    std::vector<double> strengths = {0.003, 0.006, 0.012};
    std::vector<int> t_maxes_sigma = {90, 26, 10};
    std::vector<int> t_maxes_eps = {90, 26, 10};

    std::vector<std::pair<double, double>> sigma_rates, eps_rates;
    for (std::size_t i = 0; i < strengths.size(); ++i) {
        EchoRunSpec spec = echo_spec(paper_params(n), grid_to(t_maxes_sigma[i]), 8, 41 + i);
        spec.params.sigma1 = strengths[i];
        sigma_rates.push_back({strengths[i], fit_rate(boltzmann_echo_curve(spec)).rate});
    }
    for (std::size_t i = 0; i < strengths.size(); ++i) {
        EchoRunSpec spec = echo_spec(paper_params(n), grid_to(t_maxes_eps[i]), 8, 51 + i);
        spec.params.eps_f = spec.params.eps_b = strengths[i];
        eps_rates.push_back({strengths[i], fit_rate(boltzmann_echo_curve(spec)).rate});
    }
    ScalingFit sigma_fit = scaling_regression(sigma_rates);
    ScalingFit eps_fit = scaling_regression(eps_rates);
    bool pass = std::abs(sigma_fit.exponent - 2.0) <= 0.3 &&
                std::abs(eps_fit.exponent - 2.0) <= 0.3;
    report("c05", "quadratic-scaling", pass,
           fmt("exponent(sigma1) = %.3f, exponent(eps) = %.3f (2.0 +- 0.3), 4x range at "
               "N=512; %.0f s", sigma_fit.exponent, eps_fit.exponent, timer.seconds()));
    REQUIRE(pass);
}

TEST_CASE("c06 golden-rule rate additivity", "[c06]") {
    Timer timer;
    int n = 512;
    double sigma1 = 0.008, eps = 0.004;

    EchoRunSpec s_only = echo_spec(paper_params(n), grid_to(15), 8, 61);
    s_only.params.sigma1 = sigma1;
    double r_sigma = fit_rate(boltzmann_echo_curve(s_only)).rate;

    EchoRunSpec e_only = echo_spec(paper_params(n), grid_to(50), 8, 62);
    e_only.params.eps_f = e_only.params.eps_b = eps;
    double r_eps = fit_rate(boltzmann_echo_curve(e_only)).rate;

    EchoRunSpec both = echo_spec(paper_params(n), grid_to(12), 8, 63);
    both.params.sigma1 = sigma1;
    both.params.eps_f = both.params.eps_b = eps;
    double r_both = fit_rate(boltzmann_echo_curve(both)).rate;

    double expected = r_sigma + r_eps;
    bool pass = std::abs(r_both - expected) <= 0.25 * expected;
    report("c06", "rate-additivity", pass,
           fmt("rate(sigma+eps) = %.4f vs rate(sigma) + rate(eps) = %.4f + %.4f = %.4f "
               "(tol 25%%); %.0f s", r_both, r_sigma, r_eps, expected, timer.seconds()));
    REQUIRE(pass);
}

TEST_CASE("c07 classical-quantum rate cross-check", "[c07]") {
    Timer timer;
    double hbar_1024 = two_pi / 1024;
    double eps = 0.0037;

    // (a) C(0)-only analytic coefficient vs the paper's 1.2e4
    double c0_coeff = sqr(1.0 / hbar_1024) / 2.0;  // 1.33e4
    bool pass_c0 = std::abs(c0_coeff - 1.2e4) / 1.2e4 < 0.15;

    // (b) full classical estimator within factor 2 of the paper coefficient
    classical::RateEstimate cpl =
        classical::gamma_coupling(eps, 10.09, 10.09, 0.33, hbar_1024, 200000, 10, 71);
    double coeff = cpl.gamma / sqr(eps);
    bool pass_classical = coeff > 1.2e4 / 2.0 && coeff < 1.2e4 * 2.0;

    // (c) fast gate: quantum rate at N=512 vs the inset rate 0.3 rescaled by
    // (512/1024)^2 (golden-rule rates scale as 1/hbar_eff^2)
    int n = 512;
    EchoRunSpec spec = echo_spec(paper_params(n), grid_to(55), 8, 72);
    spec.params.eps_f = spec.params.eps_b = eps;
    spec.params.sigma1 = 0.0005;
    double rate = fit_rate(boltzmann_echo_curve(spec)).rate;
    double target = 0.3 * sqr(512.0 / 1024.0);
    bool pass_quantum = rate > target / 2.0 && rate < target * 2.0;

    bool pass = pass_c0 && pass_classical && pass_quantum;
    report("c07", "classical-quantum-crosscheck", pass,
           fmt("C(0)-only coeff %.3g vs 1.2e4 (15%%: %s); classical coeff %.3g in "
               "[0.6e4, 2.4e4] (%s); quantum rate %.4f vs rescaled inset 0.3 -> %.4f "
               "(factor 2: %s); %.0f s",
               c0_coeff, pass_c0 ? "ok" : "off", coeff, pass_classical ? "ok" : "off",
               rate, target, pass_quantum ? "ok" : "off", timer.seconds()));
    REQUIRE(pass);
}

TEST_CASE("c08 Sigma1-independent decay", "[c08]") {
    Timer timer;
    int n = 512;
    double eps = 0.0074;  // 2 Gamma_U ~ 0.33 dominates every Gamma_Sigma1 below
    std::vector<double> sigmas = {0.0005, 0.001, 0.0015};
    std::vector<double> rates;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        EchoRunSpec spec = echo_spec(paper_params(n), grid_to(13), 16, 81 + i);
        spec.params.eps_f = spec.params.eps_b = eps;
        spec.params.sigma1 = sigmas[i];
        rates.push_back(fit_rate(boltzmann_echo_curve(spec)).rate);
    }
    double lo = *std::min_element(rates.begin(), rates.end());
    double hi = *std::max_element(rates.begin(), rates.end());
    bool pass = (hi - lo) / hi <= 0.15;
    report("c08", "sigma1-independence", pass,
           fmt("rates %.4f / %.4f / %.4f over a 3x sigma1 range, spread %.1f%% (tol 15%%); "
               "%.0f s", rates[0], rates[1], rates[2], 100.0 * (hi - lo) / hi,
               timer.seconds()));
    REQUIRE(pass);
}

TEST_CASE("c09 long-time saturation at 1/N", "[c09]") {
    Timer timer;
    int n = 256;
    ModelParams p = paper_params(n);
    p.sigma1 = 0.05;  // strong perturbation: decay within a few periods
    std::vector<int> times = {1, 2, 3, 4, 100};
    for (int t = 110; t <= 200; t += 10) times.push_back(t);
    EchoRunSpec spec = echo_spec(p, times, 16, 91);
    EchoCurve curve = boltzmann_echo_curve(spec);

    SaturationEstimate sat = detect_saturation(curve, 0.6);
    bool pass = !sat.decaying && std::abs(sat.plateau - 1.0 / n) <= 0.3 / n;
    report("c09", "saturation", pass,
           fmt("plateau = %.3e vs 1/N = %.3e (tol 30%%), tail from t = %d%s; %.0f s",
               sat.plateau, 1.0 / n, sat.t_onset,
               sat.decaying ? ", STILL DECAYING" : "", timer.seconds()));
    REQUIRE(pass);
}

TEST_CASE("c10 independence from K2 and sigma2", "[c10]") {
    Timer timer;
    int n = 256;
    // Test point: sigma1-led with the coupling on.  The paper's rate formula
    // itself gives Gamma_U a weak K2 dependence through the lag-2 correlator
    // (~ +-12% here), so the independence claim is a leading-order one; with
    // Gamma_Sigma1 ~ 30x 2*Gamma_U that correction sits below the fit noise
    // while any spurious leak of system 2 into the echo would not.
    double sigma1 = 0.0116, eps = 0.002;
    std::vector<std::pair<double, double>> variants = {
        {7.2, 0.0}, {10.09, 0.0}, {13.4, 0.0}, {10.09, 0.1}};  // (K2, sigma2)
    std::vector<double> rates, errs, classical_rates;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        EchoRunSpec spec = echo_spec(paper_params(n), grid_to(14), 16, 101 + i);
        spec.params.k2 = variants[i].first;
        spec.params.sigma2 = variants[i].second;
        spec.params.sigma1 = sigma1;
        spec.params.eps_f = spec.params.eps_b = eps;
        DecayFit fit = fit_rate(boltzmann_echo_curve(spec));
        rates.push_back(fit.rate);
        errs.push_back(fit.rate_stderr);
        double hbar = spec.params.hbar_eff();
        classical_rates.push_back(
            classical::gamma_sigma1(sigma1, 10.09, hbar, 100000, 10, 7).gamma +
            2.0 * classical::gamma_coupling(eps, 10.09, variants[i].first, 0.33, hbar,
                                            100000, 10, 7).gamma);
    }
    // chi^2 homogeneity across the four rates: consistent within combined
    // fit uncertainties iff chi^2 <= 95th percentile at k - 1 = 3 dof.
    double sw = 0.0, swr = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        sw += 1.0 / sqr(errs[i]);
        swr += rates[i] / sqr(errs[i]);
    }
    double mean_rate = swr / sw;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i)
        chi2 += sqr((rates[i] - mean_rate) / errs[i]);
    bool pass = chi2 <= 7.81;
    report("c10", "k2-sigma2-independence", pass,
           fmt("rates %.4f / %.4f / %.4f (K2 sweep), %.4f (sigma2 = 0.1); homogeneity "
               "chi2 = %.2f at 3 dof (tol 7.81); classical predictions "
               "%.4f / %.4f / %.4f; %.0f s",
               rates[0], rates[1], rates[2], rates[3], chi2, classical_rates[0],
               classical_rates[1], classical_rates[2], timer.seconds()));
    REQUIRE(pass);
}

TEST_CASE("c11 Gaussian perturbative regime", "[c11]") {
    Timer timer;
    int n = 64;
    std::vector<double> eps_values = {0.0008, 0.0016, 0.0032};

    // Calibrate the time scale on the strongest coupling: coarse curve out to
    // t = 2400, find where it has decayed to ~0.55.
    std::vector<int> coarse;
    for (int t = 150; t <= 2400; t += 150) coarse.push_back(t);
    EchoRunSpec cal = echo_spec(paper_params(n), coarse, 8, 111);
    cal.params.eps_f = cal.params.eps_b = eps_values.back();
    EchoCurve cal_curve = boltzmann_echo_curve(cal);
    int t_half = coarse.back();
    for (std::size_t i = 0; i < coarse.size(); ++i)
        if (cal_curve.mean[i] < 0.55) {
            t_half = coarse[i];
            break;
        }

    // Measured grids scale as 1/eps so every curve samples the same range of
    // (quad_coeff * t^2); quadratic scaling then predicts identical shapes.
    std::vector<double> quads, resid_gauss, resid_exp;
    for (std::size_t i = 0; i < eps_values.size(); ++i) {
        double scale = eps_values.back() / eps_values[i];
        std::vector<int> times;
        for (double f = 0.25; f <= 1.6; f += 0.15)
            times.push_back(std::max(1, int(f * t_half * scale)));
        times.erase(std::unique(times.begin(), times.end()), times.end());
        EchoRunSpec spec = echo_spec(paper_params(n), times, 16, 112 + i);
        spec.params.eps_f = spec.params.eps_b = eps_values[i];
        EchoCurve curve = boltzmann_echo_curve(spec);
        FitWindowPolicy window = FitWindowPolicy::window(times.front(), times.back());
        DecayFit g = fit_gaussian(curve, window);
        DecayFit e = fit_exponential(curve, window);
        quads.push_back(g.quad_coeff);
        resid_gauss.push_back(g.residual_rms_log);
        resid_exp.push_back(e.residual_rms_log);
    }

    bool gaussian_wins = true;
    for (std::size_t i = 0; i < quads.size(); ++i)
        if (resid_gauss[i] >= resid_exp[i]) gaussian_wins = false;

    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < eps_values.size(); ++i) pts.push_back({eps_values[i], quads[i]});
    ScalingFit sf = scaling_regression(pts);
    bool quadratic = std::abs(sf.exponent - 2.0) <= 0.6;  // prop. to eps^2 within 30%

    bool pass = gaussian_wins && quadratic;
    report("c11", "gaussian-regime", pass,
           fmt("t_scale = %d; gaussian residuals %.3g/%.3g/%.3g vs exponential "
               "%.3g/%.3g/%.3g; quad_coeff exponent %.2f (2.0 +- 0.6); %.0f s",
               t_half, resid_gauss[0], resid_gauss[1], resid_gauss[2], resid_exp[0],
               resid_exp[1], resid_exp[2], sf.exponent, timer.seconds()));
    REQUIRE(pass);
}

TEST_CASE("c12 bitwise deterministic output", "[c12]") {
    fs::path dir = "acceptance_out/c12";
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path cfg_path = dir / "run.conf";
    std::ofstream(cfg_path)
        << "experiment = echo_curve\nN = 64\nK1 = 10.09\nsigma1 = 0.02\neps = 0.01\n"
        << "times = 0..20\nrealizations = 8\nseed = 987\noutput_dir = "
        << (dir / "a").string() << "\n";

    auto run = [&](int workers, const std::string& out) {
        experiments::RunOverrides o;
        o.workers = workers;
        o.output_dir = out;
        std::ostringstream log;
        return experiments::run_config_file(cfg_path.string(), o, false, log);
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    bool codes_ok = run(1, (dir / "a").string()) == 0 && run(1, (dir / "b").string()) == 0 &&
                    run(4, (dir / "c").string()) == 0;
    std::string a = slurp(dir / "a" / "curve.csv");
    bool identical = codes_ok && !a.empty() && a == slurp(dir / "b" / "curve.csv") &&
                     a == slurp(dir / "c" / "curve.csv");
    report("c12", "deterministic-output", identical,
           "curve.csv byte-identical across two runs and worker counts {1, 4}");
    REQUIRE(identical);
}
