#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "becho/echo.hpp"

// Decay-law fits on echo curves.  Everything is weighted least squares in
// log space (ln mean vs t or t^2): reproducible, no iterative solver state.

namespace becho {

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DecayModel { exponential, gaussian, lyapunov_capped };

struct FitWindowPolicy {
    bool automatic = true;
    int t_lo = 0;
    int t_hi = 0;
    // automatic mode: window from the first mean below `upper_mean` to the
    // last mean above `lower_factor / N`, excluding points at or below
    // `floor_factor / N` (too close to saturation to carry log information).
    double upper_mean = 0.8;
    double lower_factor = 10.0;
    double floor_factor = 5.0;

    static FitWindowPolicy auto_window() { return {}; }
    static FitWindowPolicy window(int lo, int hi) {
        FitWindowPolicy p;
        p.automatic = false;
        p.t_lo = lo;
        p.t_hi = hi;
        return p;
    }
};

struct DecayFit {
    DecayModel model = DecayModel::exponential;
    double rate = 0.0;        // per period (exponential / capped)
    double quad_coeff = 0.0;  // per period^2 (gaussian)
    double prefactor = 1.0;
    double rate_stderr = 0.0;
    int window_lo = 0;
    int window_hi = 0;
    double residual_rms_log = 0.0;
    int dof = 0;
};

struct SaturationEstimate {
    double plateau = 0.0;
    int t_onset = 0;
    double expected = 0.0;  // 1/N
    bool decaying = false;  // tail slope test failed: not saturated yet
    bool matches_expected = false;
};

namespace detail {

struct FitPoints {
    std::vector<double> x, y, sigma_y;  // y = ln mean, sigma_y = stderr / mean
    int t_lo = 0, t_hi = 0;
};

inline FitPoints select_points(const EchoCurve& curve, const FitWindowPolicy& policy,
                               bool quadratic_abscissa) {
    FitPoints pts;
    std::size_t npts = curve.times.size();
    int lo, hi;
    double floor_mean = 0.0;
    if (policy.automatic) {
        if (curve.params.n > 0) floor_mean = policy.floor_factor / curve.params.n;
        double tail_mean = curve.params.n > 0 ? policy.lower_factor / curve.params.n : 0.0;
        lo = hi = -1;
        for (std::size_t i = 0; i < npts; ++i) {
            if (lo < 0 && curve.mean[i] < policy.upper_mean) lo = curve.times[i];
            if (curve.mean[i] > tail_mean) hi = curve.times[i];
        }
        if (lo < 0 || hi < lo)
            throw FitError("fit: no usable window (means never cross thresholds)");
    } else {
        lo = policy.t_lo;
        hi = policy.t_hi;
    }
    pts.t_lo = lo;
    pts.t_hi = hi;
    for (std::size_t i = 0; i < npts; ++i) {
        int t = curve.times[i];
        double m = curve.mean[i];
        if (t < lo || t > hi || m <= floor_mean || m <= 0.0) continue;
        double x = quadratic_abscissa ? double(t) * t : double(t);
        pts.x.push_back(x);
        pts.y.push_back(std::log(m));
        pts.sigma_y.push_back(curve.mean[i] > 0 ? curve.stderr_[i] / curve.mean[i] : 0.0);
    }
    if (pts.x.size() < 4)
        throw FitError("fit: fewer than 4 usable points in window [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return pts;
}

struct LineFit {
    double intercept = 0.0, slope = 0.0, se_slope = 0.0;
    double rms = 0.0;
    int n = 0;
};

inline LineFit weighted_line_fit(const FitPoints& pts) {
    std::size_t n = pts.x.size();
    bool all_exact = std::all_of(pts.sigma_y.begin(), pts.sigma_y.end(),
                                 [](double s) { return s <= 0.0; });
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = all_exact ? 1.0 : std::max(pts.sigma_y[i], 1e-10);
        double w = 1.0 / (s * s);
        sw += w;
        sx += w * pts.x[i];
        sy += w * pts.y[i];
        sxx += w * pts.x[i] * pts.x[i];
        sxy += w * pts.x[i] * pts.y[i];
    }
    double delta = sw * sxx - sx * sx;
    if (delta <= 0.0) throw FitError("fit: degenerate abscissa");
    LineFit f;
    f.n = static_cast<int>(n);
    f.slope = (sw * sxy - sx * sy) / delta;
    f.intercept = (sxx * sy - sx * sxy) / delta;
    double chi2 = 0.0, rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = pts.y[i] - (f.intercept + f.slope * pts.x[i]);
        rss += r * r;
        double s = all_exact ? 1.0 : std::max(pts.sigma_y[i], 1e-10);
        chi2 += r * r / (s * s);
    }
    f.rms = std::sqrt(rss / n);
    int dof = static_cast<int>(n) - 2;
    f.se_slope = std::sqrt(sw / delta * (dof > 0 ? chi2 / dof : 1.0));
    return f;
}

inline DecayFit line_to_fit(const LineFit& lf, const FitPoints& pts, DecayModel model) {
    double decay = -lf.slope;
    if (decay < 0.0 && decay < -2.0 * lf.se_slope)
        throw FitError("fit: no decay in window [" + std::to_string(pts.t_lo) + ", " +
                       std::to_string(pts.t_hi) + "]");
    DecayFit fit;
    fit.model = model;
    if (model == DecayModel::gaussian)
        fit.quad_coeff = std::max(0.0, decay);
    else
        fit.rate = std::max(0.0, decay);
    fit.prefactor = std::exp(lf.intercept);
    fit.rate_stderr = lf.se_slope;
    fit.window_lo = pts.t_lo;
    fit.window_hi = pts.t_hi;
    fit.residual_rms_log = lf.rms;
    fit.dof = lf.n - 2;
    return fit;
}

}  // namespace detail

/// ln(mean) vs t, weighted by (stderr/mean)^-2.
inline DecayFit fit_exponential(const EchoCurve& curve, const FitWindowPolicy& policy) {
    detail::FitPoints pts = detail::select_points(curve, policy, false);
    return detail::line_to_fit(detail::weighted_line_fit(pts), pts, DecayModel::exponential);
}

/// ln(mean) vs t^2.
inline DecayFit fit_gaussian(const EchoCurve& curve, const FitWindowPolicy& policy) {
    detail::FitPoints pts = detail::select_points(curve, policy, true);
    return detail::line_to_fit(detail::weighted_line_fit(pts), pts, DecayModel::gaussian);
}

/// Exponential fit with the rate capped at the classical Lyapunov exponent;
/// past the cap only the prefactor is refit.
inline DecayFit fit_lyapunov_capped(const EchoCurve& curve, const FitWindowPolicy& policy,
                                    double lambda) {
    detail::FitPoints pts = detail::select_points(curve, policy, false);
    detail::LineFit lf = detail::weighted_line_fit(pts);
    DecayFit fit = detail::line_to_fit(lf, pts, DecayModel::lyapunov_capped);
    if (fit.rate > lambda) {
        fit.rate = lambda;
        double s = 0.0;
        for (std::size_t i = 0; i < pts.x.size(); ++i) s += pts.y[i] + lambda * pts.x[i];
        fit.prefactor = std::exp(s / pts.x.size());
        double rss = 0.0;
        for (std::size_t i = 0; i < pts.x.size(); ++i)
            rss += sqr(pts.y[i] - (std::log(fit.prefactor) - lambda * pts.x[i]));
        fit.residual_rms_log = std::sqrt(rss / pts.x.size());
    }
    return fit;
}

/// Plateau of the curve tail vs the expected 1/N floor.  `decaying` is set
/// when the tail log-slope is still significantly negative.
inline SaturationEstimate detect_saturation(const EchoCurve& curve, double tail_fraction = 0.25) {
    std::size_t npts = curve.times.size();
    std::size_t k = std::max<std::size_t>(3, std::size_t(std::ceil(tail_fraction * npts)));
    if (k > npts) throw FitError("detect_saturation: curve too short");
    std::size_t first = npts - k;

    SaturationEstimate est;
    est.t_onset = curve.times[first];
    est.expected = curve.params.n > 0 ? 1.0 / curve.params.n : 0.0;
    double m = 0.0;
    for (std::size_t i = first; i < npts; ++i) m += curve.mean[i];
    est.plateau = m / k;

    // Unweighted log-slope over the tail.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t npos = 0;
    for (std::size_t i = first; i < npts; ++i) {
        if (curve.mean[i] <= 0.0) continue;
        double x = curve.times[i], y = std::log(curve.mean[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++npos;
    }
    if (npos >= 3) {
        double delta = npos * sxx - sx * sx;
        if (delta > 0) {
            double slope = (npos * sxy - sx * sy) / delta;
            double span = curve.times[npts - 1] - curve.times[first];
            est.decaying = slope < 0.0 && -slope * span > 0.2;
        }
    }
    est.matches_expected =
        est.expected > 0.0 && std::abs(est.plateau - est.expected) <= 0.3 * est.expected;
    return est;
}

struct ScalingFit {
    double exponent = 0.0;
    double coefficient = 0.0;
    double exponent_stderr = 0.0;
};

/// ln(rate) vs ln(strength) least squares; expected exponent 2 for
/// golden-rule and Gaussian coefficients.
inline ScalingFit scaling_regression(const std::vector<std::pair<double, double>>& rates) {
    if (rates.size() < 3)
        throw std::invalid_argument("scaling_regression: need >= 3 strengths");
    double smin = rates[0].first, smax = rates[0].first;
    for (auto& [s, r] : rates) {
        if (s <= 0.0 || r <= 0.0)
            throw std::invalid_argument("scaling_regression: strengths and rates must be > 0");
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    if (smax < 4.0 * smin)
        throw std::invalid_argument("scaling_regression: strengths must span a 4x range");

    detail::FitPoints pts;
    for (auto& [s, r] : rates) {
        pts.x.push_back(std::log(s));
        pts.y.push_back(std::log(r));
        pts.sigma_y.push_back(0.0);
    }
    double sw = rates.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < pts.x.size(); ++i) {
        sx += pts.x[i]; sy += pts.y[i];
        sxx += pts.x[i] * pts.x[i]; sxy += pts.x[i] * pts.y[i];
    }
    double delta = sw * sxx - sx * sx;
    if (delta <= 0.0) throw std::invalid_argument("scaling_regression: degenerate strengths");
    ScalingFit f;
    f.exponent = (sw * sxy - sx * sy) / delta;
    double intercept = (sxx * sy - sx * sxy) / delta;
    f.coefficient = std::exp(intercept);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < pts.x.size(); ++i)
        chi2 += sqr(pts.y[i] - intercept - f.exponent * pts.x[i]);
    int dof = static_cast<int>(pts.x.size()) - 2;
    f.exponent_stderr = std::sqrt(sw / delta * (dof > 0 ? chi2 / dof : 0.0));
    return f;
}

}  // namespace becho
