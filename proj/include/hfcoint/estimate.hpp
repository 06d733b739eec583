#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hfcoint/errors.hpp"
#include "hfcoint/preprocess.hpp"
#include "hfcoint/stats.hpp"

namespace hfcoint {

struct OlsLine {
    double slope = 0.0;
    double intercept = 0.0;
};

// OLS of b on a over all given elements: slope = sum (b-bbar)(a-abar) / sum (a-abar)^2.
inline OlsLine ols(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw DataError("ols: need two equal-length samples");
    const double am = mean(a);
    const double bm = mean(b);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sxx += (a[i] - am) * (a[i] - am);
        sxy += (a[i] - am) * (b[i] - bm);
    }
    if (sxx <= 0.0) throw DataError("ols: degenerate (constant) regressor");
    OlsLine line;
    line.slope = sxy / sxx;
    line.intercept = bm - line.slope * am;
    return line;
}

struct CointFit {
    double alpha_hat = 0.0;
    double c_hat = 0.0;
    std::vector<double> residuals;  // indices 0..n

    // residual diagnostics
    double v_eps_hat = 0.0;
    double rho_hat = 0.0;
    double r_inf_hat = 0.0;
    bool r_inf_clamped = false;

    // studentization functionals of the deflated regressor
    double mean_bar = 0.0;  // T^{-1/2} n^{-1} sum of the regressor
    double i_f = 0.0;
    double j_f = 0.0;
    double k_f = 0.0;
    double bias_alpha = 0.0;
    double bias_c = 0.0;
    double var_alpha = 0.0;
    double var_c = 0.0;

    std::size_t n = 0;
    double horizon_days = 0.0;
    double delta_days = 0.0;
};

// Regression of the deflated pair over indices 1..n (index 0 excluded), plus
// residuals for all indices 0..n.
inline CointFit fit_cointegration(const DeflatedPair& dp) {
    const std::size_t n = dp.n();
    std::span<const double> tx(dp.tx_def);
    std::span<const double> ty(dp.ty_def);
    const OlsLine line = ols(tx.subspan(1), ty.subspan(1));
    CointFit fit;
    fit.alpha_hat = line.slope;
    fit.c_hat = line.intercept;
    fit.residuals.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        fit.residuals[i] = dp.ty_def[i] - fit.c_hat - fit.alpha_hat * dp.tx_def[i];
    fit.n = n;
    fit.horizon_days = dp.horizon_days;
    fit.delta_days = dp.delta_days;
    return fit;
}

// Lag-one autocorrelation estimator that is robust to truncation:
// rho_hat = sum_{i=2..n} d(eps)_i eps_{i-2} / sum_{i=1..n} d(eps)_i eps_{i-1}.
inline double rho_hat_robust(std::span<const double> eps) {
    if (eps.size() < 4) throw DataError("rho_hat: need n >= 3");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i < eps.size(); ++i) {
        const double d = eps[i] - eps[i - 1];
        den += d * eps[i - 1];
        if (i >= 2) num += d * eps[i - 2];
    }
    if (den == 0.0) throw DataError("rho_hat: zero denominator");
    return num / den;
}

// The classical lag-one estimator sum eps_i eps_{i-1} / sum eps_i^2 (i = 1..n).
inline double rho_tilde_classic(std::span<const double> eps) {
    if (eps.size() < 3) throw DataError("rho_tilde: need n >= 2");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i < eps.size(); ++i) {
        num += eps[i] * eps[i - 1];
        den += eps[i] * eps[i];
    }
    if (den == 0.0) throw DataError("rho_tilde: zero denominator");
    return num / den;
}

// v_eps, rho and the long-run endogeneity correlation r_inf, all from the
// fitted residuals; diagnostic sums run over i >= 1 (residual 0 excluded).
inline void residual_diagnostics(CointFit& fit, const DeflatedPair& dp) {
    const auto& e = fit.residuals;
    const std::size_t n = fit.n;
    if (n < 3) throw DataError("diagnostics: need n >= 3");

    double sum_e2 = 0.0;
    for (std::size_t i = 1; i <= n; ++i) sum_e2 += e[i] * e[i];
    fit.v_eps_hat = sum_e2 / fit.horizon_days;

    fit.rho_hat = rho_hat_robust(e);

    double num = 0.0, den = 0.0;
    for (std::size_t i = 2; i <= n; ++i) {
        const double u = e[i] - fit.rho_hat * e[i - 1];
        const double dx = dp.tx_def[i] - dp.tx_def[i - 1];
        num += dx * u;
        den += u * u;
    }
    if (den <= 0.0) throw DataError("diagnostics: degenerate quasi-differenced residuals");
    fit.r_inf_hat = num / std::sqrt(den);
    if (std::fabs(fit.r_inf_hat) > 1.0) {
        fit.r_inf_hat = fit.r_inf_hat > 0.0 ? 1.0 : -1.0;
        fit.r_inf_clamped = true;
    }
}

// Asymptotic bias and variance estimates for (alpha_hat, c_hat) from the
// studentized central limit theory.
inline void studentize(CointFit& fit, const DeflatedPair& dp) {
    const std::size_t n = fit.n;
    const double T = fit.horizon_days;
    const double rootT = std::sqrt(T);

    double s = 0.0;
    for (std::size_t i = 1; i <= n; ++i) s += dp.tx_def[i];
    fit.mean_bar = s / (rootT * static_cast<double>(n));

    const double xn = dp.tx_def[n];
    fit.i_f = (xn * xn - T) / (2.0 * T) - fit.mean_bar * xn / rootT;

    double j = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double d = dp.tx_def[i] / rootT - fit.mean_bar;
        j += d * d;
    }
    fit.j_f = j / static_cast<double>(n);
    fit.k_f = fit.j_f + fit.mean_bar * fit.mean_bar;
    if (fit.j_f <= 0.0) throw DataError("studentize: degenerate regressor functional J");

    const double sv = std::sqrt(fit.v_eps_hat);
    const double ratio = (1.0 + fit.i_f) / fit.j_f;
    const double ninv = 1.0 / static_cast<double>(n);
    fit.bias_alpha = ninv * sv * fit.r_inf_hat * ratio;
    fit.bias_c = ninv * rootT * sv * fit.r_inf_hat * (xn / rootT - ratio * fit.mean_bar);
    const double one_minus_r2 = 1.0 - fit.r_inf_hat * fit.r_inf_hat;
    fit.var_alpha = fit.v_eps_hat * one_minus_r2 / fit.j_f;
    fit.var_c = fit.v_eps_hat * one_minus_r2 * fit.k_f / fit.j_f;
}

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
    double center = 0.0;
};

// Two-sided (1 - delta) intervals from the studentized limits.
inline ConfidenceInterval interval_alpha(const CointFit& fit, double delta) {
    const double z = normal_quantile(1.0 - delta / 2.0);
    const double c = fit.alpha_hat - fit.bias_alpha;
    const double w = z * std::sqrt(fit.var_alpha) / static_cast<double>(fit.n);
    return {c - w, c + w, c};
}

inline ConfidenceInterval interval_c(const CointFit& fit, double delta) {
    const double z = normal_quantile(1.0 - delta / 2.0);
    const double c = fit.c_hat - fit.bias_c;
    const double w = z * std::sqrt(fit.horizon_days * fit.var_c) / static_cast<double>(fit.n);
    return {c - w, c + w, c};
}

// Full estimation pass: fit, diagnostics, studentization.
inline CointFit estimate_cointegration(const DeflatedPair& dp) {
    CointFit fit = fit_cointegration(dp);
    residual_diagnostics(fit, dp);
    studentize(fit, dp);
    return fit;
}

}  // namespace hfcoint
