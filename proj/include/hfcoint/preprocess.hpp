#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "hfcoint/errors.hpp"
#include "hfcoint/grid.hpp"

namespace hfcoint {

inline constexpr double kInfiniteDeflator = std::numeric_limits<double>::infinity();

// Root mean square of increments per unit time: sqrt(sum (dX_i)^2 / T), the
// constant-volatility Gaussian MLE in per-sqrt(day) units.
inline double estimate_sigma_mle(const SampledPath& path) {
    double qv = 0.0;
    for (std::size_t i = 1; i < path.values.size(); ++i) {
        const double d = path.values[i] - path.values[i - 1];
        qv += d * d;
    }
    if (qv <= 0.0) throw DataError("sigma_mle: path has zero quadratic variation");
    return std::sqrt(qv / path.grid.horizon_days);
}

// Threshold rule a0 * scale * delta^omega. With `sigma_scale` unset, the
// scale is estimated per series by its own volatility MLE; a fixed value
// applies one shared threshold to both series.
struct TruncationConfig {
    double a0 = 4.0;
    double omega_bar = 0.48;
    std::optional<double> sigma_scale;  // nullopt: per-series MLE

    void validate() const {
        if (!(a0 > 0.0)) throw ConfigError("truncation: a0 must be positive");
        if (!(omega_bar > 0.0 && omega_bar < 0.5))
            throw ConfigError("truncation: omega_bar must be in (0, 1/2)");
        if (sigma_scale && !(*sigma_scale > 0.0))
            throw ConfigError("truncation: sigma_scale must be positive");
    }

    static TruncationConfig disabled() {
        TruncationConfig cfg;
        cfg.sigma_scale = std::numeric_limits<double>::infinity();
        return cfg;
    }
};

// Local realized-volatility windows k = floor(T^gamma / delta),
// l = floor(T^gamma' / delta).
struct DeflationConfig {
    double gamma = 0.5;
    double gamma_prime = 0.01;

    void validate() const {
        if (!(gamma >= 0.5 && gamma < 1.0)) throw ConfigError("deflation: gamma must be in [1/2, 1)");
        if (!(gamma_prime > 0.0 && gamma_prime < gamma))
            throw ConfigError("deflation: gamma' must be in (0, gamma)");
    }

    std::size_t window_k(double T, double delta) const {
        return static_cast<std::size_t>(std::floor(std::pow(T, gamma) / delta));
    }
    std::size_t window_l(double T, double delta) const {
        return static_cast<std::size_t>(std::floor(std::pow(T, gamma_prime) / delta));
    }
};

// keep[i-1] is true iff increment i of both series is under its threshold.
struct TruncationMask {
    std::vector<bool> keep;  // length n, increment i at keep[i-1]
    double threshold_x = 0.0;
    double threshold_y = 0.0;

    std::size_t kept_count() const {
        std::size_t c = 0;
        for (bool b : keep) c += b;
        return c;
    }
};

inline TruncationMask truncation_mask(const PairSeries& pair, const TruncationConfig& cfg) {
    cfg.validate();
    const std::size_t n = pair.n();
    const double dpow = std::pow(pair.delta(), cfg.omega_bar);
    TruncationMask mask;
    if (cfg.sigma_scale) {
        mask.threshold_x = cfg.a0 * *cfg.sigma_scale * dpow;
        mask.threshold_y = mask.threshold_x;
    } else {
        mask.threshold_x = cfg.a0 * estimate_sigma_mle(pair.x) * dpow;
        mask.threshold_y = cfg.a0 * estimate_sigma_mle(pair.y) * dpow;
    }
    mask.keep.resize(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double dx = pair.x.values[i] - pair.x.values[i - 1];
        const double dy = pair.y.values[i] - pair.y.values[i - 1];
        mask.keep[i - 1] = std::fabs(dx) <= mask.threshold_x && std::fabs(dy) <= mask.threshold_y;
    }
    return mask;
}

// C_i = T^{-gamma} * RV_{i,k,l} over the lagged window j in
// [(i-k) v 1, (i-l-1) v 1], truncating squared X increments only.
// C_i is the sentinel +inf when i <= 2k or the windowed RV vanishes.
inline std::vector<double> compute_deflators(const SampledPath& x, double threshold_x,
                                             const DeflationConfig& cfg) {
    cfg.validate();
    const std::size_t n = x.grid.n;
    const double T = x.grid.horizon_days;
    const double delta = x.grid.delta_days;
    const std::size_t k = cfg.window_k(T, delta);
    const std::size_t l = cfg.window_l(T, delta);
    if (2 * k >= n) throw ConfigError("deflation: window k >= n/2, deflation impossible at this T, delta");
    if (k < l + 2) throw ConfigError("deflation: window k must exceed l + 1");

    // prefix sums of truncated squared increments; cum[j] = sum over 1..j
    std::vector<double> cum(n + 1, 0.0);
    for (std::size_t j = 1; j <= n; ++j) {
        const double d = x.values[j] - x.values[j - 1];
        cum[j] = cum[j - 1] + (std::fabs(d) <= threshold_x ? d * d : 0.0);
    }
    const double tg = std::pow(T, -cfg.gamma);
    std::vector<double> C(n, kInfiniteDeflator);
    for (std::size_t i = 1; i <= n; ++i) {
        if (i <= 2 * k) continue;
        const std::size_t lo = i > k ? i - k : 1;
        const std::size_t hi = i > l + 1 ? i - l - 1 : 1;
        const double rv = cum[hi] - cum[lo - 1];
        if (rv > 0.0) C[i - 1] = tg * rv;
    }
    return C;
}

// Truncated, deflated (optionally detrended) pair with its deflators and mask.
struct DeflatedPair {
    std::vector<double> tx_def;     // n+1 values, starts at X_0
    std::vector<double> ty_def;     // n+1 values, starts at Y_0
    std::vector<double> deflators;  // n entries, +inf sentinel allowed
    TruncationMask mask;
    std::size_t k = 0;
    std::size_t l = 0;
    bool detrended = false;
    double horizon_days = 0.0;
    double delta_days = 0.0;

    std::size_t n() const { return deflators.size(); }
};

namespace detail {

inline DeflatedPair deflate_impl(const PairSeries& pair, const TruncationConfig& cfg_t,
                                 const DeflationConfig& cfg_d, bool detrended) {
    const std::size_t n = pair.n();
    DeflatedPair out;
    out.mask = truncation_mask(pair, cfg_t);
    out.deflators = compute_deflators(pair.x, out.mask.threshold_x, cfg_d);
    out.k = cfg_d.window_k(pair.horizon(), pair.delta());
    out.l = cfg_d.window_l(pair.horizon(), pair.delta());
    out.detrended = detrended;
    out.horizon_days = pair.horizon();
    out.delta_days = pair.delta();

    // truncated increments and, in detrended mode, the per-increment drift
    // correction D(U) = (T(U)_n - T(U)_0) / n subtracted before deflation
    std::vector<double> incx(n), incy(n);
    double sumx = 0.0, sumy = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double dx = pair.x.values[i] - pair.x.values[i - 1];
        const double dy = pair.y.values[i] - pair.y.values[i - 1];
        incx[i - 1] = out.mask.keep[i - 1] ? dx : 0.0;
        incy[i - 1] = out.mask.keep[i - 1] ? dy : 0.0;
        sumx += incx[i - 1];
        sumy += incy[i - 1];
    }
    const double drift_x = detrended ? sumx / static_cast<double>(n) : 0.0;
    const double drift_y = detrended ? sumy / static_cast<double>(n) : 0.0;

    out.tx_def.resize(n + 1);
    out.ty_def.resize(n + 1);
    out.tx_def[0] = pair.x.values[0];
    out.ty_def[0] = pair.y.values[0];
    for (std::size_t i = 1; i <= n; ++i) {
        const double c = out.deflators[i - 1];
        const double w = std::isinf(c) ? 0.0 : 1.0 / std::sqrt(c);
        out.tx_def[i] = out.tx_def[i - 1] + (incx[i - 1] - drift_x) * w;
        out.ty_def[i] = out.ty_def[i - 1] + (incy[i - 1] - drift_y) * w;
    }
    return out;
}

}  // namespace detail

inline DeflatedPair deflate(const PairSeries& pair, const TruncationConfig& cfg_t = {},
                            const DeflationConfig& cfg_d = {}) {
    return detail::deflate_impl(pair, cfg_t, cfg_d, false);
}

inline DeflatedPair detrend_deflate(const PairSeries& pair, const TruncationConfig& cfg_t = {},
                                    const DeflationConfig& cfg_d = {}) {
    return detail::deflate_impl(pair, cfg_t, cfg_d, true);
}

}  // namespace hfcoint
