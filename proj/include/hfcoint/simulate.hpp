#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hfcoint/errors.hpp"
#include "hfcoint/grid.hpp"
#include "hfcoint/rng.hpp"

namespace hfcoint {

enum class MarketVolKind { Constant, Linear, Break, LinearBreak };

struct ModelFeatures {
    MarketVolKind market = MarketVolKind::Constant;
    bool heston = false;
    bool ushape = false;
    bool vol_jumps = false;
    bool drift = false;
    bool price_jumps = false;
};

// Feature matrix of the eight data-generating models.
inline ModelFeatures model_features(int model_id) {
    switch (model_id) {
        case 1: return {MarketVolKind::Constant, false, false, false, false, false};
        case 2: return {MarketVolKind::Linear, false, false, false, false, false};
        case 3: return {MarketVolKind::Break, false, false, false, false, false};
        case 4: return {MarketVolKind::Constant, true, false, false, false, false};
        case 5: return {MarketVolKind::Constant, false, true, true, false, false};
        case 6: return {MarketVolKind::Constant, false, false, false, true, false};
        case 7: return {MarketVolKind::Constant, false, false, false, false, true};
        case 8: return {MarketVolKind::LinearBreak, true, true, false, true, true};
        default: throw ConfigError("model id must be 1..8");
    }
}

// Market volatility at scaled time u in [0,1]: constant, declining linear,
// a one-third break at u = 0.2, or the linear/break composition.
inline double market_vol(int model_id, double u, double sigma_tilde = std::sqrt(0.1)) {
    const ModelFeatures f = model_features(model_id);
    double shape = 1.0;
    switch (f.market) {
        case MarketVolKind::Constant: break;
        case MarketVolKind::Linear: shape = 1.0 - 0.75 * u; break;
        case MarketVolKind::Break: shape = u < 0.2 ? 1.0 : 1.0 / 3.0; break;
        case MarketVolKind::LinearBreak: shape = (1.0 - 0.75 * u) * (u < 0.2 ? 1.0 : 1.0 / 3.0); break;
    }
    return sigma_tilde * shape;
}

enum class RhoRegime { None, Coint, Weak };

struct JumpEvent {
    double time_days = 0.0;
    double size = 0.0;
};

struct ModelSpec {
    int model_id = 1;
    RhoRegime regime = RhoRegime::None;
    double rho = 1.0;   // Coint regime, per observation step
    double beta = 0.0;  // Weak regime: rho = 1 - beta/n on the assembled grid

    double c0 = 1.0;
    double alpha0 = 2.0;
    double x0 = 4.605170185988091;  // log(100)

    double T_days = 504.0;
    double euler_step_seconds = 10.0;
    double sampling_seconds = 600.0;
    TradingSession session;

    // market volatility scale per sqrt(day); sqrt(0.1) annualized by default
    double sigma_tilde_day = std::sqrt(0.1 / 252.0);
    double rho_bar = 0.2;  // correlation of the X and Z drivers

    // price jumps: compound Poisson, |N(mean, sd^2)| magnitudes, iid signs
    double price_jumps_per_year = 10.0;
    double price_jump_mean = 0.5;
    double price_jump_sd = 0.1;

    // volatility jumps entering the U-shape term
    double vol_jumps_per_year = 10.0;
    double vol_jump_mean = 0.5;
    double vol_jump_sd = 0.1;

    // Heston component, mean reversion per year, vol-of-vol per sqrt(year)
    double heston_mean_reversion = 5.0;
    double heston_mean_level = 1.0;
    double heston_vol_of_vol = 0.4;
    double heston_leverage = -0.75;

    // U-shape seasonality within each trading day
    double ushape_base = 0.75;
    double ushape_open = 0.25;
    double ushape_close = 0.89;
    double ushape_open_decay = 10.0;
    double ushape_close_decay = 10.0;

    // per-year linear drift coefficients b = mu (1 + W^b)
    double drift_mu_x = 0.03;
    double drift_mu_z = 0.02;

    std::uint64_t seed = 1;

    std::size_t base_n() const {
        const double obs_per_day = session.seconds_per_day / sampling_seconds;
        const double n = T_days * obs_per_day;
        const double rounded = std::round(n);
        if (std::fabs(n - rounded) > 1e-9) throw ConfigError("spec: sampling gap must tile the horizon");
        return static_cast<std::size_t>(rounded);
    }

    std::size_t euler_steps_per_obs() const {
        const double steps = sampling_seconds / euler_step_seconds;
        const double rounded = std::round(steps);
        if (std::fabs(steps - rounded) > 1e-9 || rounded < 1.0)
            throw ConfigError("spec: euler step must divide the sampling interval");
        return static_cast<std::size_t>(rounded);
    }

    double effective_rho(std::size_t n) const {
        switch (regime) {
            case RhoRegime::None: return 1.0;
            case RhoRegime::Coint: return rho;
            case RhoRegime::Weak: return 1.0 - beta / static_cast<double>(n);
        }
        return 1.0;
    }
};

// Intraday seasonality curve at session fraction frac in [0,1).
inline double ushape_curve(const ModelSpec& spec, double frac) {
    return spec.ushape_base + spec.ushape_open * std::exp(-spec.ushape_open_decay * frac) +
           spec.ushape_close * std::exp(-spec.ushape_close_decay * (1.0 - frac));
}

// Full-truncation Euler update of the squared-volatility process
// d(v) = mr (level - v) dt + vov sqrt(v) dW; the positive part drives both terms.
inline double heston_variance_step(double v, double mr_day, double level, double vov_day, double h,
                                   double dw) {
    const double v_pos = std::max(v, 0.0);
    return v + mr_day * (level - v_pos) * h + vov_day * std::sqrt(v_pos) * dw;
}

// Continuous drivers and jump events sampled on the base observation grid.
// One Euler pass can then be assembled into pairs at any coarser frequency
// and any cointegration regime.
struct BasePaths {
    SamplingGrid grid;
    std::vector<double> xc;       // continuous X, n+1 values
    std::vector<double> z;        // residual driver Z, n+1 values, Z_0 = 0
    std::vector<double> sigma_m;  // market vol at observation times
    std::vector<JumpEvent> jumps_x;
    std::vector<JumpEvent> jumps_y;
};

struct SimOutput {
    PairSeries pair;
    std::vector<double> eps_true;  // n+1, eps_0 = 0
    std::vector<JumpEvent> jumps_x;
    std::vector<JumpEvent> jumps_y;
    std::vector<double> sigma_m;
    double rho_used = 1.0;
    ModelFeatures features;
};

namespace detail {

inline std::vector<JumpEvent> draw_jump_events(Rng& rng, double rate_per_year, double T_days,
                                               double days_per_year, double mag_mean, double mag_sd) {
    const double lambda = rate_per_year * T_days / days_per_year;
    const std::uint64_t count = rng.poisson(lambda);
    std::vector<JumpEvent> events(count);
    for (auto& e : events) e.time_days = T_days * rng.uniform();
    std::sort(events.begin(), events.end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.time_days < b.time_days; });
    for (auto& e : events) {
        const double mag = std::fabs(rng.normal(mag_mean, mag_sd));
        e.size = mag * static_cast<double>(rng.sign());
    }
    return events;
}

inline double cumulative_jump(const std::vector<JumpEvent>& events, double t) {
    double s = 0.0;
    for (const auto& e : events) {
        if (e.time_days > t) break;
        s += e.size;
    }
    return s;
}

}  // namespace detail

// Euler scheme over the fine grid; drivers are accumulated into observation
// increments so only O(n) memory is used.
inline BasePaths simulate_base(const ModelSpec& spec) {
    const ModelFeatures f = model_features(spec.model_id);
    const std::size_t n = spec.base_n();
    const std::size_t steps_per_obs = spec.euler_steps_per_obs();
    const double h = spec.session.seconds_to_days(spec.euler_step_seconds);
    const double sqrt_h = std::sqrt(h);
    const double T = spec.T_days;
    const double year = spec.session.days_per_year;

    Rng rng(spec.seed);

    // fixed draw order: heston initials, volatility jumps, price jumps, path
    double var_x = 1.0, var_z = 1.0;
    if (f.heston) {
        const double shape = 2.0 * spec.heston_mean_reversion * spec.heston_mean_level /
                             (spec.heston_vol_of_vol * spec.heston_vol_of_vol);
        const double scale = spec.heston_vol_of_vol * spec.heston_vol_of_vol /
                             (2.0 * spec.heston_mean_reversion);
        var_x = rng.gamma(shape, scale);
        var_z = rng.gamma(shape, scale);
    }
    std::vector<JumpEvent> vol_jumps_x, vol_jumps_z;
    if (f.vol_jumps) {
        vol_jumps_x = detail::draw_jump_events(rng, spec.vol_jumps_per_year, T, year, spec.vol_jump_mean,
                                               spec.vol_jump_sd);
        vol_jumps_z = detail::draw_jump_events(rng, spec.vol_jumps_per_year, T, year, spec.vol_jump_mean,
                                               spec.vol_jump_sd);
    }
    BasePaths base;
    if (f.price_jumps) {
        base.jumps_x = detail::draw_jump_events(rng, spec.price_jumps_per_year, T, year, spec.price_jump_mean,
                                                spec.price_jump_sd);
        base.jumps_y = detail::draw_jump_events(rng, spec.price_jumps_per_year, T, year, spec.price_jump_mean,
                                                spec.price_jump_sd);
    }

    base.grid = SamplingGrid::make(T, n, spec.session);
    base.xc.resize(n + 1);
    base.z.resize(n + 1);
    base.sigma_m.resize(n + 1);
    base.xc[0] = spec.x0;
    base.z[0] = 0.0;
    base.sigma_m[0] = market_vol(spec.model_id, 0.0, spec.sigma_tilde_day);

    const double rb = spec.rho_bar;
    const double rb_c = std::sqrt(1.0 - rb * rb);
    const double lev = spec.heston_leverage;
    const double lev_c = std::sqrt(1.0 - lev * lev);
    const double mr_day = spec.heston_mean_reversion / year;
    const double vov_day = spec.heston_vol_of_vol / std::sqrt(year);
    const double mu_x_day = spec.drift_mu_x / year;
    const double mu_z_day = spec.drift_mu_z / year;

    std::size_t jvx = 0, jvz = 0;  // volatility-jump cursors
    double vol_jump_x = 0.0, vol_jump_z = 0.0;
    double wb_x = 0.0, wb_z = 0.0;  // drift-modulating Brownians, year clock
    double xc = spec.x0, z = 0.0;
    double t = 0.0;

    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t s = 0; s < steps_per_obs; ++s) {
            const double sm = market_vol(spec.model_id, t / T, spec.sigma_tilde_day);
            double idio_x = 1.0, idio_z = 1.0;
            if (f.heston) {
                idio_x = std::sqrt(std::max(var_x, 0.0));
                idio_z = std::sqrt(std::max(var_z, 0.0));
            }
            if (f.ushape || f.vol_jumps) {
                while (jvx < vol_jumps_x.size() && vol_jumps_x[jvx].time_days <= t)
                    vol_jump_x += vol_jumps_x[jvx++].size;
                while (jvz < vol_jumps_z.size() && vol_jumps_z[jvz].time_days <= t)
                    vol_jump_z += vol_jumps_z[jvz++].size;
                const double u_curve = ushape_curve(spec, t - std::floor(t));
                idio_x *= u_curve + vol_jump_x;
                idio_z *= u_curve + vol_jump_z;
            }
            const double z1 = rng.normal();
            const double z2 = rng.normal();
            const double dwx = z1 * sqrt_h;
            const double dwz = (rb * z1 + rb_c * z2) * sqrt_h;
            double dxc = sm * idio_x * dwx;
            double dz = sm * idio_z * dwz;
            if (f.heston) {
                // full truncation: the positive part drives both terms
                const double gx = rng.normal();
                const double gz = rng.normal();
                const double dwbar_x = (lev * z1 + lev_c * gx) * sqrt_h;
                const double dwbar_z = (lev * (rb * z1 + rb_c * z2) + lev_c * gz) * sqrt_h;
                var_x = heston_variance_step(var_x, mr_day, spec.heston_mean_level, vov_day, h, dwbar_x);
                var_z = heston_variance_step(var_z, mr_day, spec.heston_mean_level, vov_day, h, dwbar_z);
            }
            if (f.drift) {
                dxc += mu_x_day * (1.0 + wb_x) * h;
                dz += mu_z_day * (1.0 + wb_z) * h;
                wb_x += rng.normal() * std::sqrt(h / year);
                wb_z += rng.normal() * std::sqrt(h / year);
            }
            xc += dxc;
            z += dz;
            t += h;
        }
        t = base.grid.time_at(i);  // keep the clock exact at boundaries
        base.xc[i] = xc;
        base.z[i] = z;
        base.sigma_m[i] = market_vol(spec.model_id, t / T, spec.sigma_tilde_day);
    }
    return base;
}

// Build the observed pair at a coarser grid (subsample_every base steps) and
// a given regime. The residual recursion eps_i = rho eps_{i-1} + dZ_i runs on
// the assembled observation grid.
inline SimOutput assemble(const BasePaths& base, const ModelSpec& spec, std::size_t subsample_every = 1) {
    if (subsample_every == 0 || base.grid.n % subsample_every != 0)
        throw ConfigError("assemble: subsampling factor must divide the base grid");
    const std::size_t n = base.grid.n / subsample_every;
    const double rho = spec.effective_rho(n);

    SimOutput out;
    out.features = model_features(spec.model_id);
    out.rho_used = rho;
    out.jumps_x = base.jumps_x;
    out.jumps_y = base.jumps_y;

    SampledPath x, y;
    x.grid = SamplingGrid::make(base.grid.horizon_days, n, base.grid.session);
    y.grid = x.grid;
    x.values.resize(n + 1);
    y.values.resize(n + 1);
    out.eps_true.resize(n + 1);
    out.sigma_m.resize(n + 1);

    double eps = 0.0;
    std::size_t cx = 0, cy = 0;  // jump cursors
    double jump_x = 0.0, jump_y = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const std::size_t bi = i * subsample_every;
        const double t = x.grid.time_at(i);
        if (i > 0) {
            const double dz = base.z[bi] - base.z[bi - subsample_every];
            eps = rho * eps + dz;
        }
        out.eps_true[i] = eps;
        out.sigma_m[i] = base.sigma_m[bi];
        while (cx < base.jumps_x.size() && base.jumps_x[cx].time_days <= t) jump_x += base.jumps_x[cx++].size;
        while (cy < base.jumps_y.size() && base.jumps_y[cy].time_days <= t) jump_y += base.jumps_y[cy++].size;
        const double xc = base.xc[bi];
        x.values[i] = xc + jump_x;
        y.values[i] = spec.c0 + spec.alpha0 * xc + eps + jump_y;
    }
    out.pair = pair_align(std::move(x), std::move(y));
    return out;
}

inline SimOutput simulate_model(const ModelSpec& spec) { return assemble(simulate_base(spec), spec); }

struct OuCheck {
    double sample_variance = 0.0;
    double ou_variance = 0.0;
};

// Weak-cointegration oracle: with rho = 1 - theta T / n, constant market and
// unit idiosyncratic volatility, the residual approaches an OU process with
// stationary variance (sigma^M sigma^Z)^2 / (2 theta).
inline OuCheck ou_weak_limit_check(double theta, ModelSpec spec, std::size_t paths = 1) {
    if (spec.model_id != 1) throw ConfigError("ou check: requires the constant-volatility model");
    spec.regime = RhoRegime::Weak;
    double pooled = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < paths; ++p) {
        ModelSpec s = spec;
        s.seed = mix_seed(spec.seed, p);
        s.beta = theta * s.T_days;  // rho = 1 - theta T / n
        const SimOutput sim = simulate_model(s);
        for (std::size_t i = 1; i < sim.eps_true.size(); ++i) {
            pooled += sim.eps_true[i] * sim.eps_true[i];
            ++count;
        }
    }
    OuCheck out;
    out.sample_variance = pooled / static_cast<double>(count);
    const double sm = spec.sigma_tilde_day;
    out.ou_variance = sm * sm / (2.0 * theta);
    return out;
}

}  // namespace hfcoint
