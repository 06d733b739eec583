#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hfcoint/errors.hpp"

namespace hfcoint {

// Trading clock. Time is measured in days of session time throughout the
// library; overnight and weekend gaps do not exist on this clock.
struct TradingSession {
    double seconds_per_day = 23400.0;  // 6.5 hours
    double days_per_year = 252.0;

    double seconds_to_days(double s) const { return s / seconds_per_day; }
};

// Regular observation grid t_i = i * delta, i = 0..n, over [0, T] (days).
struct SamplingGrid {
    double horizon_days = 0.0;
    std::size_t n = 0;
    double delta_days = 0.0;
    TradingSession session;

    static SamplingGrid make(double horizon_days, std::size_t n, TradingSession session = {}) {
        if (n < 2) throw ConfigError("grid: need n >= 2");
        if (!(horizon_days > 0.0)) throw ConfigError("grid: horizon must be positive");
        SamplingGrid g;
        g.horizon_days = horizon_days;
        g.n = n;
        g.delta_days = horizon_days / static_cast<double>(n);
        g.session = session;
        return g;
    }

    double time_at(std::size_t i) const { return static_cast<double>(i) * delta_days; }

    bool compatible(const SamplingGrid& o, double rel_tol = 1e-12) const {
        if (n != o.n) return false;
        if (std::fabs(delta_days - o.delta_days) > rel_tol * std::fabs(delta_days)) return false;
        if (std::fabs(horizon_days - o.horizon_days) > rel_tol * std::fabs(horizon_days)) return false;
        return true;
    }
};

// Log-price path sampled on a regular grid; values has n+1 entries.
struct SampledPath {
    SamplingGrid grid;
    std::vector<double> values;

    void validate() const {
        if (values.size() != grid.n + 1) throw DataError("path: length must be n+1");
        for (double v : values)
            if (!std::isfinite(v)) throw DataError("path: non-finite value");
    }
};

// Two paths on one shared grid.
struct PairSeries {
    SampledPath x;
    SampledPath y;

    const SamplingGrid& grid() const { return x.grid; }
    std::size_t n() const { return x.grid.n; }
    double horizon() const { return x.grid.horizon_days; }
    double delta() const { return x.grid.delta_days; }
};

// Keep every m-th observation. Requires m | n.
inline SampledPath subsample(const SampledPath& path, std::size_t m) {
    if (m == 0) throw ConfigError("subsample: m must be positive");
    if (path.grid.n % m != 0) throw ConfigError("subsample: m must divide n");
    SampledPath out;
    out.grid = SamplingGrid::make(path.grid.horizon_days, path.grid.n / m, path.grid.session);
    out.values.reserve(out.grid.n + 1);
    for (std::size_t i = 0; i <= path.grid.n; i += m) out.values.push_back(path.values[i]);
    return out;
}

inline PairSeries pair_align(SampledPath x, SampledPath y) {
    x.validate();
    y.validate();
    if (!x.grid.compatible(y.grid)) throw DataError("pair_align: grids do not match");
    return PairSeries{std::move(x), std::move(y)};
}

inline PairSeries subsample(const PairSeries& pair, std::size_t m) {
    return pair_align(subsample(pair.x, m), subsample(pair.y, m));
}

}  // namespace hfcoint
