#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "hfcoint/cointtest.hpp"
#include "hfcoint/errors.hpp"
#include "hfcoint/rng.hpp"
#include "hfcoint/stats.hpp"

namespace hfcoint {

inline std::uint64_t sigma_curve_hash(const std::vector<double>& curve) {
    if (curve.empty()) return 0;
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : curve) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffULL;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

struct LimitConfig {
    std::size_t grid_points = 10000;
    std::size_t reps = 100000;
    std::uint64_t seed = 1;
    double beta = 0.0;
    double r_inf = 0.0;
    std::vector<double> sigma_m_curve;  // sampled on the grid; empty = constant 1
    bool detrended = false;

    void validate() const {
        if (grid_points < 8) throw ConfigError("limit: grid too small");
        if (reps < 1) throw ConfigError("limit: reps must be positive");
        if (beta < 0.0) throw ConfigError("limit: beta must be >= 0");
        if (!(std::fabs(r_inf) < 1.0)) throw ConfigError("limit: r_inf must be in (-1,1)");
    }

    double sigma_at(std::size_t i) const {
        if (sigma_m_curve.empty()) return 1.0;
        const std::size_t m = sigma_m_curve.size();
        std::size_t idx = i * m / (grid_points + 1);
        if (idx >= m) idx = m - 1;
        return sigma_m_curve[idx];
    }
};

struct LimitDraws {
    std::vector<double> draws;
    std::size_t discarded = 0;
};

namespace detail {

// One draw of the residual-test limit functional. Work buffers are reused
// across replications.
struct LimitWorkspace {
    std::vector<double> w1, w2, xi, integrand;
};

inline bool limit_draw(const LimitConfig& cfg, Rng& rng, LimitWorkspace& ws, double& out) {
    const std::size_t m = cfg.grid_points;
    const double h = 1.0 / static_cast<double>(m);
    const double sqrt_h = std::sqrt(h);
    ws.w1.assign(m + 1, 0.0);
    ws.w2.assign(m + 1, 0.0);

    const double lam1 = cfg.r_inf / std::sqrt(1.0 - cfg.r_inf * cfg.r_inf);
    const double decay = std::exp(-cfg.beta * h);
    double j1 = 0.0, j2 = 0.0;      // J(beta) components
    double xi_drift = 0.0;          // beta * int (sigma_s)^{-1} lambda^T J ds
    const bool with_beta = cfg.beta > 0.0;
    if (with_beta) ws.xi.assign(m + 1, 0.0);

    for (std::size_t i = 0; i < m; ++i) {
        const double dw1 = rng.normal() * sqrt_h;
        const double dw2 = rng.normal() * sqrt_h;
        ws.w1[i + 1] = ws.w1[i] + dw1;
        ws.w2[i + 1] = ws.w2[i] + dw2;
        if (with_beta) {
            const double sig = cfg.sigma_at(i);
            xi_drift += cfg.beta * (lam1 * j1 + j2) / sig * h;
            j1 = decay * (j1 + sig * dw1);
            j2 = decay * (j2 + sig * dw2);
            ws.xi[i + 1] = ws.w2[i + 1] - xi_drift;
        }
    }
    const std::vector<double>& xi = with_beta ? ws.xi : ws.w2;

    // centering terms: time averages, or the drift-robust breve functionals
    double c1_const = 0.0, c2_const = 0.0;
    std::vector<double>& breve_tail = ws.integrand;  // int_u^1 sigma^{-1} ds
    double breve_s_mean = 0.0, int_sdw1 = 0.0, int_sdxi = 0.0;
    if (!cfg.detrended) {
        for (std::size_t i = 0; i < m; ++i) {
            c1_const += ws.w1[i];
            c2_const += xi[i];
        }
        c1_const *= h;
        c2_const *= h;
    } else {
        breve_tail.assign(m + 1, 0.0);
        for (std::size_t i = m; i-- > 0;) breve_tail[i] = breve_tail[i + 1] + h / cfg.sigma_at(i);
        for (std::size_t i = 0; i < m; ++i) {
            const double s = (static_cast<double>(i)) * h;
            const double sig = cfg.sigma_at(i);
            breve_s_mean += s / sig * h;
            c1_const += ws.w1[i];
            c2_const += xi[i];
            int_sdw1 += sig * (ws.w1[i + 1] - ws.w1[i]);
            int_sdxi += sig * (xi[i + 1] - xi[i]);
        }
        c1_const *= h;
        c2_const *= h;
    }

    // H, kappa, Q on the grid
    double i11 = 0.0, i12 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double h1, h2;
        if (!cfg.detrended) {
            h1 = ws.w1[i] - c1_const;
            h2 = xi[i] - c2_const;
        } else {
            const double coeff = breve_s_mean - breve_tail[i];
            h1 = ws.w1[i] - (c1_const + coeff * int_sdw1);
            h2 = xi[i] - (c2_const + coeff * int_sdxi);
        }
        i11 += h1 * h1;
        i12 += h1 * h2;
    }
    i11 *= h;
    i12 *= h;
    if (i11 <= 0.0) return false;
    const double kap = i12 / i11;

    double q_prev = 0.0, q_last = 0.0, q_first = 0.0;
    double sum_q2 = 0.0, sum_dq2 = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
        double h1, h2;
        if (!cfg.detrended) {
            h1 = ws.w1[i] - c1_const;
            h2 = xi[i] - c2_const;
        } else {
            const double coeff = breve_s_mean - breve_tail[i];
            h1 = ws.w1[i] - (c1_const + coeff * int_sdw1);
            h2 = xi[i] - (c2_const + coeff * int_sdxi);
        }
        const double q = kap * h1 - h2;
        if (i == 0) {
            q_first = q;
        } else {
            const double dq = q - q_prev;
            sum_dq2 += dq * dq;
        }
        if (i < m) sum_q2 += q * q;
        q_prev = q;
        if (i == m) q_last = q;
    }
    sum_q2 *= h;
    if (sum_q2 <= 0.0) return false;
    // int Q dQ = (Q_1^2 - Q_0^2 - [Q,Q]) / 2 on the grid
    const double int_qdq = 0.5 * (q_last * q_last - q_first * q_first - sum_dq2);
    out = int_qdq / std::sqrt((kap * kap + 1.0) * sum_q2);
    return std::isfinite(out);
}

}  // namespace detail

// Monte Carlo draws of the modified-test limit law under the beta-local
// alternative (beta = 0 is the null).
inline LimitDraws simulate_limit_statistic(const LimitConfig& cfg) {
    cfg.validate();
    LimitDraws out;
    out.draws.reserve(cfg.reps);
    detail::LimitWorkspace ws;
    for (std::size_t r = 0; r < cfg.reps; ++r) {
        Rng rng(mix_seed(cfg.seed, r));
        double v;
        if (detail::limit_draw(cfg, rng, ws, v))
            out.draws.push_back(v);
        else
            ++out.discarded;
    }
    return out;
}

struct CriticalValue {
    double quantile = 0.0;
    double se = 0.0;
};

inline CriticalValue critical_value(const std::vector<double>& draws, double delta,
                                    std::size_t nboot = 200, std::uint64_t seed = 0x5eedULL) {
    CriticalValue cv;
    cv.quantile = quantile_lower(draws, delta);
    cv.se = quantile_bootstrap_se(draws, delta, nboot, seed);
    return cv;
}

// Rejection probability of the level-q test along a beta grid.
inline std::vector<std::pair<double, double>> local_power_curve(const std::vector<double>& betas,
                                                                const LimitConfig& base_cfg, double q_delta) {
    std::vector<std::pair<double, double>> out;
    out.reserve(betas.size());
    for (std::size_t b = 0; b < betas.size(); ++b) {
        LimitConfig cfg = base_cfg;
        cfg.beta = betas[b];
        cfg.seed = mix_seed(base_cfg.seed, 0xb001 + b);
        const LimitDraws draws = simulate_limit_statistic(cfg);
        std::size_t rej = 0;
        for (double d : draws.draws) rej += d < q_delta;
        out.emplace_back(betas[b], static_cast<double>(rej) / static_cast<double>(draws.draws.size()));
    }
    return out;
}

// Null draws of the classical two-step statistics: discretized independent
// Brownian pair, step-1 OLS, then the step-2 statistic at finite grid size.
// This is an independent route to the same limits as the functional draws.
inline LimitDraws classical_limit_draws(const TestKind& kind, const LimitConfig& cfg) {
    cfg.validate();
    LimitDraws out;
    out.draws.reserve(cfg.reps);
    const std::size_t m = cfg.grid_points;
    const double sqrt_h = std::sqrt(1.0 / static_cast<double>(m));
    std::vector<double> x(m + 1), y(m + 1), eps(m + 1);
    for (std::size_t r = 0; r < cfg.reps; ++r) {
        Rng rng(mix_seed(cfg.seed, r));
        x[0] = 0.0;
        y[0] = 0.0;
        for (std::size_t i = 1; i <= m; ++i) {
            x[i] = x[i - 1] + rng.normal() * sqrt_h;
            y[i] = y[i - 1] + rng.normal() * sqrt_h;
        }
        double xm = 0.0, ym = 0.0;
        for (std::size_t i = 1; i <= m; ++i) {
            xm += x[i];
            ym += y[i];
        }
        xm /= static_cast<double>(m);
        ym /= static_cast<double>(m);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 1; i <= m; ++i) {
            sxx += (x[i] - xm) * (x[i] - xm);
            sxy += (x[i] - xm) * (y[i] - ym);
        }
        if (sxx <= 0.0) {
            ++out.discarded;
            continue;
        }
        const double slope = sxy / sxx;
        const double intercept = ym - slope * xm;
        for (std::size_t i = 0; i <= m; ++i) eps[i] = y[i] - intercept - slope * x[i];
        double stat;
        try {
            switch (kind.family) {
                case TestFamily::ClassicalDf:
                case TestFamily::ModifiedDf:
                case TestFamily::ModifiedDfDetrended:
                    stat = df_psi(eps).psi;
                    break;
                case TestFamily::Adf:
                    stat = adf_t_statistic(eps, kind.adf_lag);
                    break;
                case TestFamily::PpZalpha:
                    stat = pp_statistics(eps, kind.pp_bandwidth).z_alpha;
                    break;
                case TestFamily::PpZtau:
                    stat = pp_statistics(eps, kind.pp_bandwidth).z_tau;
                    break;
                default:
                    throw ConfigError("classical draws: unsupported kind");
            }
        } catch (const DataError&) {
            ++out.discarded;
            continue;
        }
        if (std::isfinite(stat))
            out.draws.push_back(stat);
        else
            ++out.discarded;
    }
    return out;
}

// Keyed store of simulated critical values, serializable as CSV.
class CriticalValueTable : public CriticalValueProvider {
  public:
    struct Entry {
        double quantile = 0.0;
        std::size_t reps = 0;
        std::size_t grid = 0;
        std::uint64_t seed = 0;
        double se = 0.0;
    };

    using Key = std::tuple<std::string, double, bool, std::uint64_t>;  // kind, level, detrended, sigma hash

    void put(const std::string& kind, double level, bool detrended, std::uint64_t sigma_hash, Entry e) {
        entries_[Key{kind, level, detrended, sigma_hash}] = e;
    }

    const Entry& get(const std::string& kind, double level, bool detrended, std::uint64_t sigma_hash) const {
        const auto it = entries_.find(Key{kind, level, detrended, sigma_hash});
        if (it == entries_.end())
            throw ConfigError("critical value table: no entry for kind=" + kind + " level=" + std::to_string(level));
        return it->second;
    }

    double critical_value(const TestKind& kind, double level, std::uint64_t sigma_hash) const override {
        const bool detrended = kind.family == TestFamily::ModifiedDfDetrended;
        return get(family_name(kind.family), level, detrended, detrended ? sigma_hash : 0).quantile;
    }

    bool contains(const std::string& kind, double level, bool detrended, std::uint64_t sigma_hash) const {
        return entries_.count(Key{kind, level, detrended, sigma_hash}) > 0;
    }

    void save(std::ostream& os) const {
        os << "kind,level,detrended,sigma_hash,quantile,reps,grid,seed,se\n";
        char buf[256];
        for (const auto& [key, e] : entries_) {
            std::snprintf(buf, sizeof(buf), "%s,%.17g,%d,%016llx,%.17g,%zu,%zu,%llu,%.17g\n",
                          std::get<0>(key).c_str(), std::get<1>(key), std::get<2>(key) ? 1 : 0,
                          static_cast<unsigned long long>(std::get<3>(key)), e.quantile, e.reps, e.grid,
                          static_cast<unsigned long long>(e.seed), e.se);
            os << buf;
        }
    }

    static CriticalValueTable load(std::istream& in) {
        CriticalValueTable table;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line == "\r") continue;
            if (lineno == 1 && line.rfind("kind,", 0) == 0) continue;
            char kind[64];
            double level, quantile, se;
            int detrended;
            unsigned long long hash, seed;
            std::size_t reps, grid;
            if (std::sscanf(line.c_str(), "%63[^,],%lf,%d,%llx,%lf,%zu,%zu,%llu,%lf", kind, &level, &detrended,
                            &hash, &quantile, &reps, &grid, &seed, &se) != 9)
                throw DataError("critical value table: bad line " + std::to_string(lineno));
            table.put(kind, level, detrended != 0, hash, Entry{quantile, reps, grid, seed, se});
        }
        return table;
    }

    std::size_t size() const { return entries_.size(); }
    const std::map<Key, Entry>& entries() const { return entries_; }

  private:
    std::map<Key, Entry> entries_;
};

// Build a table covering the given kinds and levels from scratch.
inline CriticalValueTable tabulate_critical_values(const std::vector<TestKind>& kinds,
                                                   const std::vector<double>& levels, LimitConfig cfg) {
    CriticalValueTable table;
    for (const TestKind& kind : kinds) {
        LimitDraws draws;
        bool detrended = false;
        std::uint64_t hash = 0;
        switch (kind.family) {
            case TestFamily::ModifiedDf: {
                LimitConfig c = cfg;
                c.beta = 0.0;
                c.detrended = false;
                draws = simulate_limit_statistic(c);
                break;
            }
            case TestFamily::ModifiedDfDetrended: {
                LimitConfig c = cfg;
                c.beta = 0.0;
                c.detrended = true;
                detrended = true;
                hash = sigma_curve_hash(cfg.sigma_m_curve);
                draws = simulate_limit_statistic(c);
                break;
            }
            default:
                draws = classical_limit_draws(kind, cfg);
                break;
        }
        for (double level : levels) {
            const CriticalValue cv = critical_value(draws.draws, level);
            table.put(family_name(kind.family), level, detrended, hash,
                      CriticalValueTable::Entry{cv.quantile, cfg.reps, cfg.grid_points, cfg.seed, cv.se});
        }
    }
    return table;
}

}  // namespace hfcoint
