#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "hfcoint/cointtest.hpp"
#include "hfcoint/errors.hpp"
#include "hfcoint/estimate.hpp"
#include "hfcoint/io.hpp"
#include "hfcoint/limitdist.hpp"
#include "hfcoint/simulate.hpp"
#include "hfcoint/stats.hpp"

namespace hfcoint {

// Shared experiment settings. The paper preset is the full-scale study, the
// desk preset is sized so the whole acceptance run finishes in minutes.
struct ExperimentConfig {
    std::vector<int> models{8};
    std::vector<double> rhos{1.0, 0.8, 0.9};
    std::vector<std::size_t> subsamples{1, 3, 6, 13, 39, 78};  // of the base sampling gap
    std::size_t replications = 200;
    double level = 0.05;
    std::uint64_t master_seed = 1;
    unsigned threads = 1;
    std::string out_dir;
    ModelSpec base;  // template: horizon, sampling gap, volatilities, jumps
    TruncationConfig trunc;
    DeflationConfig defl;

    static ExperimentConfig paper_preset() {
        ExperimentConfig cfg;
        cfg.base.T_days = 504.0;
        cfg.replications = 1000;
        return cfg;
    }

    static ExperimentConfig desk_preset() {
        ExperimentConfig cfg;
        cfg.base.T_days = 126.0;
        cfg.replications = 200;
        return cfg;
    }

    ModelSpec cell_spec(int model, double rho, std::uint64_t rep) const {
        ModelSpec spec = base;
        spec.model_id = model;
        if (rho >= 1.0) {
            spec.regime = RhoRegime::None;
            spec.rho = 1.0;
        } else {
            spec.regime = RhoRegime::Coint;
            spec.rho = rho;
        }
        spec.seed = mix_seed(master_seed, (static_cast<std::uint64_t>(model) << 32) | rep);
        return spec;
    }
};

namespace detail {

// Plain parallel loop with replication-indexed output slots; results do not
// depend on the thread count.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const unsigned use = std::min<unsigned>(threads, static_cast<unsigned>(count));
    pool.reserve(use);
    for (unsigned t = 0; t < use; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

inline std::string format_rho(double rho) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", rho);
    return buf;
}

}  // namespace detail

struct SizePowerRow {
    int model = 0;
    std::size_t n = 0;
    double rho = 1.0;
    std::string kind;
    double rejection = 0.0;
    double mc_se = 0.0;
    std::size_t reps = 0;
};

inline void write_size_power_csv(std::ostream& os, const std::vector<SizePowerRow>& rows) {
    os << "model,n,rho,kind,rejection,mc_se,reps\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%zu,%g,%s,%.6f,%.6f,%zu\n", r.model, r.n, r.rho, r.kind.c_str(),
                      r.rejection, r.mc_se, r.reps);
        os << buf;
    }
}

// Rejection frequencies for each (model, n, rho, kind) cell. One Euler pass
// per (model, replication) serves every frequency and regime.
inline std::vector<SizePowerRow> run_size_power(const ExperimentConfig& cfg, const std::vector<TestKind>& kinds,
                                                const CriticalValueTable& cv) {
    for (const TestKind& kind : kinds)  // fail before simulating anything
        cv.critical_value(kind, cfg.level, 0);

    std::vector<SizePowerRow> rows;
    for (int model : cfg.models) {
        const std::size_t ncells = cfg.rhos.size() * cfg.subsamples.size() * kinds.size();
        std::vector<std::vector<std::uint8_t>> rejects(cfg.replications,
                                                       std::vector<std::uint8_t>(ncells, 0));
        detail::parallel_for(cfg.replications, cfg.threads, [&](std::size_t rep) {
            const ModelSpec proto = cfg.cell_spec(model, 1.0, rep);
            const BasePaths base = simulate_base(proto);
            std::size_t cell = 0;
            for (double rho : cfg.rhos) {
                for (std::size_t sub : cfg.subsamples) {
                    const ModelSpec spec = cfg.cell_spec(model, rho, rep);
                    const SimOutput sim = assemble(base, spec, sub);
                    // modified pipeline and classical step-1 shared across kinds
                    for (const TestKind& kind : kinds) {
                        TestResult res;
                        if (kind.family == TestFamily::ModifiedDf ||
                            kind.family == TestFamily::ModifiedDfDetrended) {
                            res = run_modified_df(sim.pair, cfg.trunc, cfg.defl,
                                                  kind.family == TestFamily::ModifiedDfDetrended, cfg.level, cv);
                        } else {
                            TestKind k = kind;
                            if (k.family == TestFamily::Adf && k.adf_lag < 0)
                                k.adf_lag = select_adf_lag(sim.pair.n());
                            if ((k.family == TestFamily::PpZalpha || k.family == TestFamily::PpZtau) &&
                                k.pp_bandwidth < 0)
                                k.pp_bandwidth = default_pp_bandwidth(sim.pair.n());
                            res = classical_tests(sim.pair, k, cfg.level, cv);
                        }
                        rejects[rep][cell++] = res.reject ? 1 : 0;
                    }
                }
            }
        });
        std::size_t cell = 0;
        for (double rho : cfg.rhos) {
            for (std::size_t sub : cfg.subsamples) {
                for (const TestKind& kind : kinds) {
                    double p = 0.0;
                    for (std::size_t rep = 0; rep < cfg.replications; ++rep) p += rejects[rep][cell];
                    p /= static_cast<double>(cfg.replications);
                    SizePowerRow row;
                    row.model = model;
                    row.n = cfg.base.base_n() / sub;
                    row.rho = rho;
                    row.kind = family_name(kind.family);
                    row.rejection = p;
                    row.mc_se = std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.replications));
                    row.reps = cfg.replications;
                    rows.push_back(row);
                    ++cell;
                }
            }
        }
    }
    return rows;
}

struct EstimationRow {
    int model = 0;
    std::size_t n = 0;
    double rho = 1.0;
    double bias_alpha_mod = 0.0, std_alpha_mod = 0.0;
    double bias_c_mod = 0.0, std_c_mod = 0.0;
    double bias_alpha_std = 0.0, std_alpha_std = 0.0;
    double bias_c_std = 0.0, std_c_std = 0.0;
    double mean_rho_hat = 0.0;    // robust estimator on the modified residuals
    double mean_rho_tilde = 0.0;  // classical estimator on the raw-OLS residuals
    std::size_t reps = 0;
};

inline void write_estimation_csv(std::ostream& os, const std::vector<EstimationRow>& rows) {
    os << "model,n,rho,bias_alpha_mod,std_alpha_mod,bias_c_mod,std_c_mod,"
          "bias_alpha_std,std_alpha_std,bias_c_std,std_c_std,mean_rho_hat,mean_rho_tilde,reps\n";
    char buf[320];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%zu,%g,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%zu\n",
                      r.model, r.n, r.rho, r.bias_alpha_mod, r.std_alpha_mod, r.bias_c_mod, r.std_c_mod,
                      r.bias_alpha_std, r.std_alpha_std, r.bias_c_std, r.std_c_std, r.mean_rho_hat,
                      r.mean_rho_tilde, r.reps);
        os << buf;
    }
}

// Bias and dispersion of the modified and standard estimators, plus the two
// residual autocorrelation estimators the signature plot is built from.
inline std::vector<EstimationRow> run_estimation_table(const ExperimentConfig& cfg) {
    std::vector<EstimationRow> rows;
    struct RepStats {
        double a_mod, c_mod, a_std, c_std, rho_hat, rho_tilde;
    };
    for (int model : cfg.models) {
        const std::size_t ncells = cfg.rhos.size() * cfg.subsamples.size();
        std::vector<std::vector<RepStats>> stats(cfg.replications, std::vector<RepStats>(ncells));
        detail::parallel_for(cfg.replications, cfg.threads, [&](std::size_t rep) {
            const ModelSpec proto = cfg.cell_spec(model, 1.0, rep);
            const BasePaths base = simulate_base(proto);
            std::size_t cell = 0;
            for (double rho : cfg.rhos) {
                for (std::size_t sub : cfg.subsamples) {
                    const ModelSpec spec = cfg.cell_spec(model, rho, rep);
                    const SimOutput sim = assemble(base, spec, sub);
                    const DeflatedPair dp = deflate(sim.pair, cfg.trunc, cfg.defl);
                    const CointFit fit = fit_cointegration(dp);
                    const std::size_t n = sim.pair.n();
                    std::span<const double> xs(sim.pair.x.values);
                    std::span<const double> ys(sim.pair.y.values);
                    const OlsLine raw = ols(xs.subspan(1), ys.subspan(1));
                    std::vector<double> raw_resid(n + 1);
                    for (std::size_t i = 0; i <= n; ++i)
                        raw_resid[i] = sim.pair.y.values[i] - raw.intercept - raw.slope * sim.pair.x.values[i];
                    RepStats s;
                    s.a_mod = fit.alpha_hat;
                    s.c_mod = fit.c_hat;
                    s.a_std = raw.slope;
                    s.c_std = raw.intercept;
                    s.rho_hat = rho_hat_robust(fit.residuals);
                    s.rho_tilde = rho_tilde_classic(raw_resid);
                    stats[rep][cell++] = s;
                }
            }
        });
        std::size_t cell = 0;
        for (double rho : cfg.rhos) {
            for (std::size_t sub : cfg.subsamples) {
                std::vector<double> am, cm, as, cs, rh, rt;
                for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
                    const RepStats& s = stats[rep][cell];
                    am.push_back(s.a_mod);
                    cm.push_back(s.c_mod);
                    as.push_back(s.a_std);
                    cs.push_back(s.c_std);
                    rh.push_back(s.rho_hat);
                    rt.push_back(s.rho_tilde);
                }
                EstimationRow row;
                row.model = model;
                row.n = cfg.base.base_n() / sub;
                row.rho = rho;
                row.bias_alpha_mod = mean(am) - cfg.base.alpha0;
                row.std_alpha_mod = sample_std(am);
                row.bias_c_mod = mean(cm) - cfg.base.c0;
                row.std_c_mod = sample_std(cm);
                row.bias_alpha_std = mean(as) - cfg.base.alpha0;
                row.std_alpha_std = sample_std(as);
                row.bias_c_std = mean(cs) - cfg.base.c0;
                row.std_c_std = sample_std(cs);
                row.mean_rho_hat = mean(rh);
                row.mean_rho_tilde = mean(rt);
                row.reps = cfg.replications;
                rows.push_back(row);
                ++cell;
            }
        }
    }
    return rows;
}

struct SignatureRow {
    std::size_t n = 0;
    double delta_days = 0.0;
    double rho_hat = 0.0;
    double rho_tilde = 0.0;
};

inline void write_signature_csv(std::ostream& os, const std::vector<SignatureRow>& rows) {
    os << "n,delta_days,rho_hat,rho_tilde\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.6f,%.6f\n", r.n, r.delta_days, r.rho_hat, r.rho_tilde);
        os << buf;
    }
}

// Autocorrelation estimates across the subsampling ladder for one pair:
// rho_hat from the modified pipeline, rho_tilde from the raw two-step fit.
inline std::vector<SignatureRow> signature_plot(const PairSeries& pair, const std::vector<std::size_t>& ladder,
                                                const TruncationConfig& trunc, const DeflationConfig& defl) {
    std::vector<SignatureRow> rows;
    for (std::size_t m : ladder) {
        if (pair.n() % m != 0) continue;  // rung does not tile this sample
        const PairSeries sub = subsample(pair, m);
        const DeflatedPair dp = deflate(sub, trunc, defl);
        const CointFit fit = fit_cointegration(dp);
        std::span<const double> xs(sub.x.values);
        std::span<const double> ys(sub.y.values);
        const OlsLine raw = ols(xs.subspan(1), ys.subspan(1));
        std::vector<double> raw_resid(sub.n() + 1);
        for (std::size_t i = 0; i <= sub.n(); ++i)
            raw_resid[i] = sub.y.values[i] - raw.intercept - raw.slope * sub.x.values[i];
        SignatureRow row;
        row.n = sub.n();
        row.delta_days = sub.delta();
        row.rho_hat = rho_hat_robust(fit.residuals);
        row.rho_tilde = rho_tilde_classic(raw_resid);
        rows.push_back(row);
    }
    return rows;
}

struct EmpiricalRow {
    std::size_t n = 0;
    double delta_days = 0.0;
    std::map<std::string, int> decisions;  // kind -> 0/1, -1 when degenerate
    double rho_hat = 0.0;
    double rho_tilde = 0.0;
    std::string error;
};

inline void write_empirical_csv(std::ostream& os, const std::vector<EmpiricalRow>& rows,
                                const std::vector<TestKind>& kinds) {
    os << "n,delta_days";
    for (const auto& k : kinds) os << "," << family_name(k.family);
    os << ",rho_hat,rho_tilde,error\n";
    for (const auto& r : rows) {
        os << r.n << "," << r.delta_days;
        for (const auto& k : kinds) {
            const auto it = r.decisions.find(family_name(k.family));
            os << "," << (it == r.decisions.end() ? -1 : it->second);
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,", r.rho_hat, r.rho_tilde);
        os << buf << r.error << "\n";
    }
}

// Full empirical workflow on one aligned pair: all tests and both
// autocorrelation estimates at each rung of the ladder.
inline std::vector<EmpiricalRow> run_empirical(const PairSeries& pair, const std::vector<std::size_t>& ladder,
                                               const std::vector<TestKind>& kinds, double level,
                                               const CriticalValueTable& cv, const TruncationConfig& trunc,
                                               const DeflationConfig& defl) {
    std::vector<EmpiricalRow> rows;
    for (std::size_t m : ladder) {
        if (pair.n() % m != 0) continue;
        const PairSeries sub = subsample(pair, m);
        EmpiricalRow row;
        row.n = sub.n();
        row.delta_days = sub.delta();
        try {
            const DeflatedPair dp = deflate(sub, trunc, defl);
            const CointFit fit = fit_cointegration(dp);
            row.rho_hat = rho_hat_robust(fit.residuals);
            std::span<const double> xs(sub.x.values);
            std::span<const double> ys(sub.y.values);
            const OlsLine raw = ols(xs.subspan(1), ys.subspan(1));
            std::vector<double> raw_resid(sub.n() + 1);
            for (std::size_t i = 0; i <= sub.n(); ++i)
                raw_resid[i] = sub.y.values[i] - raw.intercept - raw.slope * sub.x.values[i];
            row.rho_tilde = rho_tilde_classic(raw_resid);
            for (const TestKind& kind : kinds) {
                TestKind k = kind;
                if (k.family == TestFamily::Adf && k.adf_lag < 0) k.adf_lag = select_adf_lag(sub.n());
                if ((k.family == TestFamily::PpZalpha || k.family == TestFamily::PpZtau) && k.pp_bandwidth < 0)
                    k.pp_bandwidth = default_pp_bandwidth(sub.n());
                TestResult res;
                if (k.family == TestFamily::ModifiedDf || k.family == TestFamily::ModifiedDfDetrended)
                    res = run_modified_df(sub, trunc, defl, k.family == TestFamily::ModifiedDfDetrended, level,
                                          cv);
                else
                    res = classical_tests(sub, k, level, cv);
                row.decisions[family_name(k.family)] = res.reject ? 1 : 0;
            }
        } catch (const DataError& err) {
            row.error = err.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace hfcoint
