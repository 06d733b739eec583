#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hfcoint/errors.hpp"
#include "hfcoint/estimate.hpp"
#include "hfcoint/grid.hpp"
#include "hfcoint/preprocess.hpp"

namespace hfcoint {

enum class TestFamily {
    ModifiedDf,
    ModifiedDfDetrended,
    ClassicalDf,
    Adf,
    PpZalpha,
    PpZtau,
};

struct TestKind {
    TestFamily family = TestFamily::ModifiedDf;
    int adf_lag = 0;       // p, Adf only
    int pp_bandwidth = 0;  // L, Pp only

    static TestKind modified_df() { return {TestFamily::ModifiedDf, 0, 0}; }
    static TestKind modified_df_detrended() { return {TestFamily::ModifiedDfDetrended, 0, 0}; }
    static TestKind classical_df() { return {TestFamily::ClassicalDf, 0, 0}; }
    static TestKind adf(int p) { return {TestFamily::Adf, p, 0}; }
    static TestKind pp_z_alpha(int L) { return {TestFamily::PpZalpha, 0, L}; }
    static TestKind pp_z_tau(int L) { return {TestFamily::PpZtau, 0, L}; }
};

inline std::string family_name(TestFamily f) {
    switch (f) {
        case TestFamily::ModifiedDf: return "modified_df";
        case TestFamily::ModifiedDfDetrended: return "modified_df_detrended";
        case TestFamily::ClassicalDf: return "df";
        case TestFamily::Adf: return "adf";
        case TestFamily::PpZalpha: return "pp_z_alpha";
        case TestFamily::PpZtau: return "pp_z_tau";
    }
    return "?";
}

// Schwert's lag rule floor(12 (n/100)^{1/4}).
inline int select_adf_lag(std::size_t n) {
    if (n < 8) throw ConfigError("adf lag rule: need n >= 8");
    return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

// Newey-West style bandwidth floor(4 (n/100)^{2/9}).
inline int default_pp_bandwidth(std::size_t n) {
    return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

struct DfStatistic {
    double phi_hat = 0.0;
    double s_phi = 0.0;
    double psi = 0.0;
};

// t-statistic of phi in d(eps)_i = phi * eps_{i-1} + eta_i, i = 1..n:
//   phi_hat = sum d(eps)_i eps_{i-1} / sum_{i=1..n} eps_i^2
//   s_phi^2 = n^{-1} sum (d(eps)_i - phi_hat eps_{i-1})^2 / sum eps_{i-1}^2
inline DfStatistic df_psi(std::span<const double> eps) {
    const std::size_t n = eps.size() - 1;
    if (n < 2) throw DataError("df: need n >= 2");
    double num = 0.0, level2 = 0.0, lag2 = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double d = eps[i] - eps[i - 1];
        num += d * eps[i - 1];
        level2 += eps[i] * eps[i];
        lag2 += eps[i - 1] * eps[i - 1];
    }
    if (level2 <= 0.0 || lag2 <= 0.0) throw DataError("df: degenerate residuals");
    DfStatistic out;
    out.phi_hat = num / level2;
    double rss = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double r = (eps[i] - eps[i - 1]) - out.phi_hat * eps[i - 1];
        rss += r * r;
    }
    out.s_phi = std::sqrt(rss / static_cast<double>(n) / lag2);
    if (out.s_phi == 0.0) {
        if (out.phi_hat != 0.0) throw DataError("df: zero dispersion with nonzero phi");
        out.psi = 0.0;  // constant residuals: d(eps) = 0 identically
        return out;
    }
    out.psi = out.phi_hat / out.s_phi;
    return out;
}

struct TestResult {
    TestKind kind;
    double statistic = 0.0;
    double critical_value = 0.0;
    double level = 0.05;
    bool reject = false;  // left tailed: statistic < critical value
    std::size_t n = 0;
    double delta_days = 0.0;
    double phi_hat = 0.0;
    double s_phi = 0.0;
};

namespace detail {

// Solve the small symmetric positive definite system of the ADF regression
// via Cholesky. Dimension is p+1 (lags plus the level term).
inline std::vector<double> solve_spd(std::vector<double> A, std::vector<double> b, std::size_t m) {
    for (std::size_t j = 0; j < m; ++j) {
        double d = A[j * m + j];
        for (std::size_t k = 0; k < j; ++k) d -= A[j * m + k] * A[j * m + k];
        if (d <= 0.0) throw DataError("regression: collinear design");
        const double Ljj = std::sqrt(d);
        A[j * m + j] = Ljj;
        for (std::size_t i = j + 1; i < m; ++i) {
            double s = A[i * m + j];
            for (std::size_t k = 0; k < j; ++k) s -= A[i * m + k] * A[j * m + k];
            A[i * m + j] = s / Ljj;
        }
    }
    // forward then backward substitution
    for (std::size_t i = 0; i < m; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= A[i * m + k] * b[k];
        b[i] = s / A[i * m + i];
    }
    for (std::size_t ii = m; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < m; ++k) s -= A[k * m + ii] * b[k];
        b[ii] = s / A[ii * m + ii];
    }
    return b;
}

}  // namespace detail

// t-statistic of phi in d(eps)_i = phi eps_{i-1} + sum_j psi_j d(eps)_{i-j} + u_i
// (no intercept), classical OLS standard errors.
inline double adf_t_statistic(std::span<const double> eps, int p) {
    const std::size_t n = eps.size() - 1;
    if (p < 0) throw ConfigError("adf: lag must be >= 0");
    const std::size_t m = static_cast<std::size_t>(p) + 1;
    const std::size_t first = static_cast<std::size_t>(p) + 1;  // first usable i
    if (n < first + m + 1) throw DataError("adf: sample too short for lag order");

    std::vector<double> d(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) d[i] = eps[i] - eps[i - 1];

    // normal equations X'X, X'y with columns [eps_{i-1}, d_{i-1}, ..., d_{i-p}]
    std::vector<double> xtx(m * m, 0.0), xty(m, 0.0);
    std::vector<double> row(m);
    const std::size_t nobs = n - first + 1;
    for (std::size_t i = first; i <= n; ++i) {
        row[0] = eps[i - 1];
        for (std::size_t j = 1; j < m; ++j) row[j] = d[i - j];
        for (std::size_t a = 0; a < m; ++a) {
            xty[a] += row[a] * d[i];
            for (std::size_t b = a; b < m; ++b) xtx[a * m + b] += row[a] * row[b];
        }
    }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < a; ++b) xtx[a * m + b] = xtx[b * m + a];

    const std::vector<double> coef = detail::solve_spd(xtx, xty, m);
    double rss = 0.0;
    for (std::size_t i = first; i <= n; ++i) {
        double fit = coef[0] * eps[i - 1];
        for (std::size_t j = 1; j < m; ++j) fit += coef[j] * d[i - j];
        const double u = d[i] - fit;
        rss += u * u;
    }
    if (nobs <= m) throw DataError("adf: no degrees of freedom");
    const double s2 = rss / static_cast<double>(nobs - m);

    // standard error of coef[0]: s2 * [(X'X)^{-1}]_{00} via one extra solve
    std::vector<double> e0(m, 0.0);
    e0[0] = 1.0;
    std::vector<double> xtx2(m * m, 0.0);
    for (std::size_t i = first; i <= n; ++i) {
        row[0] = eps[i - 1];
        for (std::size_t j = 1; j < m; ++j) row[j] = d[i - j];
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) xtx2[a * m + b] += row[a] * row[b];
    }
    const std::vector<double> inv0 = detail::solve_spd(xtx2, e0, m);
    const double se = std::sqrt(s2 * inv0[0]);
    if (se == 0.0) throw DataError("adf: zero standard error");
    return coef[0] / se;
}

struct PpStatistics {
    double z_alpha = 0.0;
    double z_tau = 0.0;
    double lambda_hat = 0.0;
    double s2 = 0.0;
    double sigma2_lr = 0.0;
};

// Phillips-Perron corrections from the no-intercept regression
// d(eps)_i = phi eps_{i-1} + u_i, with a Bartlett window of width L.
inline PpStatistics pp_statistics(std::span<const double> eps, int L) {
    const std::size_t n = eps.size() - 1;
    if (L < 0) throw ConfigError("pp: bandwidth must be >= 0");
    if (n < static_cast<std::size_t>(L) + 3) throw DataError("pp: sample too short for bandwidth");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        num += (eps[i] - eps[i - 1]) * eps[i - 1];
        den += eps[i - 1] * eps[i - 1];
    }
    if (den <= 0.0) throw DataError("pp: degenerate residuals");
    const double phi = num / den;
    std::vector<double> u(n + 1, 0.0);
    double s2 = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        u[i] = (eps[i] - eps[i - 1]) - phi * eps[i - 1];
        s2 += u[i] * u[i];
    }
    s2 /= static_cast<double>(n);
    double lam = 0.0;
    for (int l = 1; l <= L; ++l) {
        double acov = 0.0;
        for (std::size_t i = static_cast<std::size_t>(l) + 1; i <= n; ++i) acov += u[i] * u[i - l];
        lam += (1.0 - static_cast<double>(l) / (L + 1.0)) * acov;
    }
    lam /= static_cast<double>(n);
    PpStatistics out;
    out.lambda_hat = lam;
    out.s2 = s2;
    out.sigma2_lr = s2 + 2.0 * lam;
    if (out.sigma2_lr <= 0.0) throw DataError("pp: nonpositive long-run variance");
    const double nn = static_cast<double>(n);
    const double d_scaled = den / (nn * nn);
    const double t_phi = phi / std::sqrt(s2 / den);
    out.z_alpha = nn * phi - lam / d_scaled;
    out.z_tau = std::sqrt(s2 / out.sigma2_lr) * t_phi - lam / (std::sqrt(out.sigma2_lr) * std::sqrt(d_scaled));
    return out;
}

// Critical-value provider interface; the limitdist module implements it.
class CriticalValueProvider {
  public:
    virtual ~CriticalValueProvider() = default;
    virtual double critical_value(const TestKind& kind, double level, std::uint64_t sigma_hash) const = 0;
};

// Modified test: truncate, deflate (optionally detrend), regress, then the
// DF statistic on the estimated residuals; reject left-tailed.
inline TestResult run_modified_df(const PairSeries& pair, const TruncationConfig& cfg_t,
                                  const DeflationConfig& cfg_d, bool detrended, double level,
                                  const CriticalValueProvider& cv, std::uint64_t sigma_hash = 0) {
    const DeflatedPair dp = detrended ? detrend_deflate(pair, cfg_t, cfg_d) : deflate(pair, cfg_t, cfg_d);
    const CointFit fit = fit_cointegration(dp);
    const DfStatistic df = df_psi(fit.residuals);
    TestResult out;
    out.kind = detrended ? TestKind::modified_df_detrended() : TestKind::modified_df();
    out.statistic = df.psi;
    out.phi_hat = df.phi_hat;
    out.s_phi = df.s_phi;
    out.level = level;
    out.critical_value = cv.critical_value(out.kind, level, detrended ? sigma_hash : 0);
    out.reject = out.statistic < out.critical_value;
    out.n = pair.n();
    out.delta_days = pair.delta();
    return out;
}

// Two-step residual test on raw log prices: OLS of Y on X with intercept,
// then the selected unit-root statistic on the residuals.
inline TestResult classical_tests(const PairSeries& pair, const TestKind& kind, double level,
                                  const CriticalValueProvider& cv) {
    const std::size_t n = pair.n();
    std::span<const double> xs(pair.x.values);
    std::span<const double> ys(pair.y.values);
    const OlsLine line = ols(xs.subspan(1), ys.subspan(1));
    std::vector<double> eps(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        eps[i] = pair.y.values[i] - line.intercept - line.slope * pair.x.values[i];

    TestResult out;
    out.kind = kind;
    out.level = level;
    out.n = n;
    out.delta_days = pair.delta();
    switch (kind.family) {
        case TestFamily::ClassicalDf: {
            const DfStatistic df = df_psi(eps);
            out.statistic = df.psi;
            out.phi_hat = df.phi_hat;
            out.s_phi = df.s_phi;
            break;
        }
        case TestFamily::Adf:
            out.statistic = adf_t_statistic(eps, kind.adf_lag);
            break;
        case TestFamily::PpZalpha:
            out.statistic = pp_statistics(eps, kind.pp_bandwidth).z_alpha;
            break;
        case TestFamily::PpZtau:
            out.statistic = pp_statistics(eps, kind.pp_bandwidth).z_tau;
            break;
        default:
            throw ConfigError("classical_tests: kind must be a classical test");
    }
    out.critical_value = cv.critical_value(kind, level, 0);
    out.reject = out.statistic < out.critical_value;
    return out;
}

}  // namespace hfcoint
