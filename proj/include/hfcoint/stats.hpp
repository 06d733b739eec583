#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hfcoint/errors.hpp"
#include "hfcoint/rng.hpp"

namespace hfcoint {

inline double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

inline double sample_std(std::span<const double> v) { return std::sqrt(variance(v)); }

inline double median(std::vector<double> v) {
    if (v.empty()) throw DataError("median of empty sample");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Inverse standard normal CDF, Wichura's AS241 (double precision branch).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal_quantile: p must be in (0,1)");
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545703 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                   1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                   0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                   0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                   7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

// Empirical delta-quantile with lower interpolation: the ceil(N*delta)-th
// order statistic (1-indexed).
inline double quantile_lower(std::vector<double> draws, double delta) {
    if (draws.empty()) throw DataError("quantile of empty sample");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("quantile level must be in (0,1)");
    const auto n = static_cast<double>(draws.size());
    std::size_t k = static_cast<std::size_t>(std::ceil(delta * n));
    if (k == 0) k = 1;
    std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(k - 1), draws.end());
    return draws[k - 1];
}

// Bootstrap standard error of the empirical delta-quantile.
inline double quantile_bootstrap_se(const std::vector<double>& draws, double delta, std::size_t nboot,
                                    std::uint64_t seed) {
    if (draws.size() < 2) return 0.0;
    Rng rng(seed);
    std::vector<double> resample(draws.size());
    std::vector<double> qs;
    qs.reserve(nboot);
    for (std::size_t b = 0; b < nboot; ++b) {
        for (auto& x : resample) x = draws[rng.next_u64() % draws.size()];
        qs.push_back(quantile_lower(resample, delta));
    }
    return sample_std(qs);
}

}  // namespace hfcoint
