#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "hfcoint/errors.hpp"
#include "hfcoint/grid.hpp"

namespace hfcoint {

// Raw irregular ticks, timestamps in epoch seconds (UTC), strictly increasing.
struct TickSeries {
    std::vector<double> timestamps;
    std::vector<double> prices;

    std::size_t size() const { return timestamps.size(); }
};

namespace detail {

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

inline long long days_from_civil(int y, int m, int d) {
    // Howard Hinnant's algorithm; proleptic Gregorian, days since 1970-01-01.
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

// Accepts "YYYY-MM-DD HH:MM:SS", "YYYY-MM-DDTHH:MM:SS", optional ".fff" and
// trailing "Z", or a plain number of epoch seconds.
inline bool parse_timestamp(std::string s, double& out) {
    if (!s.empty() && s.back() == 'Z') s.pop_back();
    if (parse_double(s, out)) return true;
    int y, mo, d, h, mi;
    double sec;
    char sep;
    if (std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%lf", &y, &mo, &d, &sep, &h, &mi, &sec) == 7 &&
        (sep == 'T' || sep == ' ')) {
        if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec >= 61)
            return false;
        out = static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 + h * 3600.0 + mi * 60.0 + sec;
        return true;
    }
    return false;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

struct IngestOptions {
    TradingSession session;
    double session_open_seconds = 9.5 * 3600.0;  // 09:30 local clock, taken as UTC
    double start_epoch = -std::numeric_limits<double>::infinity();
    double end_epoch = std::numeric_limits<double>::infinity();
};

// Parse a `timestamp,price` CSV, keep ticks inside session hours and the
// [start,end] range, sort, and collapse duplicate timestamps to the last
// price seen for that timestamp.
inline TickSeries ingest_csv(std::istream& in, const IngestOptions& opt = {}) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::pair<double, double>> ticks;
    bool header_checked = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (!header_checked) {
            header_checked = true;
            if (fields.size() >= 2 && fields[0] == "timestamp" && fields[1] == "price") continue;
            // no header; fall through and parse as data
        }
        if (fields.size() < 2)
            throw DataError("ingest: line " + std::to_string(lineno) + ": expected `timestamp,price`");
        double ts, px;
        if (!detail::parse_timestamp(fields[0], ts))
            throw DataError("ingest: line " + std::to_string(lineno) + ": bad timestamp `" + fields[0] + "`");
        if (!detail::parse_double(fields[1], px))
            throw DataError("ingest: line " + std::to_string(lineno) + ": bad price `" + fields[1] + "`");
        if (!(px > 0.0))
            throw DataError("ingest: line " + std::to_string(lineno) + ": price must be positive");
        if (ts < opt.start_epoch || ts > opt.end_epoch) continue;
        const double tod = ts - std::floor(ts / 86400.0) * 86400.0;
        if (tod < opt.session_open_seconds || tod > opt.session_open_seconds + opt.session.seconds_per_day) continue;
        ticks.emplace_back(ts, px);
    }
    std::stable_sort(ticks.begin(), ticks.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    TickSeries out;
    for (const auto& [ts, px] : ticks) {
        if (!out.timestamps.empty() && out.timestamps.back() == ts) {
            out.prices.back() = px;  // last price wins at a duplicated stamp
        } else {
            out.timestamps.push_back(ts);
            out.prices.push_back(px);
        }
    }
    if (out.timestamps.empty()) throw DataError("ingest: no ticks inside session/range");
    return out;
}

// Session-concatenated clock: calendar days that contain ticks are indexed
// 0,1,2,... and time-of-day maps linearly into [0,1] session days.
inline std::vector<double> session_times_days(const TickSeries& ticks, const IngestOptions& opt = {}) {
    std::map<long long, std::size_t> day_index;
    for (double ts : ticks.timestamps) day_index.emplace(static_cast<long long>(std::floor(ts / 86400.0)), 0);
    std::size_t idx = 0;
    for (auto& [day, i] : day_index) i = idx++;
    std::vector<double> out;
    out.reserve(ticks.size());
    for (double ts : ticks.timestamps) {
        const long long day = static_cast<long long>(std::floor(ts / 86400.0));
        double tod = ts - static_cast<double>(day) * 86400.0 - opt.session_open_seconds;
        tod = std::clamp(tod, 0.0, opt.session.seconds_per_day);
        out.push_back(static_cast<double>(day_index[day]) + tod / opt.session.seconds_per_day);
    }
    return out;
}

inline std::size_t count_session_days(const TickSeries& ticks) {
    std::map<long long, std::size_t> days;
    for (double ts : ticks.timestamps) days.emplace(static_cast<long long>(std::floor(ts / 86400.0)), 0);
    return days.size();
}

// Previous-tick resampling of log prices onto a regular grid on the session
// clock. The grid value at t_i is log(last price at or before t_i).
inline SampledPath resample_previous_tick(const TickSeries& ticks, const SamplingGrid& grid,
                                          const IngestOptions& opt = {}) {
    const auto times = session_times_days(ticks, opt);
    SampledPath out;
    out.grid = grid;
    out.values.resize(grid.n + 1);
    std::size_t j = 0;  // index of last tick with time <= t_i
    if (times.empty() || times.front() > 0.0)
        throw DataError("resample: no tick at or before the grid start");
    for (std::size_t i = 0; i <= grid.n; ++i) {
        const double t = grid.time_at(i);
        while (j + 1 < times.size() && times[j + 1] <= t + 1e-12) ++j;
        out.values[i] = std::log(ticks.prices[j]);
    }
    return out;
}

// `t,X,Y[,eps_true]` round trip for simulated or resampled pairs.
inline void write_pair_csv(std::ostream& os, const PairSeries& pair, const std::vector<double>* eps = nullptr) {
    os << (eps ? "t,X,Y,eps_true\n" : "t,X,Y\n");
    char buf[128];
    for (std::size_t i = 0; i <= pair.n(); ++i) {
        if (eps)
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", pair.grid().time_at(i),
                          pair.x.values[i], pair.y.values[i], (*eps)[i]);
        else
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", pair.grid().time_at(i), pair.x.values[i],
                          pair.y.values[i]);
        os << buf;
    }
}

inline PairSeries read_pair_csv(std::istream& in, TradingSession session = {}) {
    std::string line;
    std::vector<double> t, xs, ys;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (lineno == 1 && fields[0] == "t") continue;
        if (fields.size() < 3) throw DataError("pair csv: line " + std::to_string(lineno));
        double a, b, c;
        if (!detail::parse_double(fields[0], a) || !detail::parse_double(fields[1], b) ||
            !detail::parse_double(fields[2], c))
            throw DataError("pair csv: line " + std::to_string(lineno) + ": bad number");
        t.push_back(a);
        xs.push_back(b);
        ys.push_back(c);
    }
    if (t.size() < 3) throw DataError("pair csv: too short");
    SampledPath x, y;
    x.grid = SamplingGrid::make(t.back(), t.size() - 1, session);
    y.grid = x.grid;
    x.values = std::move(xs);
    y.values = std::move(ys);
    return pair_align(std::move(x), std::move(y));
}

inline void write_path_csv(std::ostream& os, const SampledPath& path) {
    os << "t,value\n";
    char buf[64];
    for (std::size_t i = 0; i <= path.grid.n; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", path.grid.time_at(i), path.values[i]);
        os << buf;
    }
}

inline SampledPath read_path_csv(std::istream& in, TradingSession session = {}) {
    std::string line;
    std::vector<double> t, v;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (lineno == 1 && fields[0] == "t") continue;
        if (fields.size() < 2) throw DataError("path csv: line " + std::to_string(lineno));
        double a, b;
        if (!detail::parse_double(fields[0], a) || !detail::parse_double(fields[1], b))
            throw DataError("path csv: line " + std::to_string(lineno) + ": bad number");
        t.push_back(a);
        v.push_back(b);
    }
    if (t.size() < 3) throw DataError("path csv: too short");
    SampledPath out;
    out.grid = SamplingGrid::make(t.back(), t.size() - 1, session);
    out.values = std::move(v);
    out.validate();
    return out;
}

}  // namespace hfcoint
