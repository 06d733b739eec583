#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "hfcoint/grid.hpp"
#include "hfcoint/io.hpp"

using namespace hfcoint;

namespace {

SampledPath make_path(double T, std::size_t n, double (*f)(double)) {
    SampledPath p;
    p.grid = SamplingGrid::make(T, n);
    p.values.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) p.values[i] = f(p.grid.time_at(i));
    return p;
}

}  // namespace

TEST_CASE("sampling grid invariants") {
    const SamplingGrid g = SamplingGrid::make(504.0, 19656);
    CHECK(g.delta_days == Catch::Approx(600.0 / 23400.0).epsilon(1e-14));
    CHECK(std::fabs(g.delta_days * static_cast<double>(g.n) - g.horizon_days) < 1e-12 * g.horizon_days);
    CHECK_THROWS_AS(SamplingGrid::make(1.0, 1), ConfigError);
    CHECK_THROWS_AS(SamplingGrid::make(-1.0, 10), ConfigError);
}

TEST_CASE("subsample keeps every m-th point") {
    auto p = make_path(504.0, 19656, [](double t) { return t * t; });

    SECTION("m = 1 is the identity") {
        const SampledPath q = subsample(p, 1);
        CHECK(q.values == p.values);
        CHECK(q.grid.n == p.grid.n);
    }
    SECTION("ten-minute bars to daily observations") {
        const SampledPath q = subsample(p, 39);
        CHECK(q.grid.n == 504);
        CHECK(q.grid.horizon_days == Catch::Approx(504.0));
        CHECK(q.values[1] == p.values[39]);
    }
    SECTION("ten-minute bars to two-day observations") {
        CHECK(subsample(p, 78).grid.n == 252);
    }
    SECTION("non-divisor rejected") {
        SampledPath small = make_path(1.0, 10, [](double t) { return t; });
        CHECK_THROWS_AS(subsample(small, 7), ConfigError);
    }
    SECTION("composition equals one-shot subsampling") {
        const SampledPath a = subsample(subsample(p, 3), 13);
        const SampledPath b = subsample(p, 39);
        CHECK(a.values == b.values);
        CHECK(a.grid.n == b.grid.n);
    }
}

TEST_CASE("pair_align checks grid compatibility") {
    auto x = make_path(10.0, 100, [](double t) { return t; });
    auto y = make_path(10.0, 100, [](double t) { return 2.0 * t; });
    CHECK_NOTHROW(pair_align(x, y));

    SECTION("n mismatch") {
        auto y2 = make_path(10.0, 101, [](double t) { return t; });
        CHECK_THROWS_AS(pair_align(x, y2), DataError);
    }
    SECTION("tiny relative delta difference passes") {
        auto y3 = y;
        y3.grid.delta_days *= 1.0 + 1e-15;
        CHECK_NOTHROW(pair_align(x, y3));
    }
    SECTION("non-finite value rejected") {
        auto y4 = y;
        y4.values[5] = std::nan("");
        CHECK_THROWS_AS(pair_align(x, y4), DataError);
    }
}

TEST_CASE("ingest parses, filters and sorts ticks") {
    SECTION("three valid rows") {
        std::istringstream in(
            "timestamp,price\n"
            "2012-01-03T09:30:00,10.0\n"
            "2012-01-03T09:40:00,10.5\n"
            "2012-01-03T09:50:00,10.25\n");
        const TickSeries t = ingest_csv(in);
        REQUIRE(t.size() == 3);
        CHECK(t.prices[2] == 10.25);
        CHECK(t.timestamps[1] - t.timestamps[0] == Catch::Approx(600.0));
    }
    SECTION("epoch-second timestamps") {
        std::istringstream in("timestamp,price\n86400034200,3.5\n");
        // value is within session hours of some day on the epoch clock
        const TickSeries t = ingest_csv(in);
        CHECK(t.prices[0] == 3.5);
    }
    SECTION("rows out of order are sorted") {
        std::istringstream in(
            "timestamp,price\n"
            "2012-01-03T10:30:00,2\n"
            "2012-01-03T09:30:00,1\n");
        const TickSeries t = ingest_csv(in);
        CHECK(t.prices.front() == 1.0);
        CHECK(t.prices.back() == 2.0);
    }
    SECTION("duplicate timestamps collapse to the last price") {
        std::istringstream in(
            "timestamp,price\n"
            "2012-01-03T09:30:00,1\n"
            "2012-01-03T09:30:00,7\n");
        const TickSeries t = ingest_csv(in);
        REQUIRE(t.size() == 1);
        CHECK(t.prices[0] == 7.0);
    }
    SECTION("non-positive price is a data error") {
        std::istringstream in("timestamp,price\n2012-01-03T09:30:00,-1.0\n");
        CHECK_THROWS_AS(ingest_csv(in), DataError);
    }
    SECTION("malformed row reports its line number") {
        std::istringstream in("timestamp,price\n2012-01-03T09:30:00,1.0\nnot-a-time,2.0\n");
        try {
            ingest_csv(in);
            FAIL("expected a parse error");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SECTION("empty after session filter") {
        std::istringstream in("timestamp,price\n2012-01-03T03:00:00,1.0\n");
        CHECK_THROWS_AS(ingest_csv(in), DataError);
    }
    SECTION("iso and epoch agree") {
        double iso = 0.0, num = 0.0;
        REQUIRE(detail::parse_timestamp("1970-01-02T00:00:00", iso));
        REQUIRE(detail::parse_timestamp("86400", num));
        CHECK(iso == num);
    }
}

TEST_CASE("previous-tick resampling") {
    const SamplingGrid grid = SamplingGrid::make(1.0, 39);  // one day of 10-minute bars

    SECTION("constant price gives a constant log path") {
        std::istringstream in("timestamp,price\n2012-01-03T09:30:00,100\n2012-01-03T12:00:00,100\n");
        const TickSeries t = ingest_csv(in);
        const SampledPath p = resample_previous_tick(t, grid);
        for (double v : p.values) CHECK(v == Catch::Approx(std::log(100.0)).epsilon(1e-15));
    }
    SECTION("one tick before the grid carries forward") {
        std::istringstream in("timestamp,price\n2012-01-03T09:30:00,42\n");
        const SampledPath p = resample_previous_tick(ingest_csv(in), grid);
        CHECK(p.values.back() == Catch::Approx(std::log(42.0)));
    }
    SECTION("ticks exactly on grid points reproduce prices") {
        std::ostringstream src;
        src << "timestamp,price\n";
        for (int i = 0; i <= 39; ++i) src << 34200 + i * 600 << "," << (100.0 + i) << "\n";
        std::istringstream in(src.str());
        const SampledPath p = resample_previous_tick(ingest_csv(in), grid);
        for (std::size_t i = 0; i <= 39; ++i)
            CHECK(p.values[i] == Catch::Approx(std::log(100.0 + static_cast<double>(i))).epsilon(1e-14));
    }
    SECTION("no tick at or before the start is a coverage error") {
        std::istringstream in("timestamp,price\n2012-01-03T09:35:00,42\n");
        CHECK_THROWS_AS(resample_previous_tick(ingest_csv(in), grid), DataError);
    }
    SECTION("idempotent on data already on the grid") {
        std::ostringstream src;
        src << "timestamp,price\n";
        for (int i = 0; i <= 39; ++i) src << 34200 + i * 600 << "," << (10.0 + 0.1 * i) << "\n";
        std::istringstream in1(src.str());
        const SampledPath p1 = resample_previous_tick(ingest_csv(in1), grid);
        // feed the sampled values back in as ticks on the same grid
        std::ostringstream src2;
        src2 << "timestamp,price\n";
        for (std::size_t i = 0; i <= 39; ++i)
            src2.precision(17), src2 << 34200 + i * 600 << "," << std::exp(p1.values[i]) << "\n";
        std::istringstream in2(src2.str());
        const SampledPath p2 = resample_previous_tick(ingest_csv(in2), grid);
        for (std::size_t i = 0; i <= 39; ++i) CHECK(p2.values[i] == Catch::Approx(p1.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("path csv round trip is bit exact") {
    auto p = make_path(5.0, 50, [](double t) { return std::sin(t) + 3.0; });
    std::ostringstream out;
    write_path_csv(out, p);
    std::istringstream in(out.str());
    const SampledPath q = read_path_csv(in);
    REQUIRE(q.values.size() == p.values.size());
    for (std::size_t i = 0; i < p.values.size(); ++i) CHECK(q.values[i] == p.values[i]);
}

TEST_CASE("pair csv round trip is bit exact") {
    auto x = make_path(5.0, 50, [](double t) { return std::cos(t); });
    auto y = make_path(5.0, 50, [](double t) { return 2.0 * std::cos(t) + 1.0; });
    const PairSeries pair = pair_align(x, y);
    std::ostringstream out;
    write_pair_csv(out, pair);
    std::istringstream in(out.str());
    const PairSeries q = read_pair_csv(in);
    CHECK(q.x.values == pair.x.values);
    CHECK(q.y.values == pair.y.values);
}
