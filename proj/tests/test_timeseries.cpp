#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "steamflex/csv.hpp"
#include "steamflex/timeseries.hpp"

using namespace steamflex;

namespace {
const std::int64_t kStart = parse_iso8601_utc("2024-01-01T00:00:00Z");  // a Monday

TimeSeries make(std::vector<double> v, double dt = 3600.0) {
    return TimeSeries(kStart, dt, std::move(v), "kg/s");
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = (std::filesystem::temp_directory_path() /
                ("steamflex_ts_" + std::to_string(counter++) + ".csv"))
                   .string();
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};
}  // namespace

TEST_CASE("TimeSeries construction guards") {
    CHECK_THROWS_AS(TimeSeries(0, 0.0, {1.0}, "W"), std::invalid_argument);
    CHECK_THROWS_AS(TimeSeries(0, 3600.0, {}, "W"), std::invalid_argument);
    CHECK_THROWS_AS(TimeSeries(0, 3600.0, {std::nan("")}, "W"), std::invalid_argument);
    const auto ts = make({1, 2, 3});
    CHECK(ts.unit() == "kg/s");
    CHECK(ts.mean() == Catch::Approx(2.0));
    CHECK(ts.integral() == Catch::Approx(6.0 * 3600.0));
}

TEST_CASE("resample_mean") {
    SECTION("quarter-hourly to hourly") {
        const TimeSeries ts(kStart, 900.0, {1, 2, 3, 4}, "W");
        const auto out = resample_mean(ts, 3600.0);
        REQUIRE(out.size() == 1);
        CHECK(out[0] == Catch::Approx(2.5));
        CHECK(out.integral() == Catch::Approx(ts.integral()).epsilon(1e-12));
    }
    SECTION("constants are idempotent") {
        const TimeSeries ts(kStart, 60.0, std::vector<double>(120, 7.25), "W");
        const auto out = resample_mean(ts, 3600.0);
        REQUIRE(out.size() == 2);
        CHECK(out[0] == Catch::Approx(7.25));
        CHECK(out[1] == Catch::Approx(7.25));
    }
    SECTION("integral preserved on irregular data") {
        std::vector<double> v(96 * 60);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = 0.5 + 0.3 * std::sin(static_cast<double>(i) / 17.0) +
                   0.2 * ((i / 97) % 2 ? 1 : -1);
        const TimeSeries ts(kStart, 60.0, v, "kg/s");
        const auto out = resample_mean(ts, 3600.0);
        REQUIRE(out.size() == 96);
        CHECK(out.integral() == Catch::Approx(ts.integral()).epsilon(1e-12));
    }
    SECTION("errors") {
        const TimeSeries ts(kStart, 900.0, {1, 2, 3, 4, 5}, "W");
        CHECK_THROWS_AS(resample_mean(ts, 2000.0), std::invalid_argument);  // not a multiple
        CHECK_THROWS_AS(resample_mean(ts, 3600.0), std::invalid_argument);  // 5 % 4 != 0
    }
}

TEST_CASE("extend_periodic") {
    const auto ts = make({1, 2});
    const auto out = extend_periodic(ts, 5);
    CHECK(out.values() == std::vector<double>{1, 2, 1, 2, 1});
    const auto same = extend_periodic(ts, 2);
    CHECK(same.values() == ts.values());

    // periodicity far out: hour 96+k equals hour k
    std::vector<double> prof(96);
    for (std::size_t i = 0; i < 96; ++i) prof[i] = static_cast<double>(i % 13) * 0.1;
    const auto ext = extend_periodic(make(prof), 8784);
    for (std::size_t k : {0ul, 17ul, 95ul})
        CHECK(ext[96 + k] == ext[k]);
}

TEST_CASE("apply_weekend_scaling") {
    SECTION("factor one is the identity") {
        const auto ts = make(std::vector<double>(24 * 14, 1.0));
        const auto out = apply_weekend_scaling(ts, 1.0, Weekday::Monday);
        CHECK(out.values() == ts.values());
    }
    SECTION("weekend hours of a Monday-anchored week are scaled") {
        const auto ts = make(std::vector<double>(24 * 7, 1.0));
        const auto out = apply_weekend_scaling(ts, 0.25, Weekday::Monday);
        // Mon 2024-01-01 .. Fri are hours 0..119, Sat 2024-01-06 starts at 120
        CHECK(out[119] == 1.0);
        CHECK(out[120] == 0.25);
        CHECK(out[24 * 7 - 1] == 0.25);
        const double weekly_mean = out.mean();
        CHECK(weekly_mean == Catch::Approx((5.0 + 2.0 * 0.25) / 7.0));
    }
    SECTION("anchoring respects the time of day of the series start") {
        // start Monday 11:00; Saturday begins after 4*24 + 13 = 109 steps
        const TimeSeries ts(kStart + 11 * 3600, 3600.0, std::vector<double>(24 * 7, 1.0),
                            "kg/s");
        const auto out = apply_weekend_scaling(ts, 0.0, Weekday::Monday);
        CHECK(out[108] == 1.0);
        CHECK(out[109] == 0.0);
    }
    SECTION("dt must divide a day") {
        const TimeSeries ts(kStart, 7000.0, std::vector<double>(10, 1.0), "kg/s");
        CHECK_THROWS_AS(apply_weekend_scaling(ts, 0.5, Weekday::Monday),
                        std::invalid_argument);
    }
}

TEST_CASE("convert_currency") {
    const TimeSeries nok(kStart, 3600.0, {1.0, 2.0}, "NOK/kWh");
    const auto eur = convert_currency(nok, 0.086, "EUR/kWh");
    CHECK(eur[0] == Catch::Approx(0.086));
    CHECK(eur.unit() == "EUR/kWh");
    const auto id = convert_currency(nok, 1.0, "NOK/kWh");
    CHECK(id.values() == nok.values());
    const auto back = convert_currency(eur, 1.0 / 0.086, "NOK/kWh");
    for (std::size_t i = 0; i < back.size(); ++i)
        CHECK(back[i] == Catch::Approx(nok[i]).epsilon(1e-12));
    CHECK_THROWS_AS(convert_currency(nok, 0.0, "EUR/kWh"), std::invalid_argument);
}

TEST_CASE("load_timeseries reads the canonical schema") {
    SECTION("two rows, hourly") {
        TempFile f("timestamp,value\n2024-01-01T00:00:00Z,1.0\n2024-01-01T01:00:00Z,2.0\n");
        const auto ts = load_timeseries(f.path, "EUR/kWh");
        REQUIRE(ts.size() == 2);
        CHECK(ts.dt() == 3600.0);
        CHECK(ts[1] == 2.0);
        CHECK(ts.unit() == "EUR/kWh");
    }
    SECTION("extra columns are tolerated and selected by name") {
        TempFile f(
            "region,timestamp,price\nNO3,2024-01-01T00:00:00Z,5\nNO3,2024-01-01T01:00:00Z,6\n");
        ColumnSpec cols;
        cols.value = "price";
        const auto ts = load_timeseries(f.path, "EUR/kWh", cols);
        CHECK(ts[0] == 5.0);
    }
    SECTION("a missing hour is a named gap") {
        TempFile f(
            "timestamp,value\n2024-01-01T00:00:00Z,1\n2024-01-01T01:00:00Z,2\n"
            "2024-01-01T03:00:00Z,3\n");
        CHECK_THROWS_WITH(load_timeseries(f.path, "W"),
                          Catch::Matchers::ContainsSubstring("gap between") &&
                              Catch::Matchers::ContainsSubstring("T01:00:00Z"));
    }
    SECTION("malformed value carries the line number") {
        TempFile f("timestamp,value\n2024-01-01T00:00:00Z,1\n2024-01-01T01:00:00Z,oops\n");
        CHECK_THROWS_WITH(load_timeseries(f.path, "W"),
                          Catch::Matchers::ContainsSubstring(":3:"));
    }
    SECTION("duplicate and non-monotone timestamps are rejected") {
        TempFile f1("timestamp,value\n2024-01-01T00:00:00Z,1\n2024-01-01T00:00:00Z,2\n");
        CHECK_THROWS_WITH(load_timeseries(f1.path, "W"),
                          Catch::Matchers::ContainsSubstring("duplicate"));
        TempFile f2(
            "timestamp,value\n2024-01-01T02:00:00Z,1\n2024-01-01T01:00:00Z,2\n");
        CHECK_THROWS_WITH(load_timeseries(f2.path, "W"),
                          Catch::Matchers::ContainsSubstring("not strictly increasing"));
    }
    SECTION("missing file names the path") {
        CHECK_THROWS_WITH(load_timeseries("/nonexistent/nope.csv", "W"),
                          Catch::Matchers::ContainsSubstring("/nonexistent/nope.csv"));
    }
    SECTION("save/load round trip") {
        const auto ts = make({0.25, 0.5, 0.75});
        TempFile f("");
        save_timeseries(f.path, ts);
        const auto back = load_timeseries(f.path, "kg/s");
        REQUIRE(back.size() == 3);
        CHECK(back.start() == ts.start());
        CHECK(back.dt() == ts.dt());
        for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == ts[i]);
    }
}
