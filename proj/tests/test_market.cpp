#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "steamflex/market.hpp"

using namespace steamflex;

namespace {
const std::int64_t kStart = parse_iso8601_utc("2024-01-01T00:00:00Z");

TimeSeries series(std::size_t n, double v, const char* unit, double dt = 3600.0,
                  std::int64_t start = kStart) {
    return TimeSeries(start, dt, std::vector<double>(n, v), unit);
}

Scenario tiny_scenario(std::size_t n = 48) {
    TariffSchedule tariff;
    tariff.volumetric_eur_per_kwh = 0.03;
    tariff.capacity_eur_per_kw_month = 4.0;
    auto fcr = FcrMarket::with_random_acceptance(series(n, 0.02, "EUR/kW"), 0.5, 7);
    return assemble_scenario(series(n, 0.05, "EUR/kWh"), tariff, std::move(fcr),
                             series(n, 0.15, "kg/s"));
}
}  // namespace

TEST_CASE("acceptance mask has an exact accepted count and is deterministic") {
    SECTION("all or nothing") {
        auto all = build_acceptance_mask(100, 1.0, 1);
        auto none = build_acceptance_mask(100, 0.0, 1);
        CHECK(std::count(all.begin(), all.end(), 1) == 100);
        CHECK(std::count(none.begin(), none.end(), 1) == 0);
    }
    SECTION("same seed, same mask") {
        auto a = build_acceptance_mask(8784, 0.5, 123456);
        auto b = build_acceptance_mask(8784, 0.5, 123456);
        CHECK(a == b);
        auto c = build_acceptance_mask(8784, 0.5, 123457);
        CHECK(a != c);
    }
    SECTION("exact count over a grid of fractions and lengths") {
        for (std::size_t n : {1ul, 7ul, 100ul, 8784ul})
            for (double f : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0}) {
                auto m = build_acceptance_mask(n, f, 99);
                const auto want = static_cast<long>(std::llround(f * static_cast<double>(n)));
                CHECK(std::count(m.begin(), m.end(), 1) == want);
            }
    }
}

TEST_CASE("fcr market zeroes unaccepted hours") {
    auto fcr = FcrMarket::with_random_acceptance(series(10, 0.5, "EUR/kW"), 0.5, 3);
    int zeros = 0;
    for (std::size_t i = 0; i < 10; ++i) {
        if (fcr.effective_price(i) == 0.0) ++zeros;
        else CHECK(fcr.effective_price(i) == 0.5);
    }
    CHECK(zeros == 5);
}

TEST_CASE("assemble_scenario validates alignment and polarity") {
    SECTION("aligned inputs produce a scenario") {
        const auto s = tiny_scenario();
        CHECK(s.horizon_steps == 48);
        CHECK(s.dt_s == 3600.0);
        CHECK(s.dt_hours() == Catch::Approx(1.0));
        CHECK(s.mean_spot_plus_volumetric() == Catch::Approx(0.08));
    }
    SECTION("short spot series is named with both lengths") {
        TariffSchedule tariff;
        auto fcr = FcrMarket::with_random_acceptance(series(48, 0.02, "EUR/kW"), 1.0, 1);
        try {
            assemble_scenario(series(47, 0.05, "EUR/kWh"), tariff, std::move(fcr),
                              series(48, 0.15, "kg/s"));
            FAIL("expected ScenarioValidationError");
        } catch (const ScenarioValidationError& e) {
            bool mentions = false;
            for (const auto& m : e.issues())
                if (m.find("47") != std::string::npos && m.find("48") != std::string::npos)
                    mentions = true;
            CHECK(mentions);
        }
    }
    SECTION("negative demand names the step") {
        TariffSchedule tariff;
        auto fcr = FcrMarket::with_random_acceptance(series(4, 0.0, "EUR/kW"), 0.0, 1);
        std::vector<double> d{0.1, 0.1, -1.0, 0.1};
        try {
            assemble_scenario(series(4, 0.05, "EUR/kWh"), tariff, std::move(fcr),
                              TimeSeries(kStart, 3600.0, d, "kg/s"));
            FAIL("expected ScenarioValidationError");
        } catch (const ScenarioValidationError& e) {
            bool mentions = false;
            for (const auto& m : e.issues())
                if (m.find("step 2") != std::string::npos) mentions = true;
            CHECK(mentions);
        }
    }
    SECTION("every single corrupted field is caught") {
        TariffSchedule tariff;
        tariff.volumetric_eur_per_kwh = 0.03;

        // wrong dt
        CHECK_THROWS_AS(
            assemble_scenario(series(48, 0.05, "EUR/kWh"), tariff,
                              FcrMarket::with_random_acceptance(
                                  series(48, 0.02, "EUR/kW", 1800.0), 0.5, 7),
                              series(48, 0.15, "kg/s")),
            ScenarioValidationError);
        // wrong start
        CHECK_THROWS_AS(
            assemble_scenario(series(48, 0.05, "EUR/kWh"), tariff,
                              FcrMarket::with_random_acceptance(
                                  series(48, 0.02, "EUR/kW", 3600.0, kStart + 3600), 0.5, 7),
                              series(48, 0.15, "kg/s")),
            ScenarioValidationError);
        // negative tariff
        TariffSchedule bad = tariff;
        bad.volumetric_eur_per_kwh = -0.01;
        CHECK_THROWS_AS(
            assemble_scenario(series(48, 0.05, "EUR/kWh"), bad,
                              FcrMarket::with_random_acceptance(series(48, 0.02, "EUR/kW"),
                                                                0.5, 7),
                              series(48, 0.15, "kg/s")),
            ScenarioValidationError);
        // mask length mismatch
        auto fcr = FcrMarket::with_random_acceptance(series(48, 0.02, "EUR/kW"), 0.5, 7);
        fcr.acceptance.pop_back();
        CHECK_THROWS_AS(assemble_scenario(series(48, 0.05, "EUR/kWh"), tariff, std::move(fcr),
                                          series(48, 0.15, "kg/s")),
                        ScenarioValidationError);
    }
    SECTION("aggregated error lists all violations at once") {
        TariffSchedule tariff;
        tariff.capacity_eur_per_kw_month = -1;  // violation 1
        auto fcr = FcrMarket::with_random_acceptance(series(40, 0.02, "EUR/kW"), 0.5, 7);
        // violation 2: fcr length != spot length; violation 3: negative demand
        std::vector<double> d(48, 0.2);
        d[5] = -0.5;
        try {
            assemble_scenario(series(48, 0.05, "EUR/kWh"), tariff, std::move(fcr),
                              TimeSeries(kStart, 3600.0, d, "kg/s"));
            FAIL("expected ScenarioValidationError");
        } catch (const ScenarioValidationError& e) {
            CHECK(e.issues().size() >= 3);
        }
    }
}

TEST_CASE("volumetric tariff as a series") {
    TariffSchedule tariff;
    std::vector<double> v(24, 0.01);
    v[12] = 0.05;
    tariff.volumetric_series = TimeSeries(kStart, 3600.0, v, "EUR/kWh");
    auto fcr = FcrMarket::with_random_acceptance(series(24, 0.0, "EUR/kW"), 0.0, 1);
    const auto s = assemble_scenario(series(24, 0.05, "EUR/kWh"), tariff, std::move(fcr),
                                     series(24, 0.15, "kg/s"));
    CHECK(s.tariff.volumetric_at(0) == 0.01);
    CHECK(s.tariff.volumetric_at(12) == 0.05);
}
