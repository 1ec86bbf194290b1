#include <catch2/catch_amalgamated.hpp>

#include "steamflex/economics.hpp"

using namespace steamflex;

namespace {
const std::int64_t kStart = parse_iso8601_utc("2024-01-01T00:00:00Z");

Scenario scenario_with(std::vector<double> spot, std::vector<double> fcr_price,
                       std::vector<double> demand, double c_ec, double c_pc) {
    TariffSchedule tariff;
    tariff.volumetric_eur_per_kwh = c_ec;
    tariff.capacity_eur_per_kw_month = c_pc;
    const std::size_t n = spot.size();
    auto mk = [&](std::vector<double> v, const char* u) {
        return TimeSeries(kStart, 3600.0, std::move(v), u);
    };
    FcrMarket fcr{mk(std::move(fcr_price), "EUR/kW"), std::vector<std::uint8_t>(n, 1), 1.0, 0};
    return assemble_scenario(mk(std::move(spot), "EUR/kWh"), tariff, std::move(fcr),
                             mk(std::move(demand), "kg/s"));
}
}  // namespace

TEST_CASE("investment cost anchors from the reference cost table") {
    InvestmentModel model;
    SECTION("electrode boiler power law") {
        SystemConfig c{1644.0e3, 0, 0, 0, 283.0};
        CHECK(investment_cost(c, model).boiler_eur == Catch::Approx(215.0e3).epsilon(0.01));
        c.p_eb_max_w = 1702.0e3;
        CHECK(investment_cost(c, model).boiler_eur == Catch::Approx(220.0e3).epsilon(0.01));
        c.p_eb_max_w = 1413.0e3;
        CHECK(investment_cost(c, model).boiler_eur == Catch::Approx(193.0e3).epsilon(0.01));
        c.p_eb_max_w = 1608.0e3;
        CHECK(investment_cost(c, model).boiler_eur == Catch::Approx(212.0e3).epsilon(0.01));
    }
    SECTION("steam accumulator power law") {
        SystemConfig c{0, 438.0, 0, 0, 283.0};
        CHECK(investment_cost(c, model).accumulator_eur == Catch::Approx(87.0e3).epsilon(0.01));
        c.m_sa_max_kg = 2125.0;
        CHECK(investment_cost(c, model).accumulator_eur ==
              Catch::Approx(390.0e3).epsilon(0.01));
    }
    SECTION("zero sizes cost zero") {
        SystemConfig c{0, 0, 0, 0, 283.0};
        const auto inv = investment_cost(c, model);
        CHECK(inv.boiler_eur == 0.0);
        CHECK(inv.accumulator_eur == 0.0);
        CHECK(inv.bess_eur == 0.0);
        CHECK(inv.total_eur == 0.0);
    }
    SECTION("bess cost uses capacity and c-rate exponents") {
        SystemConfig c{0, 0, 1000.0e3, 1.0, 283.0};  // 1 MWh at 1C
        CHECK(investment_cost(c, model).bess_eur == Catch::Approx(433.0e3).epsilon(1e-9));
        c.c_rate_per_h = 0.5;
        // gamma^0.005 at 0.5 is a slight discount
        CHECK(investment_cost(c, model).bess_eur ==
              Catch::Approx(433.0e3 * std::pow(0.5, 0.005)).epsilon(1e-9));
    }
    SECTION("cost factors scale each technology") {
        InvestmentModel m2 = model;
        m2.f_sa = 0.6;
        m2.f_b = 2.0;
        SystemConfig c{1000.0e3, 1000.0, 500.0e3, 0.9, 283.0};
        const auto base = investment_cost(c, model);
        const auto mod = investment_cost(c, m2);
        CHECK(mod.boiler_eur == Catch::Approx(base.boiler_eur));
        CHECK(mod.accumulator_eur == Catch::Approx(0.6 * base.accumulator_eur));
        CHECK(mod.bess_eur == Catch::Approx(2.0 * base.bess_eur));
    }
}

TEST_CASE("investment cost is monotone and shows economy of scale") {
    InvestmentModel model;
    double prev_total = 0, prev_specific = 1e18;
    for (double kg : {100.0, 300.0, 1000.0, 3000.0, 10000.0}) {
        SystemConfig c{0, kg, 0, 0, 283.0};
        const double cost = investment_cost(c, model).accumulator_eur;
        CHECK(cost > prev_total);
        CHECK(cost / kg < prev_specific);
        prev_total = cost;
        prev_specific = cost / kg;
    }
}

TEST_CASE("tariff cross-checks at the reference peak and energy") {
    // capacity: 1063 kW peak for a year
    CHECK(1063.0 * 4.386 * 12 == Catch::Approx(56.0e3).epsilon(0.01));
    CHECK(1063.0 * 32.11 * 12 == Catch::Approx(410.0e3).epsilon(0.01));
    // volumetric: 4.37 GWh of imports
    CHECK(4.37e6 * 0.03612 == Catch::Approx(158.0e3).epsilon(0.01));
}

TEST_CASE("cost breakdown agrees with the LP objective term by term") {
    auto sc = scenario_with({0.05, 0.09, 0.02, 0.07}, {0.02, 0.0, 0.03, 0.01},
                            {0.12, 0.25, 0.08, 0.2}, 0.02, 3.0);
    SystemConfig cfg{2.0e6, 700.0, 0.0, 0.0, 283.0};
    auto r = solve_dispatch(sc, cfg, SteamSystemParams{}, BatteryParams{});
    REQUIRE(r.status == DispatchStatus::Optimal);
    const auto c = cost_breakdown(r, sc);
    CHECK(c.net_energy_cost_eur() ==
          Catch::Approx(r.objective_eur).epsilon(1e-6));
    CHECK(c.initial_charge_eur == Catch::Approx(r.initial_charge_cost_eur));
    CHECK(c.spot_eur > 0);
    CHECK(c.capacity_eur > 0);
    CHECK(c.fcr_profit_eur >= 0);

    // capacity term reproduces months * c_pc * peak
    CHECK(c.capacity_eur ==
          Catch::Approx(12.0 * 3.0 * r.peak_grid_power_w / 1000.0).epsilon(1e-9));
}

TEST_CASE("cost breakdown of a zero-price scenario is all zeros") {
    auto sc = scenario_with({0, 0, 0}, {0, 0, 0}, {0.1, 0.1, 0.1}, 0.0, 0.0);
    SystemConfig cfg{1.5e6, 0.0, 0.0, 0.0, 283.0};
    auto r = solve_dispatch(sc, cfg, SteamSystemParams{}, BatteryParams{});
    REQUIRE(r.status == DispatchStatus::Optimal);
    const auto c = cost_breakdown(r, sc);
    CHECK(c.spot_eur == Catch::Approx(0.0).margin(1e-9));
    CHECK(c.volumetric_eur == 0.0);
    CHECK(c.capacity_eur == 0.0);
    CHECK(c.initial_charge_eur == 0.0);
    CHECK(c.fcr_profit_eur == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("npv") {
    SECTION("one year, no discounting") {
        CostBreakdown annual;
        annual.spot_eur = 100.0;  // C_E = 100, flows = -100
        NpvParams p;
        p.discount_rate = 0.0;
        p.lifetime_years = 1;
        p.maintenance_fraction = 0.0;
        p.year_index_start = 1;
        CHECK(npv(annual, 50.0, p) == Catch::Approx(-150.0));
    }
    SECTION("zero everything") {
        CostBreakdown annual;
        NpvParams p;
        CHECK(npv(annual, 0.0, p) == Catch::Approx(0.0));
    }
    SECTION("doubling cash flows doubles npv plus investment") {
        CostBreakdown annual;
        annual.spot_eur = 200.0;
        annual.fcr_profit_eur = 40.0;
        NpvParams p;
        const double n1 = npv(annual, 100.0, p);
        CostBreakdown doubled = annual;
        doubled.spot_eur *= 2;
        doubled.fcr_profit_eur *= 2;
        NpvParams p0 = p;
        p0.maintenance_fraction = 0.0;
        const double base1 = npv(annual, 0.0, p0);
        const double base2 = npv(doubled, 0.0, p0);
        CHECK(base2 == Catch::Approx(2.0 * base1).epsilon(1e-12));
        (void)n1;
    }
    SECTION("year zero start includes an undiscounted term") {
        CostBreakdown annual;
        annual.spot_eur = 100.0;
        NpvParams p;
        p.discount_rate = 0.05;
        p.lifetime_years = 15;
        p.maintenance_fraction = 0.0;
        p.year_index_start = 0;
        NpvParams p1 = p;
        p1.year_index_start = 1;
        CHECK(npv(annual, 0.0, p) == Catch::Approx(npv(annual, 0.0, p1) - 100.0));
    }
    SECTION("npv decreases with the discount rate for cost-dominated flows") {
        CostBreakdown annual;
        annual.spot_eur = 500.0;
        annual.fcr_profit_eur = 100.0;  // net annual flow -400
        NpvParams p;
        double prev = -1e18;
        for (double r : {0.0, 0.02, 0.05, 0.1, 0.2}) {
            p.discount_rate = r;
            const double v = npv(annual, 1000.0, p);
            CHECK(v > prev);  // less negative as r grows: |NPV| decreases
            prev = v;
        }
    }
    SECTION("delta npv") {
        CHECK(delta_npv(5.0, 5.0) == 0.0);
        CHECK(delta_npv(-100.0, -150.0) == Catch::Approx(50.0));
    }
}

TEST_CASE("npv parameter validation") {
    NpvParams p;
    p.discount_rate = 1.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = NpvParams{};
    p.lifetime_years = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = NpvParams{};
    p.year_index_start = 2;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
