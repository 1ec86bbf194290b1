#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "steamflex/search.hpp"

using namespace steamflex;

namespace {
const std::int64_t kStart = parse_iso8601_utc("2024-01-01T00:00:00Z");

Scenario small_scenario(std::size_t n = 48) {
    std::vector<double> spot(n), fcr(n), demand(n);
    for (std::size_t t = 0; t < n; ++t) {
        spot[t] = 0.04 + 0.03 * std::sin(static_cast<double>(t) * 0.7);
        fcr[t] = 0.015 + 0.01 * std::cos(static_cast<double>(t) * 0.3);
        demand[t] = 0.15 + 0.1 * std::sin(static_cast<double>(t) * 2.0 * 3.14159 / 24.0);
    }
    TariffSchedule tariff;
    tariff.volumetric_eur_per_kwh = 0.02;
    tariff.capacity_eur_per_kw_month = 4.0;
    auto mk = [&](std::vector<double> v, const char* u) {
        return TimeSeries(kStart, 3600.0, std::move(v), u);
    };
    auto fm = FcrMarket::with_random_acceptance(mk(std::move(fcr), "EUR/kW"), 0.5, 11);
    return assemble_scenario(mk(std::move(spot), "EUR/kWh"), tariff, std::move(fm),
                             mk(std::move(demand), "kg/s"));
}

SizingContext make_ctx(const Scenario& sc) {
    SizingContext ctx;
    ctx.scenario = &sc;
    ctx.jobs = 2;
    return ctx;
}
}  // namespace

TEST_CASE("differential evolution on the sphere function") {
    auto sphere = [](const std::vector<double>& x) {
        double s = 0;
        for (double v : x) s += v * v;
        return s;
    };
    DeParams p;
    p.population = 32;
    p.max_generations = 200;
    p.seed = 5;
    auto res = differential_evolution(sphere, {{-5, 5}, {-5, 5}, {-5, 5}, {-5, 5}}, p);
    CHECK(res.best_value < 1e-6);
    for (double v : res.best_point) CHECK(std::abs(v) < 1e-2);
}

TEST_CASE("differential evolution trace is non-increasing and seeded runs repeat") {
    auto rosen = [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
    };
    DeParams p;
    p.population = 24;
    p.max_generations = 80;
    p.seed = 42;
    auto r1 = differential_evolution(rosen, {{-2, 2}, {-2, 2}}, p);
    auto r2 = differential_evolution(rosen, {{-2, 2}, {-2, 2}}, p);
    CHECK(r1.best_value == r2.best_value);
    CHECK(r1.best_point == r2.best_point);
    CHECK(r1.trace == r2.trace);
    for (std::size_t i = 1; i < r1.trace.size(); ++i) CHECK(r1.trace[i] <= r1.trace[i - 1]);

    p.seed = 43;
    auto r3 = differential_evolution(rosen, {{-2, 2}, {-2, 2}}, p);
    CHECK(r3.trace != r1.trace);  // different seed explores differently
    (void)r3;
}

TEST_CASE("differential evolution respects parallel evaluation determinism") {
    auto f = [](const std::vector<double>& x) {
        return std::abs(x[0] - 1.5) + std::abs(x[1] + 0.5);
    };
    DeParams serial;
    serial.population = 16;
    serial.max_generations = 40;
    serial.seed = 9;
    serial.jobs = 1;
    DeParams parallel = serial;
    parallel.jobs = 4;
    auto a = differential_evolution(f, {{-3, 3}, {-3, 3}}, serial);
    auto b = differential_evolution(f, {{-3, 3}, {-3, 3}}, parallel);
    CHECK(a.trace == b.trace);
    CHECK(a.best_point == b.best_point);
}

TEST_CASE("differential evolution edge cases") {
    auto flat = [](const std::vector<double>&) { return 7.0; };
    DeParams p;
    p.population = 8;
    p.max_generations = 10;
    auto r = differential_evolution(flat, {{0, 1}}, p);
    CHECK(r.best_value == 7.0);
    for (double v : r.trace) CHECK(v == 7.0);

    p.population = 3;
    CHECK_THROWS_AS(differential_evolution(flat, {{0, 1}}, p), std::invalid_argument);
}

TEST_CASE("optimize_reference finds the analytic optimum for flat data") {
    // flat demand, flat prices, no FCR: oversizing is pure loss, so the best
    // boiler is exactly the demand power
    const std::size_t n = 24;
    TariffSchedule tariff;
    auto mk = [&](std::vector<double> v, const char* u) {
        return TimeSeries(kStart, 3600.0, std::move(v), u);
    };
    auto fm = FcrMarket::with_random_acceptance(mk(std::vector<double>(n, 0.0), "EUR/kW"),
                                                0.0, 1);
    auto sc = assemble_scenario(mk(std::vector<double>(n, 0.05), "EUR/kWh"), tariff,
                                std::move(fm), mk(std::vector<double>(n, 0.2), "kg/s"));
    auto ctx = make_ctx(sc);
    const auto ref = optimize_reference(ctx, 100.0e3, 3000.0e3);
    const double expect_w = 0.2 * 2772.0 * 1000.0;
    CHECK(ref.config.p_eb_max_w == Catch::Approx(expect_w).epsilon(1e-3));
    CHECK(ref.config.m_sa_max_kg == 0.0);
    CHECK(ref.config.q_b_max_wh == 0.0);
}

TEST_CASE("grid search marks infeasible cells and zeroes the reference cell") {
    auto sc = small_scenario();
    auto ctx = make_ctx(sc);
    SearchSpace space;
    space.m_sa_kg = {0.0, 800.0, 3};
    space.p_eb_w = {400.0e3, 1600.0e3, 3};  // peak demand is ~0.25 kg/s = 693 kW
    space.q_b_wh = {0.0, 0.0, 1};
    space.c_rate = {0.0, 0.0, 1};
    auto res = grid_search(space, ctx);
    REQUIRE(res.cells.size() == 9);

    // the 400 kW boiler is below the mean demand power (~416 kW), so no
    // storage size can make it work: the whole column stays infeasible
    for (std::size_t im = 0; im < 3; ++im) {
        const auto& starved = res.cells[res.index(im, 0, 0, 0)];
        CHECK_FALSE(starved.feasible);
        CHECK(std::isnan(starved.delta_npv_eur));
    }

    // a no-storage cell can never beat the optimized reference
    for (std::size_t ip = 0; ip < 3; ++ip) {
        const auto& cell = res.cells[res.index(0, ip, 0, 0)];
        if (cell.feasible) CHECK(cell.delta_npv_eur <= 1e-6 * (1 + std::abs(cell.npv_eur)));
    }
}

TEST_CASE("grid search is invariant to the degree of parallelism") {
    auto sc = small_scenario();
    auto ctx1 = make_ctx(sc);
    ctx1.jobs = 1;
    auto ctx4 = make_ctx(sc);
    ctx4.jobs = 4;
    SearchSpace space;
    space.m_sa_kg = {0.0, 500.0, 2};
    space.p_eb_w = {700.0e3, 1400.0e3, 2};
    space.q_b_wh = {0.0, 100.0e3, 2};
    space.c_rate = {0.5, 0.5, 1};
    auto a = grid_search(space, ctx1);
    auto b = grid_search(space, ctx4);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].feasible == b.cells[i].feasible);
        if (a.cells[i].feasible)
            CHECK(a.cells[i].npv_eur == Catch::Approx(b.cells[i].npv_eur).epsilon(1e-9));
    }
}

TEST_CASE("two-stage sizing never falls behind the grid winner") {
    auto sc = small_scenario();
    auto ctx = make_ctx(sc);
    SearchSpace space;
    space.m_sa_kg = {0.0, 600.0, 3};
    space.p_eb_w = {700.0e3, 1500.0e3, 3};
    space.q_b_wh = {0.0, 0.0, 1};
    space.c_rate = {0.0, 0.0, 1};
    DeParams de;
    de.population = 12;
    de.max_generations = 15;
    de.seed = 3;
    auto res = two_stage_size(space, ctx, de);
    double grid_best = -kInf;
    for (const auto& c : res.grid.cells)
        if (c.feasible) grid_best = std::max(grid_best, c.npv_eur);
    CHECK(res.best.npv_eur >= grid_best - 1e-6 * (1 + std::abs(grid_best)));
    for (std::size_t i = 1; i < res.de.trace.size(); ++i)
        CHECK(res.de.trace[i] <= res.de.trace[i - 1]);
}

TEST_CASE("sensitivity sweep: unit factors reproduce the baseline; costly bess vanishes") {
    auto sc = small_scenario();
    auto ctx = make_ctx(sc);
    SearchSpace space;
    space.m_sa_kg = {0.0, 400.0, 2};
    space.p_eb_w = {700.0e3, 1400.0e3, 2};
    space.q_b_wh = {0.0, 200.0e3, 2};
    space.c_rate = {0.9, 0.9, 1};
    DeParams de;
    de.population = 8;
    de.max_generations = 8;
    de.seed = 21;

    const auto baseline = two_stage_size(space, ctx, de);
    auto cells = sensitivity_sweep(ctx, {1.0}, {1.0, 10.0}, space, de);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].best.npv_eur == Catch::Approx(baseline.best.npv_eur).epsilon(1e-9));
    // at 10x battery cost the optimum must drop the BESS entirely
    CHECK(cells[1].best.config.q_b_max_wh <= 1e-3 * space.q_b_wh.max);
    CHECK_THROWS_AS(sensitivity_sweep(ctx, {0.0}, {1.0}, space, de), std::invalid_argument);
}

TEST_CASE("preheat sweep improves NPV with hotter inlet water") {
    auto sc = small_scenario();
    auto ctx = make_ctx(sc);
    SystemConfig fixed{1200.0e3, 300.0, 0.0, 0.0, 283.0};
    auto res = preheat_sweep(ctx, {283.0, 323.0, 363.0}, PreheatAxis::AccumulatorCapacity,
                             {300.0}, fixed, 3000.0e3);
    REQUIRE(res.cells.size() == 3);
    REQUIRE(res.cells[0].feasible);
    REQUIRE(res.cells[2].feasible);
    CHECK(res.cells[1].delta_npv_eur > res.cells[0].delta_npv_eur);
    CHECK(res.cells[2].delta_npv_eur > res.cells[1].delta_npv_eur);
}

TEST_CASE("axis and space validation") {
    AxisSpec bad{5.0, 1.0, 3};
    CHECK_THROWS_AS(bad.validate("x"), std::invalid_argument);
    AxisSpec single{2.0, 9.0, 1};
    CHECK(single.values() == std::vector<double>{2.0});
    AxisSpec tri{0.0, 10.0, 3};
    CHECK(tri.values() == std::vector<double>{0.0, 5.0, 10.0});
}
