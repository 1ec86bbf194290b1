#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "steamflex/common.hpp"
#include "steamflex/timeseries.hpp"

namespace steamflex {

/// Grid tariff terms: a volumetric fee per imported kWh (scalar or hourly
/// series) and a capacity fee per kW of peak import per month.
struct TariffSchedule {
    std::optional<TimeSeries> volumetric_series;  // EUR/kWh, aligned with the scenario
    double volumetric_eur_per_kwh = 0.0;          // used when no series is given
    double capacity_eur_per_kw_month = 0.0;
    int months_per_horizon = 12;

    double volumetric_at(std::size_t step) const {
        return volumetric_series ? (*volumetric_series)[step] : volumetric_eur_per_kwh;
    }

    void validate() const {
        if (volumetric_eur_per_kwh < 0)
            throw std::invalid_argument("TariffSchedule: volumetric component must be >= 0");
        if (volumetric_series)
            for (double v : volumetric_series->values())
                if (v < 0)
                    throw std::invalid_argument(
                        "TariffSchedule: volumetric series must be >= 0");
        if (capacity_eur_per_kw_month < 0)
            throw std::invalid_argument("TariffSchedule: capacity component must be >= 0");
        if (months_per_horizon < 0)
            throw std::invalid_argument("TariffSchedule: months_per_horizon must be >= 0");
    }
};

/// Deterministic bid-acceptance mask: exactly round(fraction * n) hours are
/// accepted, drawn uniformly without replacement.
inline std::vector<std::uint8_t> build_acceptance_mask(std::size_t n_hours, double fraction,
                                                       std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0)
        throw std::invalid_argument("build_acceptance_mask: fraction must be in [0,1]");
    const auto k = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(n_hours)));
    std::vector<std::uint8_t> mask(n_hours, 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i : sample_without_replacement(rng, n_hours, k)) mask[i] = 1;
    return mask;
}

/// FCR capacity market: standby price per kW and bid hour, plus the random
/// acceptance mask. Unaccepted hours earn nothing, which is applied by
/// zeroing their price before the dispatch problem is built.
struct FcrMarket {
    TimeSeries price;  // EUR/kW per bid hour
    std::vector<std::uint8_t> acceptance;
    double acceptance_fraction = 0.5;
    std::uint64_t rng_seed = 0;

    static FcrMarket with_random_acceptance(TimeSeries price, double fraction,
                                            std::uint64_t seed) {
        FcrMarket m{std::move(price), {}, fraction, seed};
        m.acceptance = build_acceptance_mask(m.price.size(), fraction, seed);
        return m;
    }

    double effective_price(std::size_t step) const {
        return acceptance[step] ? price[step] : 0.0;
    }

    void validate() const {
        if (acceptance.size() != price.size())
            throw std::invalid_argument("FcrMarket: mask length must equal price length");
        for (double v : price.values())
            if (v < 0) throw std::invalid_argument("FcrMarket: prices must be >= 0");
    }
};

class ScenarioValidationError : public std::runtime_error {
public:
    explicit ScenarioValidationError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "scenario validation failed:";
        for (const auto& m : v) s += "\n  - " + m;
        return s;
    }
    std::vector<std::string> issues_;
};

/// All exogenous inputs of one dispatch run, time-aligned and validated.
struct Scenario {
    TimeSeries spot;          // EUR/kWh
    TariffSchedule tariff;
    FcrMarket fcr;
    TimeSeries steam_demand;  // kg/s
    double dt_s = 3600.0;
    std::size_t horizon_steps = 0;

    double dt_hours() const { return dt_s / 3600.0; }
    std::int64_t start() const { return spot.start(); }

    /// Horizon mean of spot + volumetric tariff, EUR/kWh (prices the
    /// initial storage charge).
    double mean_spot_plus_volumetric() const {
        double acc = 0;
        for (std::size_t t = 0; t < horizon_steps; ++t)
            acc += spot[t] + tariff.volumetric_at(t);
        return acc / static_cast<double>(horizon_steps);
    }
};

/// Assembles and validates a Scenario. Every alignment violation found is
/// reported in one aggregated error rather than stopping at the first.
inline Scenario assemble_scenario(TimeSeries spot, TariffSchedule tariff, FcrMarket fcr,
                                  TimeSeries steam_demand) {
    std::vector<std::string> issues;
    const std::size_t n = spot.size();
    const double dt = spot.dt();
    const std::int64_t start = spot.start();

    auto check_series = [&](const TimeSeries& ts, const std::string& name) {
        if (ts.size() != n)
            issues.push_back(name + ": length " + std::to_string(ts.size()) +
                             " != spot length " + std::to_string(n));
        if (ts.dt() != dt)
            issues.push_back(name + ": dt " + std::to_string(ts.dt()) + " s != spot dt " +
                             std::to_string(dt) + " s");
        if (ts.start() != start)
            issues.push_back(name + ": start " + format_iso8601_utc(ts.start()) +
                             " != spot start " + format_iso8601_utc(start));
    };
    check_series(fcr.price, "fcr.price");
    check_series(steam_demand, "steam_demand");
    if (tariff.volumetric_series) check_series(*tariff.volumetric_series, "tariff.volumetric");

    try {
        tariff.validate();
    } catch (const std::exception& e) {
        issues.push_back(e.what());
    }
    if (fcr.acceptance.size() != fcr.price.size())
        issues.push_back("fcr.acceptance: mask length " +
                         std::to_string(fcr.acceptance.size()) + " != price length " +
                         std::to_string(fcr.price.size()));
    for (double v : fcr.price.values())
        if (v < 0) {
            issues.push_back("fcr.price: negative price present");
            break;
        }
    for (std::size_t i = 0; i < steam_demand.size(); ++i)
        if (steam_demand[i] < 0) {
            issues.push_back("steam_demand: negative value at step " + std::to_string(i));
            break;
        }

    if (!issues.empty()) throw ScenarioValidationError(std::move(issues));

    Scenario s{std::move(spot), std::move(tariff), std::move(fcr), std::move(steam_demand),
               dt, n};
    return s;
}

}  // namespace steamflex
