#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "steamflex/dispatch.hpp"
#include "steamflex/market.hpp"

namespace steamflex {

/// Annual cost accounting, every term recomputed directly from the primal
/// series so the LP objective can be cross-checked against it.
struct CostBreakdown {
    double spot_eur = 0;            // C_S
    double volumetric_eur = 0;      // C_ec
    double capacity_eur = 0;        // C_pc
    double initial_charge_eur = 0;  // C_0
    double fcr_profit_eur = 0;      // Pi_fcr

    double net_energy_cost_eur() const {
        return spot_eur + volumetric_eur + capacity_eur + initial_charge_eur - fcr_profit_eur;
    }
    double total_electricity_cost_eur() const {  // C_E
        return spot_eur + volumetric_eur + capacity_eur + initial_charge_eur;
    }
};

/// Recomputes the cost terms from a solved dispatch, then insists that they
/// reproduce the LP objective; a mismatch signals a modeling bug, not bad
/// input, hence the exception.
inline CostBreakdown cost_breakdown(const DispatchResult& r, const Scenario& scenario,
                                    double consistency_tol = 1e-6) {
    if (r.status != DispatchStatus::Optimal)
        throw std::invalid_argument("cost_breakdown: result is not optimal");
    CostBreakdown c;
    const double dt_h = scenario.dt_hours();
    double peak_kw = 0;
    for (std::size_t t = 0; t < scenario.horizon_steps; ++t) {
        const double p_grid_kw = r.p_grid_w[t] / 1000.0;
        c.spot_eur += dt_h * scenario.spot[t] * p_grid_kw;  // exports earn spot
        if (p_grid_kw > 0)
            c.volumetric_eur += dt_h * scenario.tariff.volumetric_at(t) * p_grid_kw;
        peak_kw = std::max(peak_kw, p_grid_kw);
        c.fcr_profit_eur += dt_h * scenario.fcr.effective_price(t) * r.p_fcr_w[t] / 1000.0;
    }
    if (peak_kw > 0)
        c.capacity_eur = static_cast<double>(scenario.tariff.months_per_horizon) *
                         scenario.tariff.capacity_eur_per_kw_month * peak_kw;
    c.initial_charge_eur = r.initial_charge_cost_eur;

    const double err = std::abs(c.net_energy_cost_eur() - r.objective_eur) /
                       (1.0 + std::abs(r.objective_eur));
    if (err > consistency_tol)
        throw std::runtime_error(
            "cost_breakdown: recomputed net cost " + std::to_string(c.net_energy_cost_eur()) +
            " EUR disagrees with the LP objective " + std::to_string(r.objective_eur) +
            " EUR (relative error " + std::to_string(err) + ")");
    return c;
}

/// Size-dependent investment cost model: per-unit base costs at reference
/// sizes (1 MW, 1000 kg, 1 MWh) with economy-of-scale exponents, plus
/// per-technology cost factors for sensitivity studies.
struct InvestmentModel {
    double c_eb_eur_per_kw = 152.0;
    double beta_eb = -0.296;
    double c_sa_eur_per_kg = 191.0;
    double alpha_sa = -0.05;
    double c_b_eur_per_kwh = 433.0;
    double alpha_b = -0.164;
    double beta_b = 0.005;
    double p0_kw = 1000.0;
    double m0_kg = 1000.0;
    double q0_kwh = 1000.0;
    double f_eb = 1.0, f_sa = 1.0, f_b = 1.0;

    void validate() const {
        if (c_eb_eur_per_kw < 0 || c_sa_eur_per_kg < 0 || c_b_eur_per_kwh < 0)
            throw std::invalid_argument("InvestmentModel: base costs must be >= 0");
        if (f_eb < 0 || f_sa < 0 || f_b < 0)
            throw std::invalid_argument("InvestmentModel: cost factors must be >= 0");
        if (p0_kw <= 0 || m0_kg <= 0 || q0_kwh <= 0)
            throw std::invalid_argument("InvestmentModel: reference sizes must be > 0");
    }
};

struct InvestmentCost {
    double boiler_eur = 0;
    double accumulator_eur = 0;
    double bess_eur = 0;
    double total_eur = 0;
};

inline InvestmentCost investment_cost(const SystemConfig& config,
                                      const InvestmentModel& model) {
    config.validate();
    model.validate();
    InvestmentCost c;
    const double p_kw = config.p_eb_max_w / 1000.0;
    const double q_kwh = config.q_b_max_wh / 1000.0;
    if (p_kw > 0)
        c.boiler_eur =
            model.f_eb * model.c_eb_eur_per_kw * p_kw * std::pow(p_kw / model.p0_kw, model.beta_eb);
    if (config.m_sa_max_kg > 0)
        c.accumulator_eur = model.f_sa * model.c_sa_eur_per_kg * config.m_sa_max_kg *
                            std::pow(config.m_sa_max_kg / model.m0_kg, model.alpha_sa);
    if (q_kwh > 0)
        c.bess_eur = model.f_b * model.c_b_eur_per_kwh * q_kwh *
                     std::pow(q_kwh / model.q0_kwh, model.alpha_b) *
                     std::pow(config.c_rate_per_h, model.beta_b);
    c.total_eur = c.boiler_eur + c.accumulator_eur + c.bess_eur;
    return c;
}

struct NpvParams {
    double discount_rate = 0.05;
    int lifetime_years = 15;
    double maintenance_fraction = 0.02;  // of investment, per year
    int year_index_start = 0;            // the sum runs t = start .. lifetime

    void validate() const {
        if (discount_rate < 0 || discount_rate >= 1)
            throw std::invalid_argument("NpvParams: discount rate must be in [0,1)");
        if (lifetime_years < 1)
            throw std::invalid_argument("NpvParams: lifetime must be >= 1 year");
        if (maintenance_fraction < 0)
            throw std::invalid_argument("NpvParams: maintenance fraction must be >= 0");
        if (year_index_start != 0 && year_index_start != 1)
            throw std::invalid_argument("NpvParams: year index must start at 0 or 1");
    }
};

/// Net present value of running one annual cost profile over the equipment
/// lifetime: NPV = sum_t (Pi_fcr - C_E - C_M) / (1+r)^t - C_I.
inline double npv(const CostBreakdown& annual, double investment_eur, const NpvParams& p) {
    p.validate();
    const double maintenance = p.maintenance_fraction * investment_eur;
    const double annual_flow =
        annual.fcr_profit_eur - annual.total_electricity_cost_eur() - maintenance;
    double sum = 0;
    for (int t = p.year_index_start; t <= p.lifetime_years; ++t)
        sum += annual_flow / std::pow(1.0 + p.discount_rate, t);
    return sum - investment_eur;
}

/// Relative NPV against the best no-storage reference configuration.
inline double delta_npv(double config_npv, double reference_npv) {
    return config_npv - reference_npv;
}

struct NpvReport {
    SystemConfig config;
    InvestmentCost investment;
    CostBreakdown annual;
    double npv_eur = 0;
    double delta_npv_eur = 0;
};

}  // namespace steamflex
