#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "steamflex/de.hpp"
#include "steamflex/dispatch.hpp"
#include "steamflex/economics.hpp"

namespace steamflex {

struct AxisSpec {
    double min = 0, max = 0;
    int points = 1;

    void validate(const std::string& name) const {
        if (!(min <= max)) throw std::invalid_argument(name + ": min must be <= max");
        if (points < 1) throw std::invalid_argument(name + ": need at least one point");
        if (min < 0) throw std::invalid_argument(name + ": values must be >= 0");
    }
    std::vector<double> values() const {
        if (points == 1) return {min};
        std::vector<double> v(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i)
            v[static_cast<std::size_t>(i)] =
                min + (max - min) * static_cast<double>(i) / (points - 1);
        return v;
    }
};

struct SearchSpace {
    AxisSpec m_sa_kg;
    AxisSpec p_eb_w;
    AxisSpec q_b_wh;
    AxisSpec c_rate;

    void validate() const {
        m_sa_kg.validate("m_sa_kg");
        p_eb_w.validate("p_eb_w");
        q_b_wh.validate("q_b_wh");
        c_rate.validate("c_rate");
    }
};

/// Everything a sizing evaluation needs besides the candidate capacities.
struct SizingContext {
    const Scenario* scenario = nullptr;
    SteamSystemParams thermo;
    BatteryParams battery;
    InvestmentModel investment;
    NpvParams npv;
    DispatchOptions dispatch;
    double t0_k = 283.0;
    unsigned jobs = 0;  // 0: hardware concurrency
};

struct ConfigEvaluation {
    SystemConfig config;
    bool feasible = false;
    double npv_eur = 0;
    double net_cost_eur = 0;
    double investment_eur = 0;
    double peak_grid_power_w = 0;
    CostBreakdown annual;
};

/// One full evaluation: dispatch, cost accounting, investment, NPV.
/// Infeasible dispatches come back marked, dispatch errors throw.
inline ConfigEvaluation evaluate_config(const SizingContext& ctx, SystemConfig config) {
    config.t0_k = ctx.t0_k;
    ConfigEvaluation ev;
    ev.config = config;
    const DispatchResult r =
        solve_dispatch(*ctx.scenario, config, ctx.thermo, ctx.battery, ctx.dispatch);
    if (r.status == DispatchStatus::CannotMeetSteamDemand) return ev;
    if (r.status != DispatchStatus::Optimal)
        throw std::runtime_error("evaluate_config: " + r.message);
    ev.feasible = true;
    ev.annual = cost_breakdown(r, *ctx.scenario);
    ev.net_cost_eur = ev.annual.net_energy_cost_eur();
    ev.investment_eur = investment_cost(config, ctx.investment).total_eur;
    ev.npv_eur = npv(ev.annual, ev.investment_eur, ctx.npv);
    ev.peak_grid_power_w = r.peak_grid_power_w;
    return ev;
}

struct SweepCell {
    SystemConfig config;
    bool feasible = false;
    double delta_npv_eur = std::numeric_limits<double>::quiet_NaN();
    double npv_eur = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
    std::vector<double> m_sa_axis, p_eb_axis, q_b_axis, c_rate_axis;
    std::vector<SweepCell> cells;  // row-major: m_sa outermost, c_rate innermost
    double reference_npv_eur = 0;
    SystemConfig reference_config;

    std::size_t index(std::size_t im, std::size_t ip, std::size_t iq, std::size_t ic) const {
        return ((im * p_eb_axis.size() + ip) * q_b_axis.size() + iq) * c_rate_axis.size() + ic;
    }
};

/// Best boiler-only configuration (no storage): a one-dimensional NPV search
/// over the boiler capacity. The grid always contains the minimum feasible
/// capacity (peak demand power), and the winner is polished by a local
/// ternary refinement.
inline ConfigEvaluation optimize_reference(const SizingContext& ctx, double p_eb_lo_w,
                                           double p_eb_hi_w, int grid_points = 33) {
    if (grid_points < 2) throw std::invalid_argument("optimize_reference: need >= 2 points");
    SteamSystemParams params = ctx.thermo;
    params.t0_k = ctx.t0_k;
    const double dh = total_enthalpy(params, ctx.t0_k);
    double peak_demand = 0;
    for (double d : ctx.scenario->steam_demand.values()) peak_demand = std::max(peak_demand, d);
    const double p_min_w = peak_demand * dh * 1000.0;  // kg/s * kJ/kg = kW
    const double lo = std::max(p_eb_lo_w, p_min_w);
    const double hi = std::max(p_eb_hi_w, lo);

    auto eval = [&](double p_w) {
        return evaluate_config(ctx, SystemConfig{p_w, 0.0, 0.0, 0.0, ctx.t0_k});
    };
    ConfigEvaluation best;
    best.npv_eur = -kInf;
    std::vector<double> grid;
    grid.push_back(p_min_w >= p_eb_lo_w && p_min_w <= hi ? p_min_w : lo);
    for (int i = 0; i < grid_points; ++i)
        grid.push_back(lo + (hi - lo) * static_cast<double>(i) / (grid_points - 1));
    double best_p = grid.front();
    for (double p : grid) {
        const auto ev = eval(p);
        if (ev.feasible && ev.npv_eur > best.npv_eur) {
            best = ev;
            best_p = p;
        }
    }
    if (!(best.npv_eur > -kInf))
        throw std::runtime_error("optimize_reference: no feasible boiler size in range");
    // local ternary refinement around the winning grid point
    const double step = (hi - lo) / (grid_points - 1);
    double a = std::max(lo, best_p - step), b = std::min(hi, best_p + step);
    for (int it = 0; it < 40 && (b - a) > 1.0; ++it) {  // 1 W resolution
        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        const auto e1 = eval(m1), e2 = eval(m2);
        const double v1 = e1.feasible ? e1.npv_eur : -kInf;
        const double v2 = e2.feasible ? e2.npv_eur : -kInf;
        if (v1 > best.npv_eur) {
            best = e1;
            best_p = m1;
        }
        if (v2 > best.npv_eur) {
            best = e2;
            best_p = m2;
        }
        if (v1 < v2)
            a = m1;
        else
            b = m2;
    }
    return best;
}

/// Exhaustive sweep over the capacity grid. Cells are independent and run in
/// parallel; assembly is by index, so results do not depend on scheduling.
inline SweepResult grid_search(const SearchSpace& space, const SizingContext& ctx) {
    space.validate();
    SweepResult res;
    res.m_sa_axis = space.m_sa_kg.values();
    res.p_eb_axis = space.p_eb_w.values();
    res.q_b_axis = space.q_b_wh.values();
    res.c_rate_axis = space.c_rate.values();

    const auto reference =
        optimize_reference(ctx, space.p_eb_w.min, std::max(space.p_eb_w.max, 1.0));
    res.reference_npv_eur = reference.npv_eur;
    res.reference_config = reference.config;

    const std::size_t n = res.m_sa_axis.size() * res.p_eb_axis.size() * res.q_b_axis.size() *
                          res.c_rate_axis.size();
    res.cells.resize(n);
    std::vector<std::string> errors(n);
    parallel_for(n, ctx.jobs, [&](std::size_t cell) {
        std::size_t rem = cell;
        const std::size_t ic = rem % res.c_rate_axis.size();
        rem /= res.c_rate_axis.size();
        const std::size_t iq = rem % res.q_b_axis.size();
        rem /= res.q_b_axis.size();
        const std::size_t ip = rem % res.p_eb_axis.size();
        const std::size_t im = rem / res.p_eb_axis.size();
        SystemConfig cfg{res.p_eb_axis[ip], res.m_sa_axis[im], res.q_b_axis[iq],
                         res.q_b_axis[iq] > 0 ? std::max(res.c_rate_axis[ic], 1e-6) : res.c_rate_axis[ic],
                         ctx.t0_k};
        res.cells[cell].config = cfg;
        try {
            const auto ev = evaluate_config(ctx, cfg);
            SweepCell& out = res.cells[cell];
            out.feasible = ev.feasible;
            if (ev.feasible) {
                out.npv_eur = ev.npv_eur;
                out.delta_npv_eur = ev.npv_eur - res.reference_npv_eur;
            }
        } catch (const std::exception& e) {
            errors[cell] = e.what();
        }
    });
    for (std::size_t cell = 0; cell < n; ++cell)
        if (!errors[cell].empty())
            throw std::runtime_error(
                "grid_search: cell (m=" + std::to_string(res.cells[cell].config.m_sa_max_kg) +
                " kg, p=" + std::to_string(res.cells[cell].config.p_eb_max_w) +
                " W, q=" + std::to_string(res.cells[cell].config.q_b_max_wh) +
                " Wh): " + errors[cell]);
    return res;
}

struct TwoStageResult {
    SweepResult grid;
    DeResult de;
    ConfigEvaluation best;  // from the DE stage (never worse than the grid)
};

/// Grid search to find the promising region, then differential evolution
/// over (M_sa, P_eb, Q_b, c_rate) seeded with the grid winner. Infeasible
/// candidates carry a large penalty so the objective is total on the box.
inline TwoStageResult two_stage_size(const SearchSpace& space, const SizingContext& ctx,
                                     const DeParams& de_params) {
    TwoStageResult out;
    out.grid = grid_search(space, ctx);

    const SweepCell* best_cell = nullptr;
    for (const auto& c : out.grid.cells)
        if (c.feasible && (!best_cell || c.npv_eur > best_cell->npv_eur)) best_cell = &c;

    std::vector<std::pair<double, double>> bounds{
        {space.m_sa_kg.min, space.m_sa_kg.max},
        {space.p_eb_w.min, space.p_eb_w.max},
        {space.q_b_wh.min, space.q_b_wh.max},
        {space.c_rate.min, space.c_rate.max}};
    const double penalty = 1e12;
    auto objective = [&](const std::vector<double>& x) {
        SystemConfig cfg{x[1], x[0], x[2], x[3], ctx.t0_k};
        if (cfg.q_b_max_wh > 0 && cfg.c_rate_per_h <= 0) return penalty;
        const auto ev = evaluate_config(ctx, cfg);
        return ev.feasible ? -ev.npv_eur : penalty;
    };
    std::vector<std::vector<double>> seeds;
    if (best_cell)
        seeds.push_back({best_cell->config.m_sa_max_kg, best_cell->config.p_eb_max_w,
                         best_cell->config.q_b_max_wh, best_cell->config.c_rate_per_h});
    DeParams dp = de_params;
    dp.jobs = ctx.jobs;
    out.de = differential_evolution(objective, bounds, dp, seeds);

    SystemConfig best_cfg{out.de.best_point[1], out.de.best_point[0], out.de.best_point[2],
                          out.de.best_point[3], ctx.t0_k};
    if (best_cfg.q_b_max_wh > 0 && best_cfg.c_rate_per_h <= 0) best_cfg.c_rate_per_h = 1e-6;
    out.best = evaluate_config(ctx, best_cfg);
    if (!out.best.feasible)
        throw std::runtime_error("two_stage_size: search ended on an infeasible point");
    return out;
}

struct SensitivityCell {
    double f_sa = 1, f_b = 1;
    ConfigEvaluation best;
};

/// Re-runs the two-stage sizing for every investment cost-factor pair.
inline std::vector<SensitivityCell> sensitivity_sweep(const SizingContext& ctx,
                                                      const std::vector<double>& f_sa_values,
                                                      const std::vector<double>& f_b_values,
                                                      const SearchSpace& space,
                                                      const DeParams& de_params) {
    std::vector<SensitivityCell> out;
    for (double fs : f_sa_values)
        for (double fb : f_b_values) {
            if (!(fs > 0) || !(fb > 0))
                throw std::invalid_argument("sensitivity_sweep: factors must be > 0");
            SizingContext c2 = ctx;
            c2.investment.f_sa = fs;
            c2.investment.f_b = fb;
            SensitivityCell cell;
            cell.f_sa = fs;
            cell.f_b = fb;
            cell.best = two_stage_size(space, c2, de_params).best;
            out.push_back(std::move(cell));
        }
    return out;
}

enum class PreheatAxis { AccumulatorCapacity, BoilerCapacity };

struct PreheatCell {
    double t0_k = 0;
    double axis_value = 0;
    bool feasible = false;
    double delta_npv_eur = std::numeric_limits<double>::quiet_NaN();
};

struct PreheatSweepResult {
    PreheatAxis axis;
    std::vector<PreheatCell> cells;
    double reference_npv_eur = 0;  // no storage, baseline inlet temperature
};

/// Inlet-water preheating study: the enthalpy (and with it every storage
/// coefficient) is re-derived per T0; the reference stays the no-storage
/// optimum at the baseline inlet temperature.
inline PreheatSweepResult preheat_sweep(const SizingContext& ctx,
                                        const std::vector<double>& t0_values_k,
                                        PreheatAxis axis,
                                        const std::vector<double>& axis_values,
                                        SystemConfig fixed, double reference_p_eb_hi_w) {
    PreheatSweepResult res;
    res.axis = axis;
    const auto reference = optimize_reference(ctx, 1.0, reference_p_eb_hi_w);
    res.reference_npv_eur = reference.npv_eur;
    for (double t0 : t0_values_k) {
        for (double v : axis_values) {
            SizingContext c2 = ctx;
            c2.t0_k = t0;
            SystemConfig cfg = fixed;
            if (axis == PreheatAxis::AccumulatorCapacity)
                cfg.m_sa_max_kg = v;
            else
                cfg.p_eb_max_w = v;
            PreheatCell cell;
            cell.t0_k = t0;
            cell.axis_value = v;
            const auto ev = evaluate_config(c2, cfg);
            cell.feasible = ev.feasible;
            if (ev.feasible) cell.delta_npv_eur = ev.npv_eur - res.reference_npv_eur;
            res.cells.push_back(cell);
        }
    }
    return res;
}

}  // namespace steamflex
