#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "steamflex/ipm.hpp"
#include "steamflex/lp.hpp"
#include "steamflex/market.hpp"
#include "steamflex/thermo.hpp"

namespace steamflex {

/// Candidate equipment sizing under evaluation.
struct SystemConfig {
    double p_eb_max_w = 0;   // electrode boiler power capacity
    double m_sa_max_kg = 0;  // steam accumulator mass capacity
    double q_b_max_wh = 0;   // BESS energy capacity
    double c_rate_per_h = 0; // BESS power limit as multiple of capacity per hour
    double t0_k = 283.0;     // boiler inlet water temperature

    void validate() const {
        if (p_eb_max_w < 0 || m_sa_max_kg < 0 || q_b_max_wh < 0 || c_rate_per_h < 0)
            throw std::invalid_argument("SystemConfig: capacities must be >= 0");
        if (q_b_max_wh > 0 && c_rate_per_h <= 0)
            throw std::invalid_argument("SystemConfig: c_rate must be > 0 when a BESS is present");
        if (t0_k <= 0) throw std::invalid_argument("SystemConfig: T0 must be > 0 K");
    }
};

enum class DispatchStatus { Optimal, CannotMeetSteamDemand, Error };

struct RecheckReport {
    double max_violation = 0;  // relative, over all model constraints
    bool pass = false;
    std::string worst;
};

/// Optimal per-step operation with diagnostics. Power in W, energy in Wh,
/// mass in kg, mass flow in kg/s. State series (m_sa, q_b) carry T+1 points,
/// the leading one being the initial condition.
struct DispatchResult {
    DispatchStatus status = DispatchStatus::Error;
    std::vector<double> p_grid_w, p_eb_w, p_b_charge_w, p_b_discharge_w, p_fcr_w;
    std::vector<double> m_dot_eb_kg_s, m_dot_sa_charge_kg_s, m_dot_sa_discharge_kg_s;
    std::vector<double> m_sa_kg;   // T+1
    std::vector<double> q_b_wh;    // T+1
    double peak_grid_power_w = 0;
    double objective_eur = std::numeric_limits<double>::quiet_NaN();
    double initial_charge_cost_eur = 0;  // C_0 term inside the objective
    // diagnostics
    VerifyReport lp_verification;
    RecheckReport recheck;
    int lp_iterations = 0;
    std::optional<std::size_t> infeasible_step;
    std::string message;
};

struct DispatchOptions {
    double lp_tol = 1e-6;
    double verify_tol = 1e-6;
    /// Extra cost per kW/(kg/s) of storage throughput; zero keeps the model
    /// exact, a tiny value breaks ties against simultaneous charge/discharge
    /// (used by diagnostics and tests).
    double wash_penalty = 0.0;
};

/// The built problem plus the variable layout needed to read a solution back.
struct DispatchProblem {
    LinearProgram lp;
    std::size_t steps = 0;
    bool has_sa = false, has_bess = false, has_fcr = false, has_peak = false;
    std::vector<int> v_p_eb, v_msa_c, v_msa_d, v_m_sa;  // m_sa: state t+1
    std::vector<int> v_pb_c, v_pb_d, v_q_b;
    std::vector<int> v_p_fcr;            // per hour block
    std::vector<int> fcr_block_of_step;  // -1 when FCR absent
    std::vector<int> v_p_gp;             // grid import split, -1 where absent
    int v_p_pk = -1;
    double c0_eur = 0;
    double dh_tot_kj_per_kg = 0;
};

namespace dispatch_detail {

inline double initial_charge_cost(const Scenario& scenario, const SystemConfig& config,
                                  double dh_tot_kj_per_kg) {
    const double initial_kwh = 0.9 * config.q_b_max_wh / 1000.0 +
                               0.9 * config.m_sa_max_kg * dh_tot_kj_per_kg / 3600.0;
    return scenario.mean_spot_plus_volumetric() * initial_kwh;
}

}  // namespace dispatch_detail

/// Greedy maximal-storage simulation of the steam side. Keeping the
/// accumulator as full as possible is feasibility-optimal for a single
/// reservoir, so a failure step here is a certificate that no dispatch can
/// meet the demand. Returns the first failing step, if any.
inline std::optional<std::size_t> first_unmeetable_step(const Scenario& scenario,
                                                        const SystemConfig& config,
                                                        const StorageCoefficients& coeffs) {
    const double p_max_kw = config.p_eb_max_w / 1000.0;
    const double dh = coeffs.dh_tot_kj_per_kg;
    const double dt = scenario.dt_s;
    const double prod_max = p_max_kw / dh;  // kg/s
    double m = 0.9 * config.m_sa_max_kg;
    const double decay = 1.0 - coeffs.eps_sa_per_s * dt;
    for (std::size_t t = 0; t < scenario.horizon_steps; ++t) {
        const double demand = scenario.steam_demand[t];
        if (prod_max >= demand) {
            m = std::min(config.m_sa_max_kg,
                         m * decay + coeffs.eta_sa_charge * (prod_max - demand) * dt);
        } else {
            m = m * decay - (demand - prod_max) * dt / coeffs.eta_sa_discharge;
            if (m < -1e-9 * std::max(1.0, config.m_sa_max_kg)) return t;
            m = std::max(m, 0.0);
        }
    }
    return std::nullopt;
}

/// Translates a scenario + sizing into the dispatch LP: steam balance,
/// boiler conversion and bounds, accumulator and battery balances with
/// charge/discharge efficiencies and self-discharge, FCR headroom rows with
/// hourly blocking by variable aliasing, grid-import split for the
/// volumetric tariff, and one horizon-wide peak variable for the capacity
/// tariff. Objective: spot + volumetric + capacity costs minus FCR profit,
/// plus the constant initial-charge cost C0.
inline DispatchProblem build_dispatch_lp(const Scenario& scenario, const SystemConfig& config,
                                         const StorageCoefficients& coeffs,
                                         const BatteryParams& battery,
                                         const DispatchOptions& opts = {}) {
    config.validate();
    battery.validate();
    // a zero-capacity boiler still needs coefficients; the convention is to
    // evaluate them at a 1 W placeholder rating
    const double expect_rated_w = std::max(config.p_eb_max_w, 1.0);
    if (std::abs(coeffs.rated_power_w - expect_rated_w) > 1e-6 * expect_rated_w)
        throw std::invalid_argument(
            "build_dispatch_lp: storage coefficients were evaluated at rated power " +
            std::to_string(coeffs.rated_power_w) + " W, config wants " +
            std::to_string(expect_rated_w) + " W");
    if (std::abs(coeffs.t0_k - config.t0_k) > 1e-9)
        throw std::invalid_argument(
            "build_dispatch_lp: storage coefficients were evaluated at T0 = " +
            std::to_string(coeffs.t0_k) + " K, config wants " + std::to_string(config.t0_k) +
            " K");
    if (std::abs(coeffs.m_max_kg - config.m_sa_max_kg) >
        1e-9 * std::max(1.0, config.m_sa_max_kg))
        throw std::invalid_argument(
            "build_dispatch_lp: storage coefficients were evaluated for M_max = " +
            std::to_string(coeffs.m_max_kg) + " kg, config wants " +
            std::to_string(config.m_sa_max_kg) + " kg");

    const std::size_t T = scenario.horizon_steps;
    const double dt_s = scenario.dt_s;
    const double dt_h = scenario.dt_hours();
    const double dh = coeffs.dh_tot_kj_per_kg;
    const double p_max_kw = config.p_eb_max_w / 1000.0;
    const double q_max_kwh = config.q_b_max_wh / 1000.0;
    const double gamma_q_kw = config.c_rate_per_h * q_max_kwh;

    DispatchProblem P;
    P.steps = T;
    P.has_sa = config.m_sa_max_kg > 0;
    P.has_bess = q_max_kwh > 0 && config.c_rate_per_h > 0;
    P.has_peak = scenario.tariff.capacity_eur_per_kw_month > 0 &&
                 scenario.tariff.months_per_horizon > 0;
    P.dh_tot_kj_per_kg = dh;
    for (std::size_t t = 0; t < T; ++t)
        if (scenario.fcr.effective_price(t) > 0) {
            P.has_fcr = true;
            break;
        }

    // FCR commitments are locked per hour; with sub-hourly steps the same
    // variable is shared by every step of the block, which enforces the
    // blocking without extra rows. At dt >= 1 h each step is its own block.
    std::size_t n_blocks = 0;
    P.fcr_block_of_step.assign(T, -1);
    if (P.has_fcr) {
        const auto dt_i = static_cast<std::int64_t>(std::llround(dt_s));
        if (std::abs(dt_s - static_cast<double>(dt_i)) > 1e-9 ||
            (dt_i < 3600 && 3600 % dt_i != 0) || (dt_i > 3600 && dt_i % 3600 != 0))
            throw std::invalid_argument(
                "build_dispatch_lp: FCR hourly blocking needs dt dividing or a multiple of "
                "one hour");
        std::int64_t prev_hour = -1;
        for (std::size_t t = 0; t < T; ++t) {
            const auto hour = static_cast<std::int64_t>(t) * dt_i / 3600;
            if (hour != prev_hour) {
                ++n_blocks;
                prev_hour = hour;
            }
            P.fcr_block_of_step[t] = static_cast<int>(n_blocks - 1);
        }
    }

    LinearProgram& lp = P.lp;
    P.v_p_eb.assign(T, -1);
    P.v_msa_c.assign(T, -1);
    P.v_msa_d.assign(T, -1);
    P.v_m_sa.assign(T, -1);
    P.v_pb_c.assign(T, -1);
    P.v_pb_d.assign(T, -1);
    P.v_q_b.assign(T, -1);
    P.v_p_gp.assign(T, -1);

    auto idx = [](const char* base, std::size_t t) {
        return std::string(base) + "[" + std::to_string(t) + "]";
    };

    for (std::size_t t = 0; t < T; ++t) {
        const double cs = scenario.spot[t];
        const double cec = scenario.tariff.volumetric_at(t);
        P.v_p_eb[t] = lp.add_variable(idx("P_eb", t), 0.0, p_max_kw, dt_h * cs);
        if (P.has_sa) {
            P.v_msa_c[t] = lp.add_variable(idx("msa_c", t), 0.0, kInf, opts.wash_penalty);
            P.v_msa_d[t] = lp.add_variable(idx("msa_d", t), 0.0, kInf, opts.wash_penalty);
            P.v_m_sa[t] = lp.add_variable(idx("M_sa", t + 1), 0.0, config.m_sa_max_kg, 0.0);
        }
        if (P.has_bess) {
            P.v_pb_c[t] = lp.add_variable(idx("Pb_c", t), 0.0, kInf,
                                          dt_h * cs + opts.wash_penalty);
            P.v_pb_d[t] = lp.add_variable(idx("Pb_d", t), 0.0, kInf,
                                          -dt_h * cs + opts.wash_penalty);
            P.v_q_b[t] = lp.add_variable(idx("Q_b", t + 1),
                                         battery.soc_min_frac * q_max_kwh,
                                         battery.soc_max_frac * q_max_kwh, 0.0);
        }
        if (cec > 0)
            P.v_p_gp[t] = lp.add_variable(idx("P_grid_import", t), 0.0, kInf, dt_h * cec);
    }
    if (P.has_fcr) {
        P.v_p_fcr.assign(n_blocks, -1);
        for (std::size_t b = 0; b < n_blocks; ++b)
            P.v_p_fcr[b] = lp.add_variable("P_fcr[" + std::to_string(b) + "]", 0.0, kInf, 0.0);
        for (std::size_t t = 0; t < T; ++t)
            lp.add_cost(P.v_p_fcr[static_cast<std::size_t>(P.fcr_block_of_step[t])],
                        -dt_h * scenario.fcr.effective_price(t));
    }
    if (P.has_peak)
        P.v_p_pk = lp.add_variable(
            "P_peak", 0.0, kInf,
            static_cast<double>(scenario.tariff.months_per_horizon) *
                scenario.tariff.capacity_eur_per_kw_month);

    const double sa_decay = 1.0 - coeffs.eps_sa_per_s * dt_s;
    const double b_decay = 1.0 - battery.self_discharge_per_s() * dt_s;

    for (std::size_t t = 0; t < T; ++t) {
        // steam balance: boiler output covers plant demand plus accumulator
        // charge, discharge feeds the plant directly
        {
            std::vector<LpTerm> terms{{P.v_p_eb[t], 1.0 / dh}};
            if (P.has_sa) {
                terms.push_back({P.v_msa_c[t], -1.0});
                terms.push_back({P.v_msa_d[t], 1.0});
            }
            lp.add_row(Relation::Equal, scenario.steam_demand[t], terms, idx("steam_bal", t));
        }
        if (P.has_sa) {
            std::vector<LpTerm> terms{{P.v_m_sa[t], 1.0},
                                      {P.v_msa_c[t], -dt_s * coeffs.eta_sa_charge},
                                      {P.v_msa_d[t], dt_s / coeffs.eta_sa_discharge}};
            double rhs = 0.0;
            if (t == 0)
                rhs = sa_decay * 0.9 * config.m_sa_max_kg;
            else
                terms.push_back({P.v_m_sa[t - 1], -sa_decay});
            lp.add_row(Relation::Equal, rhs, terms, idx("sa_bal", t));
        }
        if (P.has_bess) {
            std::vector<LpTerm> terms{{P.v_q_b[t], 1.0},
                                      {P.v_pb_c[t], -dt_h * battery.eta_charge},
                                      {P.v_pb_d[t], dt_h / battery.eta_discharge}};
            double rhs = 0.0;
            if (t == 0)
                rhs = b_decay * battery.soc_init_frac * q_max_kwh;
            else
                terms.push_back({P.v_q_b[t - 1], -b_decay});
            lp.add_row(Relation::Equal, rhs, terms, idx("b_bal", t));

            lp.add_row(Relation::LessEqual, gamma_q_kw,
                       {{P.v_pb_c[t], 1.0}, {P.v_pb_d[t], -1.0}}, idx("crate_hi", t));
            lp.add_row(Relation::LessEqual, gamma_q_kw,
                       {{P.v_pb_c[t], -1.0}, {P.v_pb_d[t], 1.0}}, idx("crate_lo", t));
        }
        if (P.has_fcr) {
            const int f = P.v_p_fcr[static_cast<std::size_t>(P.fcr_block_of_step[t])];
            // down-regulation headroom: unused boiler and battery capacity
            std::vector<LpTerm> down{{f, 1.0}, {P.v_p_eb[t], 1.0}};
            std::vector<LpTerm> up{{f, 1.0}, {P.v_p_eb[t], -1.0}};
            if (P.has_bess) {
                down.push_back({P.v_pb_c[t], 1.0});
                down.push_back({P.v_pb_d[t], -1.0});
                up.push_back({P.v_pb_c[t], -1.0});
                up.push_back({P.v_pb_d[t], 1.0});
            }
            lp.add_row(Relation::LessEqual, p_max_kw + gamma_q_kw, down, idx("fcr_down", t));
            // up-regulation limited by current total consumption; with
            // P_fcr >= 0 this also rules out net export
            lp.add_row(Relation::LessEqual, 0.0, up, idx("fcr_up", t));
        } else if (P.has_bess) {
            // same export restriction the FCR up-regulation row would impose
            lp.add_row(Relation::LessEqual, 0.0,
                       {{P.v_p_eb[t], -1.0}, {P.v_pb_c[t], -1.0}, {P.v_pb_d[t], 1.0}},
                       idx("no_export", t));
        }
        if (P.v_p_gp[t] >= 0) {
            std::vector<LpTerm> terms{{P.v_p_eb[t], 1.0}, {P.v_p_gp[t], -1.0}};
            if (P.has_bess) {
                terms.push_back({P.v_pb_c[t], 1.0});
                terms.push_back({P.v_pb_d[t], -1.0});
            }
            lp.add_row(Relation::LessEqual, 0.0, terms, idx("import_split", t));
        }
        if (P.has_peak) {
            std::vector<LpTerm> terms{{P.v_p_eb[t], 1.0}, {P.v_p_pk, -1.0}};
            if (P.has_bess) {
                terms.push_back({P.v_pb_c[t], 1.0});
                terms.push_back({P.v_pb_d[t], -1.0});
            }
            lp.add_row(Relation::LessEqual, 0.0, terms, idx("peak", t));
        }
    }

    P.c0_eur = dispatch_detail::initial_charge_cost(scenario, config, dh);
    lp.set_objective_offset(P.c0_eur);
    return P;
}

/// Re-derives every model constraint from the result series in plain
/// arithmetic, independent of the LP layer. Violations are measured
/// relative, max over constraints.
inline RecheckReport recheck_dispatch(const DispatchResult& r, const Scenario& scenario,
                                      const SystemConfig& config,
                                      const StorageCoefficients& coeffs,
                                      const BatteryParams& battery, double tol = 1e-6) {
    RecheckReport rep;
    double worst = 0;
    auto note = [&](double violation, double scale, const std::string& who) {
        const double rel = violation / (1.0 + std::abs(scale));
        if (rel > worst) {
            worst = rel;
            rep.worst = who;
        }
    };
    const std::size_t T = scenario.horizon_steps;
    const double dt_s = scenario.dt_s;
    const double dh = coeffs.dh_tot_kj_per_kg;
    const double p_max_kw = config.p_eb_max_w / 1000.0;
    const double q_max_kwh = config.q_b_max_wh / 1000.0;
    const double gamma_q_kw = config.c_rate_per_h * q_max_kwh;
    const double sa_decay = 1.0 - coeffs.eps_sa_per_s * dt_s;
    const double b_decay = 1.0 - battery.self_discharge_per_s() * dt_s;

    for (std::size_t t = 0; t < T; ++t) {
        const double p_eb = r.p_eb_w[t] / 1000.0;
        const double pb_c = r.p_b_charge_w[t] / 1000.0;
        const double pb_d = r.p_b_discharge_w[t] / 1000.0;
        const double p_grid = r.p_grid_w[t] / 1000.0;
        const double p_fcr = r.p_fcr_w[t] / 1000.0;

        note(std::abs(p_grid - (p_eb + pb_c - pb_d)), p_grid, "grid_balance@" + std::to_string(t));
        note(std::abs(r.m_dot_eb_kg_s[t] - p_eb / dh), r.m_dot_eb_kg_s[t],
             "boiler_conversion@" + std::to_string(t));
        note(std::abs(r.m_dot_eb_kg_s[t] - r.m_dot_sa_charge_kg_s[t] +
                      r.m_dot_sa_discharge_kg_s[t] - scenario.steam_demand[t]),
             scenario.steam_demand[t], "steam_balance@" + std::to_string(t));
        note(std::max(0.0, p_eb - p_max_kw), p_max_kw, "boiler_cap@" + std::to_string(t));
        note(std::max(0.0, -p_eb), p_max_kw, "boiler_nonneg@" + std::to_string(t));

        // accumulator balance and bounds
        const double m_next_expect =
            sa_decay * r.m_sa_kg[t] + dt_s * (coeffs.eta_sa_charge * r.m_dot_sa_charge_kg_s[t] -
                                              r.m_dot_sa_discharge_kg_s[t] /
                                                  coeffs.eta_sa_discharge);
        note(std::abs(r.m_sa_kg[t + 1] - m_next_expect), config.m_sa_max_kg,
             "sa_balance@" + std::to_string(t));
        note(std::max(0.0, r.m_sa_kg[t + 1] - config.m_sa_max_kg), config.m_sa_max_kg,
             "sa_cap@" + std::to_string(t));
        note(std::max(0.0, -r.m_sa_kg[t + 1]), config.m_sa_max_kg,
             "sa_nonneg@" + std::to_string(t));

        // battery balance, SOC window, C-rate
        const double q_kwh_t = r.q_b_wh[t] / 1000.0;
        const double q_kwh_next = r.q_b_wh[t + 1] / 1000.0;
        const double q_next_expect =
            b_decay * q_kwh_t + scenario.dt_hours() * (battery.eta_charge * pb_c -
                                                       pb_d / battery.eta_discharge);
        note(std::abs(q_kwh_next - q_next_expect), std::max(1.0, q_max_kwh),
             "b_balance@" + std::to_string(t));
        note(std::max(0.0, q_kwh_next - battery.soc_max_frac * q_max_kwh), q_max_kwh,
             "soc_max@" + std::to_string(t));
        note(std::max(0.0, battery.soc_min_frac * q_max_kwh - q_kwh_next), q_max_kwh,
             "soc_min@" + std::to_string(t));
        note(std::max(0.0, std::abs(pb_c - pb_d) - gamma_q_kw), std::max(1.0, gamma_q_kw),
             "c_rate@" + std::to_string(t));

        // FCR headroom, both directions, from the solution itself
        const double down_headroom = (p_max_kw - p_eb) + (gamma_q_kw - (pb_c - pb_d));
        const double up_headroom = p_eb + pb_c - pb_d;
        note(std::max(0.0, p_fcr - down_headroom), p_max_kw, "fcr_down@" + std::to_string(t));
        if (scenario.fcr.effective_price(t) > 0 || q_max_kwh > 0)
            note(std::max(0.0, p_fcr - up_headroom), p_max_kw, "fcr_up@" + std::to_string(t));
        note(std::max(0.0, -p_fcr), p_max_kw, "fcr_nonneg@" + std::to_string(t));
    }
    // initial conditions
    note(std::abs(r.m_sa_kg[0] - 0.9 * config.m_sa_max_kg), config.m_sa_max_kg, "sa_init");
    note(std::abs(r.q_b_wh[0] / 1000.0 - battery.soc_init_frac * q_max_kwh), q_max_kwh,
         "b_init");
    // hourly FCR blocking
    for (std::size_t t = 0; t + 1 < T; ++t) {
        const auto same_hour = static_cast<std::int64_t>(static_cast<double>(t) * dt_s / 3600.0) ==
                               static_cast<std::int64_t>(static_cast<double>(t + 1) * dt_s / 3600.0);
        if (same_hour)
            note(std::abs(r.p_fcr_w[t] - r.p_fcr_w[t + 1]) / 1000.0, p_max_kw,
                 "fcr_block@" + std::to_string(t));
    }
    rep.max_violation = worst;
    rep.pass = worst <= tol;
    return rep;
}

/// Solves the dispatch problem end to end: steam-side feasibility pre-check,
/// LP build and solve, series extraction, and the independent verification
/// pair (LP optimality certificate + constraint recheck).
inline DispatchResult solve_dispatch(const Scenario& scenario, const SystemConfig& config,
                                     const SteamSystemParams& thermo,
                                     const BatteryParams& battery,
                                     const DispatchOptions& opts = {}) {
    config.validate();
    SteamSystemParams params = thermo;
    params.t0_k = config.t0_k;
    params.validate();
    const double rated_w = std::max(config.p_eb_max_w, 1.0);
    const StorageCoefficients coeffs =
        storage_coefficients(params, config.m_sa_max_kg, rated_w);

    DispatchResult r;
    const std::size_t T = scenario.horizon_steps;

    if (auto bad = first_unmeetable_step(scenario, config, coeffs)) {
        r.status = DispatchStatus::CannotMeetSteamDemand;
        r.infeasible_step = *bad;
        r.message = "cannot meet steam demand at step " + std::to_string(*bad) + " (" +
                    format_iso8601_utc(scenario.start() +
                                       static_cast<std::int64_t>(*bad * scenario.dt_s)) +
                    ")";
        return r;
    }

    DispatchProblem P = build_dispatch_lp(scenario, config, coeffs, battery, opts);
    SolveOptions sopts;
    sopts.tol = opts.lp_tol;
    LpSolution sol = solve(P.lp, sopts);
    r.lp_iterations = sol.iterations;
    if (sol.status == LpStatus::Infeasible) {
        // the greedy pre-check is the authority on steam feasibility; an LP
        // disagreement means the model and pre-check diverged
        r.status = DispatchStatus::Error;
        r.message = "LP reported infeasible although the steam pre-check passed: " +
                    sol.message;
        return r;
    }
    if (sol.status != LpStatus::Optimal) {
        r.status = DispatchStatus::Error;
        r.message = std::string("LP solve failed: ") + to_string(sol.status) + " " +
                    sol.message;
        return r;
    }

    r.status = DispatchStatus::Optimal;
    r.objective_eur = sol.objective;
    r.initial_charge_cost_eur = P.c0_eur;
    r.p_eb_w.resize(T);
    r.p_grid_w.resize(T);
    r.p_b_charge_w.assign(T, 0.0);
    r.p_b_discharge_w.assign(T, 0.0);
    r.p_fcr_w.assign(T, 0.0);
    r.m_dot_eb_kg_s.resize(T);
    r.m_dot_sa_charge_kg_s.assign(T, 0.0);
    r.m_dot_sa_discharge_kg_s.assign(T, 0.0);
    r.m_sa_kg.assign(T + 1, 0.9 * config.m_sa_max_kg);
    r.q_b_wh.assign(T + 1, battery.soc_init_frac * config.q_b_max_wh);
    for (std::size_t t = 0; t < T; ++t) {
        const auto x = [&](int v) { return v >= 0 ? sol.x[static_cast<std::size_t>(v)] : 0.0; };
        const double p_eb = x(P.v_p_eb[t]);
        const double pb_c = x(P.v_pb_c[t]);
        const double pb_d = x(P.v_pb_d[t]);
        r.p_eb_w[t] = 1000.0 * p_eb;
        r.p_b_charge_w[t] = 1000.0 * pb_c;
        r.p_b_discharge_w[t] = 1000.0 * pb_d;
        r.p_grid_w[t] = 1000.0 * (p_eb + pb_c - pb_d);
        r.m_dot_eb_kg_s[t] = p_eb / P.dh_tot_kj_per_kg;
        if (P.has_sa) {
            r.m_dot_sa_charge_kg_s[t] = x(P.v_msa_c[t]);
            r.m_dot_sa_discharge_kg_s[t] = x(P.v_msa_d[t]);
            r.m_sa_kg[t + 1] = x(P.v_m_sa[t]);
        }
        if (P.has_bess) r.q_b_wh[t + 1] = 1000.0 * x(P.v_q_b[t]);
        if (P.has_fcr && scenario.fcr.effective_price(t) > 0)
            r.p_fcr_w[t] =
                1000.0 * x(P.v_p_fcr[static_cast<std::size_t>(P.fcr_block_of_step[t])]);
        // commitments in zero-price hours are free variables of the optimum;
        // they are reported as zero, which is feasible and earns the same
    }
    r.peak_grid_power_w = *std::max_element(r.p_grid_w.begin(), r.p_grid_w.end());

    r.lp_verification = verify_solution(P.lp, sol, opts.verify_tol);
    r.recheck = recheck_dispatch(r, scenario, config, coeffs, battery, opts.verify_tol);
    if (!r.lp_verification.pass)
        r.message = "LP verification failed at " + r.lp_verification.worst;
    else if (!r.recheck.pass)
        r.message = "constraint recheck failed at " + r.recheck.worst;
    return r;
}

struct KpiRecord {
    double max_grid_power_w = 0;
    double mean_grid_power_w = 0;
    double total_grid_energy_wh = 0;
    std::optional<double> daily_avg_sa_cycles;
};

inline KpiRecord extract_kpis(const DispatchResult& r, const Scenario& scenario,
                              const SystemConfig& config) {
    if (r.status != DispatchStatus::Optimal)
        throw std::invalid_argument("extract_kpis: result is not optimal");
    KpiRecord k;
    double sum = 0;
    for (double p : r.p_grid_w) sum += p;
    k.max_grid_power_w = *std::max_element(r.p_grid_w.begin(), r.p_grid_w.end());
    k.mean_grid_power_w = sum / static_cast<double>(r.p_grid_w.size());
    k.total_grid_energy_wh = sum * scenario.dt_hours();
    if (config.m_sa_max_kg > 0) {
        double throughput = 0;  // kg
        for (std::size_t t = 0; t < scenario.horizon_steps; ++t)
            throughput += std::abs(r.m_dot_sa_charge_kg_s[t] - r.m_dot_sa_discharge_kg_s[t]) *
                          scenario.dt_s;
        const double days =
            static_cast<double>(scenario.horizon_steps) * scenario.dt_s / 86400.0;
        k.daily_avg_sa_cycles = throughput / (2.0 * config.m_sa_max_kg * days);
    }
    return k;
}

}  // namespace steamflex
