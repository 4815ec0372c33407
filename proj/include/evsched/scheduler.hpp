#ifndef EVSCHED_SCHEDULER_HPP
#define EVSCHED_SCHEDULER_HPP

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evsched/branch_and_bound.hpp"
#include "evsched/fleet.hpp"
#include "evsched/milp.hpp"
#include "evsched/scenario.hpp"

namespace evsched {

/// Where each decision variable of one green vehicle lives in the model.
/// Index k runs over the stay slots arrive+1 .. leave.
struct GreenVarBlock {
    int fleet_index = -1;
    int arrive_slot = 0;
    int leave_slot = 0;
    std::vector<int> charge, discharge, mode, soc;

    int stay_slots() const { return leave_slot - arrive_slot; }
    int slot_of(int k) const { return arrive_slot + 1 + k; } // 1-based model slot
};

/// Variable ids of the built model, for extraction and for fixing binaries
/// in enumeration oracles.
struct ScheduleVarMap {
    std::vector<int> grid_import, grid_export, grid_mode; // per slot
    std::vector<GreenVarBlock> greens;
};

/// Signed contributions to the trading cost; costs are positive, revenues
/// negative, and the sum is the reported total.
struct CostBreakdown {
    double green_discharge_payments = 0.0;
    double grid_purchase_cost = 0.0;
    double green_charge_revenue = 0.0;
    double premium_revenue = 0.0;
    double conservative_revenue = 0.0;
    double grid_sale_revenue = 0.0;

    double total() const {
        return green_discharge_payments + grid_purchase_cost + green_charge_revenue +
               premium_revenue + conservative_revenue + grid_sale_revenue;
    }
};

struct EvTrajectory {
    std::string ev_id;
    EvClass ev_class = EvClass::Premium;
    bool premium_treated = false;
    bool target_reachable = true;
    std::vector<double> charge_kwh;    // length T
    std::vector<double> discharge_kwh; // length T, all zero for non-green
    std::vector<double> soc_kwh;       // length T
    std::vector<int> mode;             // greens: -1 outside the stay; others: empty
};

struct Schedule {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> grid_import_kwh; // bought from the grid per slot
    std::vector<double> grid_export_kwh; // sold to the grid per slot
    std::vector<int> grid_mode;          // 1 = exporting side enabled
    std::vector<EvTrajectory> evs;       // same order as scenario.fleet
    CostBreakdown breakdown;
    double total_cost_cents = std::numeric_limits<double>::quiet_NaN();
    double bound_gap = 0.0;
    long node_count = 0;
    double solve_seconds = 0.0;
    std::vector<std::string> warnings;
    std::string infeasible_hint;
};

struct Violation {
    std::string family; // constraint family, e.g. "(14) rate/complementarity"
    std::string message;
};

namespace detail {

struct SlotPrices {
    std::vector<double> premium;         // grid sell + markup
    std::vector<double> green_charge;    // premium * eta
    std::vector<double> green_discharge; // green charge * epsilon
};

inline SlotPrices slot_prices(const Scenario& scenario) {
    SlotPrices p;
    const int T = scenario.grid.slot_count;
    p.premium.resize(T);
    p.green_charge.resize(T);
    p.green_discharge.resize(T);
    for (int t = 0; t < T; ++t) {
        p.premium[t] =
            premium_price(scenario.prices.grid_sell_cents_per_kwh[t], scenario.tariff.markup_cents);
        p.green_charge[t] = green_charge_price(p.premium[t], scenario.tariff.green_charge_factor);
        p.green_discharge[t] =
            green_discharge_price(p.green_charge[t], scenario.tariff.green_discharge_factor);
    }
    return p;
}

} // namespace detail

/// Builds the scheduling MIP. Decision variables are the per-slot grid flows
/// with their direction indicator, and per green vehicle and stay slot the
/// charge/discharge energies, the mode indicator and the SOC. Constraint
/// families, per slot / vehicle:
///   (8)  supply covers demand: gen + discharge + import >= charge + fixed + export
///   (9)/(10) SOC recursion with charging efficiency, anchored at plug-in
///   (11) terminal SOC reaches the requested target (waived and reported when
///        the target is unreachable even at the maximum rate)
///   (12) SOC safety floor (variable lower bound)
///   (13) discharge floor: soc >= floor - capacity * mode
///   (14) rate caps and charge/discharge exclusivity via the mode binary
///   (15)/(16) grid rate caps and import/export exclusivity
/// The fixed premium/conservative revenue enters as a constant objective
/// offset, so the reported objective is the full trading cost.
inline std::pair<MilpModel, ScheduleVarMap> build_model(const Scenario& scenario,
                                                        const FixedLoadProfile& fixed) {
    scenario.validate();
    const int T = scenario.grid.slot_count;
    if (T < 1) throw ValidationError("build_model: empty time grid");
    if (static_cast<int>(fixed.demand_kwh.size()) != T) {
        throw ValidationError("build_model: fixed load does not match the time grid");
    }
    const GenerationProfile gen =
        station_generation(scenario.pv, scenario.irradiance, scenario.grid);
    const detail::SlotPrices prices = detail::slot_prices(scenario);
    const double e_gmax = scenario.config.grid_max_kwh_per_slot;
    const double mu = scenario.config.battery_efficiency;

    MilpModel model;
    ScheduleVarMap map;
    map.grid_import.resize(T);
    map.grid_export.resize(T);
    map.grid_mode.resize(T);
    for (int t = 0; t < T; ++t) {
        const std::string suffix = "_t" + std::to_string(t + 1);
        map.grid_import[t] = model.add_variable(0.0, e_gmax, false, "imp" + suffix);
        map.grid_export[t] = model.add_variable(0.0, e_gmax, false, "exp" + suffix);
        map.grid_mode[t] = model.add_variable(0.0, 1.0, true, "x" + suffix);
        model.set_objective_coeff(map.grid_import[t], scenario.prices.grid_sell_cents_per_kwh[t]);
        model.set_objective_coeff(map.grid_export[t], -scenario.prices.grid_buy_cents_per_kwh[t]);
    }
    for (int i = 0; i < static_cast<int>(scenario.fleet.size()); ++i) {
        const EvSpec& spec = scenario.fleet[i];
        if (spec.ev_class != EvClass::Green) continue;
        GreenVarBlock block;
        block.fleet_index = i;
        block.arrive_slot = spec.arrive_slot;
        block.leave_slot = spec.leave_slot;
        for (int t = spec.arrive_slot + 1; t <= spec.leave_slot; ++t) {
            const std::string suffix = "_" + spec.id + "_t" + std::to_string(t);
            // While even max-rate charging cannot have lifted the SOC to the
            // discharge floor yet, every integer solution has the mode on the
            // charge side; fix those binaries up front.
            const double max_soc_by_t =
                spec.initial_soc_kwh +
                mu * spec.max_rate_kwh_per_slot * static_cast<double>(t - spec.arrive_slot);
            const double mode_lb = max_soc_by_t < spec.green_floor_kwh - 1e-9 ? 1.0 : 0.0;
            const int c = model.add_variable(0.0, spec.max_rate_kwh_per_slot, false, "c" + suffix);
            const int d = model.add_variable(0.0, spec.max_rate_kwh_per_slot, false, "d" + suffix);
            const int y = model.add_variable(mode_lb, 1.0, true, "y" + suffix);
            const int s =
                model.add_variable(spec.min_soc_kwh, spec.capacity_kwh, false, "s" + suffix);
            block.charge.push_back(c);
            block.discharge.push_back(d);
            block.mode.push_back(y);
            block.soc.push_back(s);
            model.set_objective_coeff(c, -prices.green_charge[t - 1]);
            model.set_objective_coeff(d, prices.green_discharge[t - 1]);
        }
        map.greens.push_back(std::move(block));
    }
    model.set_objective_offset(-fixed.total_revenue_cents);

    // (8) energy balance per slot
    for (int t = 0; t < T; ++t) {
        std::vector<LinearTerm> terms;
        terms.push_back({map.grid_import[t], 1.0});
        terms.push_back({map.grid_export[t], -1.0});
        for (const GreenVarBlock& block : map.greens) {
            const int k = t + 1 - (block.arrive_slot + 1);
            if (k < 0 || k >= block.stay_slots()) continue;
            terms.push_back({block.discharge[k], 1.0});
            terms.push_back({block.charge[k], -1.0});
        }
        model.add_constraint(std::move(terms), RowSense::GreaterEqual,
                             fixed.demand_kwh[t] - gen.energy_kwh[t],
                             "bal_t" + std::to_string(t + 1));
    }
    // per green vehicle rows
    for (const GreenVarBlock& block : map.greens) {
        const EvSpec& spec = scenario.fleet[block.fleet_index];
        for (int k = 0; k < block.stay_slots(); ++k) {
            const std::string suffix = "_" + spec.id + "_t" + std::to_string(block.slot_of(k));
            // (9)/(10) SOC recursion
            if (k == 0) {
                model.add_constraint({{block.soc[k], 1.0},
                                      {block.charge[k], -mu},
                                      {block.discharge[k], 1.0}},
                                     RowSense::Equal, spec.initial_soc_kwh, "soc" + suffix);
            } else {
                model.add_constraint({{block.soc[k], 1.0},
                                      {block.soc[k - 1], -1.0},
                                      {block.charge[k], -mu},
                                      {block.discharge[k], 1.0}},
                                     RowSense::Equal, 0.0, "soc" + suffix);
            }
            // (13) discharge floor, big-M deactivated in charge mode. The SOC
            // never sits below min_soc, so floor - min_soc is the smallest
            // constant that still frees the row on the charge side.
            const double big_m = std::max(0.0, spec.green_floor_kwh - spec.min_soc_kwh);
            model.add_constraint({{block.soc[k], 1.0}, {block.mode[k], big_m}},
                                 RowSense::GreaterEqual, spec.green_floor_kwh, "floor" + suffix);
            // (14) rate caps tied to the mode binary
            model.add_constraint({{block.charge[k], 1.0},
                                  {block.mode[k], -spec.max_rate_kwh_per_slot}},
                                 RowSense::LessEqual, 0.0, "crate" + suffix);
            model.add_constraint({{block.discharge[k], 1.0},
                                  {block.mode[k], spec.max_rate_kwh_per_slot}},
                                 RowSense::LessEqual, spec.max_rate_kwh_per_slot,
                                 "drate" + suffix);
        }
        // (11) terminal SOC, waived when unreachable
        if (target_reachable(spec, mu)) {
            model.add_constraint({{block.soc[block.stay_slots() - 1], 1.0}},
                                 RowSense::GreaterEqual, spec.target_soc_kwh, "term_" + spec.id);
        }
    }
    // (15)/(16) grid caps tied to the direction binary
    for (int t = 0; t < T; ++t) {
        const std::string suffix = "_t" + std::to_string(t + 1);
        model.add_constraint({{map.grid_export[t], 1.0}, {map.grid_mode[t], -e_gmax}},
                             RowSense::LessEqual, 0.0, "exprate" + suffix);
        model.add_constraint({{map.grid_import[t], 1.0}, {map.grid_mode[t], e_gmax}},
                             RowSense::LessEqual, e_gmax, "imprate" + suffix);
    }
    return {std::move(model), std::move(map)};
}

namespace detail {

inline double snap_zero(double v) { return std::abs(v) < 1e-9 ? 0.0 : v; }

inline CostBreakdown breakdown_from_flows(const Scenario& scenario, const Schedule& schedule) {
    CostBreakdown b;
    const SlotPrices prices = slot_prices(scenario);
    const int T = scenario.grid.slot_count;
    for (int t = 0; t < T; ++t) {
        b.grid_purchase_cost +=
            scenario.prices.grid_sell_cents_per_kwh[t] * schedule.grid_import_kwh[t];
        b.grid_sale_revenue -=
            scenario.prices.grid_buy_cents_per_kwh[t] * schedule.grid_export_kwh[t];
    }
    for (std::size_t i = 0; i < schedule.evs.size(); ++i) {
        const EvTrajectory& ev = schedule.evs[i];
        const EvSpec& spec = scenario.fleet[i];
        for (int t = 0; t < T; ++t) {
            switch (ev.ev_class) {
                case EvClass::Green:
                    b.green_charge_revenue -= prices.green_charge[t] * ev.charge_kwh[t];
                    b.green_discharge_payments += prices.green_discharge[t] * ev.discharge_kwh[t];
                    break;
                case EvClass::Premium:
                    b.premium_revenue -= prices.premium[t] * ev.charge_kwh[t];
                    break;
                case EvClass::Conservative: {
                    const double price =
                        ev.premium_treated
                            ? prices.premium[t]
                            : conservative_price(prices.premium[t],
                                                 scenario.tariff.conservative_spread_cents,
                                                 spec.max_rate_kwh_per_slot,
                                                 conservative_rate(spec,
                                                                   scenario.config.battery_efficiency));
                    b.conservative_revenue -= price * ev.charge_kwh[t];
                    break;
                }
            }
        }
    }
    return b;
}

// Feasible incumbent for the warm start: every green vehicle charges
// greedily at the maximum rate until its target with the mode held on the
// charge side, and the grid covers each slot's deficit or absorbs its
// surplus. Returns empty when a grid cap would be breached (the instance is
// then decided by the tree itself).
inline std::vector<double> greedy_witness(const Scenario& scenario, const FixedLoadProfile& fixed,
                                          const MilpModel& model, const ScheduleVarMap& map) {
    const int T = scenario.grid.slot_count;
    const GenerationProfile gen =
        station_generation(scenario.pv, scenario.irradiance, scenario.grid);
    const double mu = scenario.config.battery_efficiency;
    std::vector<double> x(model.var_count(), 0.0);
    std::vector<double> net_demand = fixed.demand_kwh;
    for (int t = 0; t < T; ++t) net_demand[t] -= gen.energy_kwh[t];
    for (const GreenVarBlock& block : map.greens) {
        const EvSpec& spec = scenario.fleet[block.fleet_index];
        double soc = spec.initial_soc_kwh;
        for (int k = 0; k < block.stay_slots(); ++k) {
            double charge = 0.0;
            if (soc < spec.target_soc_kwh - 1e-12) {
                charge = std::min(spec.max_rate_kwh_per_slot, (spec.target_soc_kwh - soc) / mu);
                soc += mu * charge;
            }
            x[block.charge[k]] = charge;
            x[block.mode[k]] = 1.0;
            x[block.soc[k]] = soc;
            net_demand[block.slot_of(k) - 1] += charge;
        }
    }
    for (int t = 0; t < T; ++t) {
        if (net_demand[t] > scenario.config.grid_max_kwh_per_slot + 1e-9 ||
            -net_demand[t] > scenario.config.grid_max_kwh_per_slot + 1e-9) {
            return {};
        }
        if (net_demand[t] > 0.0) {
            x[map.grid_import[t]] = net_demand[t];
            x[map.grid_mode[t]] = 0.0;
        } else {
            x[map.grid_export[t]] = -net_demand[t];
            x[map.grid_mode[t]] = 1.0;
        }
    }
    return x;
}

// Time-ordered relax-and-fix: walk the horizon, round and pin each slot's
// mode binaries against the current relaxation, and repair an infeasible
// pinning by flipping modes back to the charge side (a charge-capable
// suffix can always complete a feasible prefix). Returns a fully integral
// solution vector, or empty when even the repairs fail.
inline std::vector<double> relax_and_fix_incumbent(const Scenario& scenario,
                                                   const MilpModel& model,
                                                   const ScheduleVarMap& map) {
    const int T = scenario.grid.slot_count;
    const int n = model.var_count();
    std::vector<std::vector<int>> mode_groups(T);
    for (const GreenVarBlock& block : map.greens) {
        for (int k = 0; k < block.stay_slots(); ++k) {
            mode_groups[block.slot_of(k) - 1].push_back(block.mode[k]);
        }
    }
    std::vector<double> lo(n), hi(n);
    for (int j = 0; j < n; ++j) {
        lo[j] = model.vars()[j].lower;
        hi[j] = model.vars()[j].upper;
    }
    LpResult lp = solve_lp(model, lo, hi);
    if (lp.status != SolveStatus::Optimal) return {};
    for (int t = 0; t < T; ++t) {
        std::vector<int> zeros;
        for (int v : mode_groups[t]) {
            const double val = std::min(std::max(std::round(lp.values[v]), lo[v]), hi[v]);
            lo[v] = hi[v] = val;
            if (val == 0.0) zeros.push_back(v);
        }
        LpResult next = solve_lp(model, lo, hi);
        if (next.status != SolveStatus::Optimal) {
            bool repaired = false;
            for (int v : zeros) {
                lo[v] = hi[v] = 1.0;
                const LpResult retry = solve_lp(model, lo, hi);
                if (retry.status == SolveStatus::Optimal) {
                    next = retry;
                    repaired = true;
                    break;
                }
                lo[v] = hi[v] = 0.0;
            }
            if (!repaired) {
                for (int v : zeros) lo[v] = hi[v] = 1.0;
                next = solve_lp(model, lo, hi);
                if (next.status != SolveStatus::Optimal) return {};
            }
        }
        lp = next;
        const int xv = map.grid_mode[t];
        const double val = std::min(std::max(std::round(lp.values[xv]), lo[xv]), hi[xv]);
        lo[xv] = hi[xv] = val;
        next = solve_lp(model, lo, hi);
        if (next.status != SolveStatus::Optimal) {
            lo[xv] = hi[xv] = 1.0 - val;
            next = solve_lp(model, lo, hi);
            if (next.status != SolveStatus::Optimal) return {};
        }
        lp = next;
    }
    for (int j = 0; j < n; ++j) {
        if (model.vars()[j].integral &&
            std::abs(lp.values[j] - std::round(lp.values[j])) > 1e-7) {
            return {};
        }
    }
    return lp.values;
}

// One-vehicle neighbourhood improvement: re-solve the model with every mode
// binary pinned to the incumbent except one green vehicle's (grid modes stay
// free), rotating over vehicles until a pass yields no gain. Each
// neighbourhood is a small exact solve, so the loop is deterministic and
// monotone.
inline void improve_incumbent_lns(const Scenario& scenario, const MilpModel& model,
                                  const ScheduleVarMap& map, std::vector<double>& incumbent,
                                  long node_budget) {
    if (incumbent.empty() || map.greens.empty() || node_budget <= 0) return;
    const int n = model.var_count();
    double best = model.objective_value(incumbent);
    std::vector<char> in_neighbourhood(n, 0);
    for (int pass = 0; pass < 3 && node_budget > 0; ++pass) {
        const double before = best;
        for (const GreenVarBlock& block : map.greens) {
            if (node_budget <= 0) break;
            std::fill(in_neighbourhood.begin(), in_neighbourhood.end(), 0);
            for (int v : block.mode) in_neighbourhood[v] = 1;
            for (int v : map.grid_mode) in_neighbourhood[v] = 1;
            MilpModel sub;
            for (int j = 0; j < n; ++j) {
                const MilpVariable& v = model.vars()[j];
                const bool pin = v.integral && !in_neighbourhood[j];
                sub.add_variable(pin ? incumbent[j] : v.lower, pin ? incumbent[j] : v.upper,
                                 v.integral, v.name);
            }
            for (const MilpRow& row : model.rows()) {
                sub.add_constraint(row.terms, row.sense, row.rhs, row.name);
            }
            for (int j = 0; j < n; ++j) sub.set_objective_coeff(j, model.objective()[j]);
            sub.set_objective_offset(model.objective_offset());
            // node-capped and free of wall-clock limits so results stay
            // byte-reproducible across machines
            SolveOptions sub_options;
            sub_options.node_limit = std::min<long>(200, node_budget);
            sub_options.initial_solution = incumbent;
            const MilpSolution sol = solve(sub, sub_options);
            node_budget -= sol.node_count;
            if (!sol.values.empty() && sol.objective < best - 1e-7) {
                best = sol.objective;
                incumbent = sol.values;
            }
        }
        if (best > before - 1e-6) break;
    }
}

inline std::string diagnose_infeasibility(const Scenario& scenario,
                                          const FixedLoadProfile& fixed) {
    const GenerationProfile gen =
        station_generation(scenario.pv, scenario.irradiance, scenario.grid);
    for (int t = 0; t < scenario.grid.slot_count; ++t) {
        double discharge_capacity = 0.0;
        for (const EvSpec& spec : scenario.fleet) {
            if (spec.ev_class == EvClass::Green && t + 1 > spec.arrive_slot &&
                t + 1 <= spec.leave_slot) {
                discharge_capacity += spec.max_rate_kwh_per_slot;
            }
        }
        const double supply =
            gen.energy_kwh[t] + scenario.config.grid_max_kwh_per_slot + discharge_capacity;
        if (supply < fixed.demand_kwh[t] - 1e-9) {
            return "energy balance (8) cannot hold at slot " + std::to_string(t + 1) +
                   ": fixed demand exceeds generation plus grid and discharge capacity "
                   "(families (15)-(16))";
        }
    }
    return "no point satisfies families (8)-(16); green terminal targets (11) and the "
           "discharge floor (13) are the usual suspects";
}

} // namespace detail

/// Per-vehicle independent re-check of every constraint family plus the
/// cost recomputation. Returns one entry per violation; an empty list means
/// the schedule is feasible at the 1e-6 tolerance. This walks the raw flows
/// directly and shares no code with build_model's row assembly.
inline std::vector<Violation> validate_schedule(const Scenario& scenario,
                                                const Schedule& schedule) {
    std::vector<Violation> out;
    const int T = scenario.grid.slot_count;
    const double tol = 1e-6;
    const auto add = [&](const std::string& family, const std::string& message) {
        out.push_back({family, message});
    };
    if (static_cast<int>(schedule.grid_import_kwh.size()) != T ||
        static_cast<int>(schedule.grid_export_kwh.size()) != T ||
        static_cast<int>(schedule.grid_mode.size()) != T ||
        schedule.evs.size() != scenario.fleet.size()) {
        add("shape", "schedule shapes do not match the scenario");
        return out;
    }
    for (std::size_t i = 0; i < schedule.evs.size(); ++i) {
        const EvTrajectory& ev = schedule.evs[i];
        if (static_cast<int>(ev.charge_kwh.size()) != T ||
            static_cast<int>(ev.discharge_kwh.size()) != T ||
            static_cast<int>(ev.soc_kwh.size()) != T || ev.ev_id != scenario.fleet[i].id ||
            ev.ev_class != scenario.fleet[i].ev_class) {
            add("shape", "EV '" + scenario.fleet[i].id + "': trajectory does not match the fleet");
            return out;
        }
    }
    const GenerationProfile gen =
        station_generation(scenario.pv, scenario.irradiance, scenario.grid);
    const detail::SlotPrices prices = detail::slot_prices(scenario);
    const double mu = scenario.config.battery_efficiency;
    const double e_gmax = scenario.config.grid_max_kwh_per_slot;

    // (8) supply covers demand, slot by slot
    for (int t = 0; t < T; ++t) {
        double supply = gen.energy_kwh[t] + schedule.grid_import_kwh[t];
        double demand = schedule.grid_export_kwh[t];
        for (const EvTrajectory& ev : schedule.evs) {
            supply += ev.discharge_kwh[t];
            demand += ev.charge_kwh[t];
        }
        if (demand - supply > tol * std::max(1.0, std::abs(demand))) {
            add("(8) energy balance", "slot " + std::to_string(t + 1) + ": demand " +
                                          std::to_string(demand) + " kWh exceeds supply " +
                                          std::to_string(supply) + " kWh");
        }
    }
    // (15)/(16) grid caps and exclusivity
    for (int t = 0; t < T; ++t) {
        const int x = schedule.grid_mode[t];
        const std::string slot = "slot " + std::to_string(t + 1);
        if (x != 0 && x != 1) {
            add("(15)-(16) grid rate/complementarity", slot + ": grid mode must be 0 or 1");
            continue;
        }
        const double cap_scale = std::max(1.0, e_gmax);
        if (schedule.grid_import_kwh[t] < -tol || schedule.grid_export_kwh[t] < -tol) {
            add("(15)-(16) grid rate/complementarity", slot + ": negative grid flow");
        }
        if (schedule.grid_export_kwh[t] > x * e_gmax + tol * cap_scale) {
            add("(15)-(16) grid rate/complementarity",
                slot + ": export exceeds the enabled grid capacity");
        }
        if (schedule.grid_import_kwh[t] > (1 - x) * e_gmax + tol * cap_scale) {
            add("(15)-(16) grid rate/complementarity",
                slot + ": import exceeds the enabled grid capacity");
        }
    }
    for (std::size_t i = 0; i < schedule.evs.size(); ++i) {
        const EvTrajectory& ev = schedule.evs[i];
        const EvSpec& spec = scenario.fleet[i];
        const std::string who = "EV '" + spec.id + "'";
        const bool green = spec.ev_class == EvClass::Green;
        const double soc_scale = std::max(1.0, spec.capacity_kwh);
        // (9) anchored at plug-in
        if (std::abs(ev.soc_kwh[spec.arrive_slot - 1] - spec.initial_soc_kwh) > tol * soc_scale) {
            add("(9) soc at plug-in", who + ": SOC at the arrival slot differs from the plug-in SOC");
        }
        for (int t = 0; t < T; ++t) {
            const int slot = t + 1;
            const bool staying = slot > spec.arrive_slot && slot <= spec.leave_slot;
            const std::string where = who + ", slot " + std::to_string(slot);
            if (!staying) {
                if (std::abs(ev.charge_kwh[t]) > tol || std::abs(ev.discharge_kwh[t]) > tol) {
                    add("(14) rate/complementarity", where + ": energy flow outside the stay");
                }
                continue;
            }
            // (10) SOC recursion
            const double prev = ev.soc_kwh[t - 1]; // arrive_slot >= 1, so t >= 1 here
            const double expected = prev + mu * ev.charge_kwh[t] - ev.discharge_kwh[t];
            if (std::abs(ev.soc_kwh[t] - expected) > tol * soc_scale) {
                add("(10) soc update", where + ": SOC does not follow the charge/discharge update");
            }
            // (12) safety floor and capacity
            if (ev.soc_kwh[t] < spec.min_soc_kwh - tol * soc_scale) {
                add("(12) minimum soc", where + ": SOC below the safety floor");
            }
            if (ev.soc_kwh[t] > spec.capacity_kwh + tol * soc_scale) {
                add("(11) terminal/capacity", where + ": SOC above capacity");
            }
            // (14) rates, modes, exclusivity
            if (ev.charge_kwh[t] < -tol || ev.discharge_kwh[t] < -tol) {
                add("(14) rate/complementarity", where + ": negative energy flow");
            }
            const double rate_scale = std::max(1.0, spec.max_rate_kwh_per_slot);
            if (green) {
                const int y = ev.mode.empty() ? -1 : ev.mode[t];
                if (y != 0 && y != 1) {
                    add("(14) rate/complementarity", where + ": mode must be 0 or 1 during the stay");
                    continue;
                }
                if (ev.charge_kwh[t] > y * spec.max_rate_kwh_per_slot + tol * rate_scale) {
                    add("(14) rate/complementarity",
                        where + ": charging beyond the mode-enabled rate");
                }
                if (ev.discharge_kwh[t] > (1 - y) * spec.max_rate_kwh_per_slot + tol * rate_scale) {
                    add("(14) rate/complementarity",
                        where + ": discharging beyond the mode-enabled rate");
                }
                // (13) discharge only at or above the green floor
                if (ev.discharge_kwh[t] > tol &&
                    ev.soc_kwh[t] < spec.green_floor_kwh - tol * soc_scale) {
                    add("(13) discharge floor", where + ": discharge left the SOC below the floor");
                }
            } else {
                if (ev.charge_kwh[t] > spec.max_rate_kwh_per_slot + tol * rate_scale) {
                    add("(14) rate/complementarity", where + ": charging beyond the maximum rate");
                }
                if (std::abs(ev.discharge_kwh[t]) > tol) {
                    add("(14) rate/complementarity", where + ": non-green vehicle discharging");
                }
            }
        }
        // (11) terminal SOC
        if (ev.target_reachable &&
            ev.soc_kwh[spec.leave_slot - 1] < spec.target_soc_kwh - tol * soc_scale) {
            add("(11) terminal/capacity", who + ": leaves below the requested SOC");
        }
    }
    // Objective recomputation from raw flows and prices
    double gamma = 0.0;
    for (int t = 0; t < T; ++t) {
        gamma += scenario.prices.grid_sell_cents_per_kwh[t] * schedule.grid_import_kwh[t];
        gamma -= scenario.prices.grid_buy_cents_per_kwh[t] * schedule.grid_export_kwh[t];
    }
    for (std::size_t i = 0; i < schedule.evs.size(); ++i) {
        const EvTrajectory& ev = schedule.evs[i];
        const EvSpec& spec = scenario.fleet[i];
        for (int t = 0; t < T; ++t) {
            switch (ev.ev_class) {
                case EvClass::Green:
                    gamma += prices.green_discharge[t] * ev.discharge_kwh[t] -
                             prices.green_charge[t] * ev.charge_kwh[t];
                    break;
                case EvClass::Premium:
                    gamma -= prices.premium[t] * ev.charge_kwh[t];
                    break;
                case EvClass::Conservative:
                    gamma -= (ev.premium_treated
                                  ? prices.premium[t]
                                  : conservative_price(prices.premium[t],
                                                       scenario.tariff.conservative_spread_cents,
                                                       spec.max_rate_kwh_per_slot,
                                                       conservative_rate(spec, mu))) *
                             ev.charge_kwh[t];
                    break;
            }
        }
    }
    if (std::abs(gamma - schedule.total_cost_cents) >
        tol * std::max(1.0, std::abs(schedule.total_cost_cents))) {
        add("(7) objective", "recomputed trading cost " + std::to_string(gamma) +
                                 " differs from the reported " +
                                 std::to_string(schedule.total_cost_cents));
    }
    return out;
}

/// Solves the scheduling MIP for a scenario and extracts a validated
/// schedule. Unreachable charging targets are waived with a warning instead
/// of failing the whole instance; a discharge factor below 0.79 gets a
/// convergence warning and runs under the configured limits.
inline Schedule optimize(const Scenario& scenario, const SolveOptions& options = {}) {
    scenario.validate();
    const int T = scenario.grid.slot_count;
    const FixedLoadProfile fixed =
        build_fixed_load(scenario.fleet, scenario.prices, scenario.tariff,
                         scenario.config.battery_efficiency, scenario.grid);
    auto [model, map] = build_model(scenario, fixed);
    SolveOptions run_options = options;
    run_options.initial_solution = detail::relax_and_fix_incumbent(scenario, model, map);
    if (run_options.initial_solution.empty()) {
        run_options.initial_solution = detail::greedy_witness(scenario, fixed, model, map);
    }
    detail::improve_incumbent_lns(scenario, model, map, run_options.initial_solution,
                                  options.heuristic_node_budget);
    const MilpSolution solution = solve(model, run_options);

    Schedule schedule;
    schedule.status = solution.status;
    schedule.node_count = solution.node_count;
    schedule.solve_seconds = solution.solve_seconds;
    schedule.bound_gap = solution.bound_gap;
    if (scenario.tariff.green_discharge_factor < 0.79) {
        schedule.warnings.push_back(
            "green_discharge_factor below 0.79 is known to slow convergence; "
            "running under the configured node/time limits");
    }
    for (const EvSpec& spec : scenario.fleet) {
        if (!target_reachable(spec, scenario.config.battery_efficiency)) {
            schedule.warnings.push_back("EV '" + spec.id +
                                        "': target SOC unreachable within its stay; charging at "
                                        "the maximum rate and waiving the target requirement");
        }
    }
    if (solution.status == SolveStatus::Infeasible) {
        schedule.infeasible_hint = detail::diagnose_infeasibility(scenario, fixed);
        return schedule;
    }
    if (solution.status == SolveStatus::Unbounded || solution.values.empty()) {
        // limit hit before any incumbent: report status, no flows
        return schedule;
    }
    if (solution.status == SolveStatus::LimitReached) {
        schedule.warnings.push_back("solver limit reached; schedule is the best incumbent and "
                                    "may be suboptimal (bound gap " +
                                    std::to_string(solution.bound_gap) + " cents)");
    }

    const std::vector<double>& x = solution.values;
    schedule.grid_import_kwh.resize(T);
    schedule.grid_export_kwh.resize(T);
    schedule.grid_mode.resize(T);
    for (int t = 0; t < T; ++t) {
        schedule.grid_import_kwh[t] = detail::snap_zero(x[map.grid_import[t]]);
        schedule.grid_export_kwh[t] = detail::snap_zero(x[map.grid_export[t]]);
        schedule.grid_mode[t] = static_cast<int>(std::lround(x[map.grid_mode[t]]));
    }
    schedule.evs.resize(scenario.fleet.size());
    std::size_t fixed_index = 0;
    for (std::size_t i = 0; i < scenario.fleet.size(); ++i) {
        const EvSpec& spec = scenario.fleet[i];
        EvTrajectory& ev = schedule.evs[i];
        ev.ev_id = spec.id;
        ev.ev_class = spec.ev_class;
        ev.discharge_kwh.assign(T, 0.0);
        if (spec.ev_class != EvClass::Green) {
            const FixedEvSchedule& entry = fixed.evs[fixed_index++];
            ev.premium_treated = entry.premium_treated;
            ev.target_reachable = entry.target_reached;
            ev.charge_kwh = entry.charge_kwh;
            ev.soc_kwh = entry.soc_kwh;
        }
    }
    for (const GreenVarBlock& block : map.greens) {
        const EvSpec& spec = scenario.fleet[block.fleet_index];
        EvTrajectory& ev = schedule.evs[block.fleet_index];
        ev.target_reachable = target_reachable(spec, scenario.config.battery_efficiency);
        ev.charge_kwh.assign(T, 0.0);
        ev.soc_kwh.assign(T, spec.initial_soc_kwh);
        ev.mode.assign(T, -1);
        for (int k = 0; k < block.stay_slots(); ++k) {
            const int t = block.slot_of(k) - 1;
            ev.charge_kwh[t] = detail::snap_zero(x[block.charge[k]]);
            ev.discharge_kwh[t] = detail::snap_zero(x[block.discharge[k]]);
            ev.mode[t] = static_cast<int>(std::lround(x[block.mode[k]]));
            ev.soc_kwh[t] = x[block.soc[k]];
        }
        for (int t = spec.leave_slot; t < T; ++t) ev.soc_kwh[t] = ev.soc_kwh[spec.leave_slot - 1];
    }
    schedule.breakdown = detail::breakdown_from_flows(scenario, schedule);
    schedule.total_cost_cents = solution.objective;
    const auto violations = validate_schedule(scenario, schedule);
    if (!violations.empty()) {
        throw std::logic_error("optimize produced a schedule that fails validation: " +
                               violations.front().family + ": " + violations.front().message);
    }
    return schedule;
}

struct EarlyLeaveEntry {
    std::string ev_id;
    EvClass ev_class = EvClass::Premium;
    double soc_kwh = 0.0;
    double target_kwh = 0.0;
    double floor_kwh = std::numeric_limits<double>::quiet_NaN(); // greens only
    bool floor_encoding_ok = true;
};

struct EarlyLeaveReport {
    std::vector<EarlyLeaveEntry> entries;
    std::vector<std::string> omitted; // vehicles whose stay is shorter than k
};

/// SOC of every vehicle k slots before its declared leave slot. Green
/// vehicles also report whether the discharge-floor encoding holds at that
/// slot (SOC at or above the floor whenever the slot is in discharge mode).
inline EarlyLeaveReport evaluate_early_leaving(const Schedule& schedule, const Scenario& scenario,
                                               int slots_early) {
    if (slots_early < 0) throw ValidationError("evaluate_early_leaving: k must be >= 0");
    EarlyLeaveReport report;
    for (std::size_t i = 0; i < scenario.fleet.size(); ++i) {
        const EvSpec& spec = scenario.fleet[i];
        const int slot = spec.leave_slot - slots_early;
        if (slot <= spec.arrive_slot) {
            report.omitted.push_back("EV '" + spec.id + "': stay shorter than " +
                                     std::to_string(slots_early) + " slots");
            continue;
        }
        EarlyLeaveEntry entry;
        entry.ev_id = spec.id;
        entry.ev_class = spec.ev_class;
        entry.soc_kwh = schedule.evs[i].soc_kwh[slot - 1];
        entry.target_kwh = spec.target_soc_kwh;
        if (spec.ev_class == EvClass::Green) {
            entry.floor_kwh = spec.green_floor_kwh;
            const int mode = schedule.evs[i].mode.empty() ? -1 : schedule.evs[i].mode[slot - 1];
            entry.floor_encoding_ok =
                mode != 0 || entry.soc_kwh >= spec.green_floor_kwh - 1e-6;
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

inline constexpr int kScheduleSchemaVersion = 1;

inline nlohmann::json schedule_to_json(const Schedule& schedule) {
    nlohmann::json j;
    j["schema_version"] = kScheduleSchemaVersion;
    j["status"] = to_string(schedule.status);
    j["gamma_cents"] = schedule.total_cost_cents;
    j["breakdown"] = {{"green_discharge_payments", schedule.breakdown.green_discharge_payments},
                      {"grid_purchase_cost", schedule.breakdown.grid_purchase_cost},
                      {"green_charge_revenue", schedule.breakdown.green_charge_revenue},
                      {"premium_revenue", schedule.breakdown.premium_revenue},
                      {"conservative_revenue", schedule.breakdown.conservative_revenue},
                      {"grid_sale_revenue", schedule.breakdown.grid_sale_revenue}};
    j["grid"] = {{"import_kwh", schedule.grid_import_kwh},
                 {"export_kwh", schedule.grid_export_kwh},
                 {"mode", schedule.grid_mode}};
    nlohmann::json evs = nlohmann::json::array();
    for (const EvTrajectory& ev : schedule.evs) {
        evs.push_back({{"id", ev.ev_id},
                       {"class", to_string(ev.ev_class)},
                       {"premium_treated", ev.premium_treated},
                       {"target_reachable", ev.target_reachable},
                       {"charge_kwh", ev.charge_kwh},
                       {"discharge_kwh", ev.discharge_kwh},
                       {"soc_kwh", ev.soc_kwh},
                       {"mode", ev.mode}});
    }
    j["evs"] = std::move(evs);
    j["node_count"] = schedule.node_count;
    j["bound_gap"] = schedule.bound_gap;
    j["warnings"] = schedule.warnings;
    return j;
}

inline Schedule schedule_from_json(const nlohmann::json& j) {
    using detail::json_field;
    using detail::json_get;
    const int version = json_get<int>(j, "$", "schema_version");
    if (version != kScheduleSchemaVersion) {
        throw ValidationError("schedule file: unsupported schema_version " +
                              std::to_string(version));
    }
    Schedule schedule;
    const std::string status = json_get<std::string>(j, "$", "status");
    if (status == "optimal") schedule.status = SolveStatus::Optimal;
    else if (status == "infeasible") schedule.status = SolveStatus::Infeasible;
    else if (status == "unbounded") schedule.status = SolveStatus::Unbounded;
    else if (status == "limit_reached") schedule.status = SolveStatus::LimitReached;
    else throw ValidationError("schedule file: unknown status '" + status + "'");
    schedule.total_cost_cents = json_get<double>(j, "$", "gamma_cents");
    {
        const auto& b = json_field(j, "$", "breakdown");
        schedule.breakdown.green_discharge_payments =
            json_get<double>(b, "breakdown", "green_discharge_payments");
        schedule.breakdown.grid_purchase_cost =
            json_get<double>(b, "breakdown", "grid_purchase_cost");
        schedule.breakdown.green_charge_revenue =
            json_get<double>(b, "breakdown", "green_charge_revenue");
        schedule.breakdown.premium_revenue = json_get<double>(b, "breakdown", "premium_revenue");
        schedule.breakdown.conservative_revenue =
            json_get<double>(b, "breakdown", "conservative_revenue");
        schedule.breakdown.grid_sale_revenue =
            json_get<double>(b, "breakdown", "grid_sale_revenue");
    }
    {
        const auto& grid = json_field(j, "$", "grid");
        schedule.grid_import_kwh = json_get<std::vector<double>>(grid, "grid", "import_kwh");
        schedule.grid_export_kwh = json_get<std::vector<double>>(grid, "grid", "export_kwh");
        schedule.grid_mode = json_get<std::vector<int>>(grid, "grid", "mode");
    }
    const auto& evs = json_field(j, "$", "evs");
    if (!evs.is_array()) throw ValidationError("schedule file: field $.evs must be an array");
    for (std::size_t i = 0; i < evs.size(); ++i) {
        const std::string path = "evs[" + std::to_string(i) + "]";
        const auto& entry = evs[i];
        EvTrajectory ev;
        ev.ev_id = json_get<std::string>(entry, path, "id");
        ev.ev_class = ev_class_from_string(json_get<std::string>(entry, path, "class"));
        ev.premium_treated = json_get<bool>(entry, path, "premium_treated");
        ev.target_reachable = json_get<bool>(entry, path, "target_reachable");
        ev.charge_kwh = json_get<std::vector<double>>(entry, path, "charge_kwh");
        ev.discharge_kwh = json_get<std::vector<double>>(entry, path, "discharge_kwh");
        ev.soc_kwh = json_get<std::vector<double>>(entry, path, "soc_kwh");
        ev.mode = json_get<std::vector<int>>(entry, path, "mode");
        schedule.evs.push_back(std::move(ev));
    }
    schedule.node_count = json_get<long>(j, "$", "node_count");
    schedule.bound_gap = json_get<double>(j, "$", "bound_gap");
    schedule.warnings = json_get<std::vector<std::string>>(j, "$", "warnings");
    return schedule;
}

inline void save_schedule(const Schedule& schedule, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << schedule_to_json(schedule).dump(2) << "\n";
    if (!out) throw IoError("write to '" + path + "' failed");
}

inline Schedule load_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("schedule file '" + path + "': " + e.what());
    }
    return schedule_from_json(j);
}

/// Per-slot flow table for plotting: pv, grid flows and the green fleet's
/// aggregate charge/discharge, plus the fixed demand.
inline void write_flows_csv(const Scenario& scenario, const Schedule& schedule,
                            std::ostream& os) {
    const GenerationProfile gen =
        station_generation(scenario.pv, scenario.irradiance, scenario.grid);
    os << "slot,pv_kwh,grid_import_kwh,grid_export_kwh,green_charge_kwh,green_discharge_kwh,"
          "fixed_demand_kwh\n";
    for (int t = 0; t < scenario.grid.slot_count; ++t) {
        double green_charge = 0.0, green_discharge = 0.0, fixed_demand = 0.0;
        for (std::size_t i = 0; i < schedule.evs.size(); ++i) {
            if (schedule.evs[i].ev_class == EvClass::Green) {
                green_charge += schedule.evs[i].charge_kwh[t];
                green_discharge += schedule.evs[i].discharge_kwh[t];
            } else {
                fixed_demand += schedule.evs[i].charge_kwh[t];
            }
        }
        os << (t + 1) << ',' << gen.energy_kwh[t] << ',' << schedule.grid_import_kwh[t] << ','
           << schedule.grid_export_kwh[t] << ',' << green_charge << ',' << green_discharge << ','
           << fixed_demand << "\n";
    }
}

} // namespace evsched

#endif // EVSCHED_SCHEDULER_HPP
