#ifndef EVSCHED_FLEET_HPP
#define EVSCHED_FLEET_HPP

#include <cmath>
#include <string>
#include <vector>

#include "evsched/common.hpp"
#include "evsched/pv.hpp"
#include "evsched/tariff.hpp"

namespace evsched {

enum class EvClass { Premium, Conservative, Green };

inline const char* to_string(EvClass c) {
    switch (c) {
        case EvClass::Premium: return "premium";
        case EvClass::Conservative: return "conservative";
        case EvClass::Green: return "green";
    }
    return "?";
}

inline EvClass ev_class_from_string(const std::string& s) {
    if (s == "premium") return EvClass::Premium;
    if (s == "conservative") return EvClass::Conservative;
    if (s == "green") return EvClass::Green;
    throw ValidationError("unknown EV class '" + s + "'");
}

/// One vehicle. Slots are 1-based; the vehicle charges on slots
/// (arrive_slot, leave_slot]. green_floor_kwh is the SOC a green vehicle must
/// hold before its battery may be drawn down; it is stored for every vehicle
/// so class reassignment never needs to invent one.
struct EvSpec {
    std::string id;
    EvClass ev_class = EvClass::Premium;
    double capacity_kwh = 0.0;
    double initial_soc_kwh = 0.0;
    double target_soc_kwh = 0.0;
    double min_soc_kwh = 0.0;
    double green_floor_kwh = 0.0;
    int arrive_slot = 1;
    int leave_slot = 2;
    double max_rate_kwh_per_slot = 5.0;

    void validate(const TimeGrid& grid) const {
        const std::string who = "EV '" + id + "': ";
        if (id.empty()) throw ValidationError("EV id must not be empty");
        if (!(capacity_kwh > 0.0)) throw ValidationError(who + "capacity_kwh must be > 0");
        if (!(min_soc_kwh >= 0.0 && min_soc_kwh <= initial_soc_kwh && initial_soc_kwh <= capacity_kwh)) {
            throw ValidationError(who + "needs min_soc <= initial_soc <= capacity");
        }
        if (!(min_soc_kwh <= target_soc_kwh && target_soc_kwh <= capacity_kwh)) {
            throw ValidationError(who + "needs min_soc <= target_soc <= capacity");
        }
        if (!(1 <= arrive_slot && arrive_slot < leave_slot && leave_slot <= grid.slot_count)) {
            throw ValidationError(who + "needs 1 <= arrive_slot < leave_slot <= " +
                                  std::to_string(grid.slot_count));
        }
        if (!(max_rate_kwh_per_slot > 0.0)) {
            throw ValidationError(who + "max_rate_kwh_per_slot must be > 0");
        }
        if (ev_class == EvClass::Green &&
            !(min_soc_kwh <= green_floor_kwh && green_floor_kwh <= capacity_kwh)) {
            throw ValidationError(who + "needs min_soc <= green_floor <= capacity");
        }
    }
    bool operator==(const EvSpec&) const = default;
};

/// True when charging at the maximum rate on every stay slot reaches the
/// target SOC by the leave slot.
inline bool target_reachable(const EvSpec& spec, double battery_efficiency) {
    const double stay = static_cast<double>(spec.leave_slot - spec.arrive_slot);
    return spec.initial_soc_kwh +
               battery_efficiency * spec.max_rate_kwh_per_slot * stay >=
           spec.target_soc_kwh - 1e-9;
}

/// A deterministic charging trajectory for one non-green vehicle.
struct FixedChargePlan {
    std::vector<double> charge_kwh; // length T, zero outside (arrive, leave]
    std::vector<double> soc_kwh;    // length T, SOC at the end of each slot
    bool target_reached = true;     // false => flagged infeasible-for-target
    bool premium_treated = false;   // conservative whose required rate >= max rate
};

/// Premium trajectory: max rate from the slot after arrival until the target
/// is met, with the final active slot truncated so the SOC lands exactly on
/// the target. An unreachable target charges at max rate throughout and is
/// flagged rather than thrown.
inline FixedChargePlan premium_schedule(const EvSpec& spec, double battery_efficiency,
                                        const TimeGrid& grid) {
    spec.validate(grid);
    if (!(battery_efficiency > 0.0 && battery_efficiency <= 1.0)) {
        throw ValidationError("battery efficiency must be in (0, 1]");
    }
    FixedChargePlan plan;
    plan.charge_kwh.assign(grid.slot_count, 0.0);
    plan.soc_kwh.assign(grid.slot_count, spec.initial_soc_kwh);
    double soc = spec.initial_soc_kwh;
    for (int t = 1; t <= grid.slot_count; ++t) {
        if (t > spec.arrive_slot && t <= spec.leave_slot && soc < spec.target_soc_kwh - 1e-12) {
            const double wanted = (spec.target_soc_kwh - soc) / battery_efficiency;
            const double charge = std::min(spec.max_rate_kwh_per_slot, wanted);
            plan.charge_kwh[t - 1] = charge;
            soc += battery_efficiency * charge;
        }
        plan.soc_kwh[t - 1] = soc;
    }
    plan.target_reached = soc >= spec.target_soc_kwh - 1e-9;
    return plan;
}

/// Constant charging rate that brings the SOC from its initial value to the
/// target exactly at the leave slot. The division by the battery efficiency
/// compensates for the charging loss in the SOC update, so the target is
/// actually met.
inline double conservative_rate(const EvSpec& spec, double battery_efficiency) {
    if (spec.leave_slot <= spec.arrive_slot) {
        throw ValidationError("EV '" + spec.id + "': zero stay duration");
    }
    if (!(battery_efficiency > 0.0 && battery_efficiency <= 1.0)) {
        throw ValidationError("battery efficiency must be in (0, 1]");
    }
    const double gap = spec.target_soc_kwh - spec.initial_soc_kwh;
    if (gap <= 0.0) return 0.0;
    return gap / (battery_efficiency * static_cast<double>(spec.leave_slot - spec.arrive_slot));
}

/// Conservative trajectory: the constant average rate on every stay slot.
/// When the required rate reaches the vehicle's max rate, the vehicle is
/// treated as premium (flagged on the plan) and the premium trajectory
/// applies.
inline FixedChargePlan conservative_schedule(const EvSpec& spec, double battery_efficiency,
                                             const TimeGrid& grid) {
    spec.validate(grid);
    const double rate = conservative_rate(spec, battery_efficiency);
    if (rate >= spec.max_rate_kwh_per_slot) {
        FixedChargePlan plan = premium_schedule(spec, battery_efficiency, grid);
        plan.premium_treated = true;
        return plan;
    }
    FixedChargePlan plan;
    plan.charge_kwh.assign(grid.slot_count, 0.0);
    plan.soc_kwh.assign(grid.slot_count, spec.initial_soc_kwh);
    double soc = spec.initial_soc_kwh;
    for (int t = 1; t <= grid.slot_count; ++t) {
        if (t > spec.arrive_slot && t <= spec.leave_slot && rate > 0.0) {
            plan.charge_kwh[t - 1] = rate;
            soc += battery_efficiency * rate;
        }
        plan.soc_kwh[t - 1] = soc;
    }
    // land exactly on the target; the recursion accumulates rounding
    if (std::abs(soc - spec.target_soc_kwh) < 1e-6) {
        plan.soc_kwh[spec.leave_slot - 1] = spec.target_soc_kwh;
        for (int t = spec.leave_slot + 1; t <= grid.slot_count; ++t) {
            plan.soc_kwh[t - 1] = spec.target_soc_kwh;
        }
    }
    plan.target_reached = plan.soc_kwh.back() >= spec.target_soc_kwh - 1e-9;
    return plan;
}

/// One non-green vehicle's fixed schedule with its per-slot unit prices.
struct FixedEvSchedule {
    std::string ev_id;
    EvClass ev_class = EvClass::Premium;
    bool premium_treated = false;
    bool target_reached = true;
    std::vector<double> charge_kwh;           // length T
    std::vector<double> price_cents_per_kwh;  // length T
    std::vector<double> soc_kwh;              // length T
};

/// Aggregate fixed demand and revenue of all premium and conservative
/// vehicles. Green vehicles are decision variables and do not appear here.
struct FixedLoadProfile {
    std::vector<FixedEvSchedule> evs;
    std::vector<double> demand_kwh;    // per-slot aggregate
    std::vector<double> revenue_cents; // per-slot aggregate
    double total_revenue_cents = 0.0;
};

inline FixedLoadProfile build_fixed_load(const std::vector<EvSpec>& fleet,
                                         const PriceCurve& prices, const TariffParams& params,
                                         double battery_efficiency, const TimeGrid& grid) {
    grid.validate();
    params.validate();
    prices.validate(grid, params.grid_spread_cents);
    FixedLoadProfile profile;
    profile.demand_kwh.assign(grid.slot_count, 0.0);
    profile.revenue_cents.assign(grid.slot_count, 0.0);
    for (const EvSpec& spec : fleet) {
        if (spec.ev_class == EvClass::Green) continue;
        FixedEvSchedule entry;
        entry.ev_id = spec.id;
        entry.ev_class = spec.ev_class;
        FixedChargePlan plan = spec.ev_class == EvClass::Premium
                                   ? premium_schedule(spec, battery_efficiency, grid)
                                   : conservative_schedule(spec, battery_efficiency, grid);
        entry.premium_treated = plan.premium_treated;
        entry.target_reached = plan.target_reached;
        entry.charge_kwh = std::move(plan.charge_kwh);
        entry.soc_kwh = std::move(plan.soc_kwh);
        const bool priced_as_premium =
            spec.ev_class == EvClass::Premium || entry.premium_treated;
        const double rate = priced_as_premium ? 0.0 : conservative_rate(spec, battery_efficiency);
        entry.price_cents_per_kwh.resize(grid.slot_count);
        for (int t = 0; t < grid.slot_count; ++t) {
            const double prem =
                premium_price(prices.grid_sell_cents_per_kwh[t], params.markup_cents);
            entry.price_cents_per_kwh[t] =
                priced_as_premium
                    ? prem
                    : conservative_price(prem, params.conservative_spread_cents,
                                         spec.max_rate_kwh_per_slot, rate);
            profile.demand_kwh[t] += entry.charge_kwh[t];
            const double revenue = entry.price_cents_per_kwh[t] * entry.charge_kwh[t];
            profile.revenue_cents[t] += revenue;
            profile.total_revenue_cents += revenue;
        }
        profile.evs.push_back(std::move(entry));
    }
    return profile;
}

} // namespace evsched

#endif // EVSCHED_FLEET_HPP
