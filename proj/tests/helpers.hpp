#ifndef EVSCHED_TESTS_HELPERS_HPP
#define EVSCHED_TESTS_HELPERS_HPP

#include <string>
#include <vector>

#include "evsched/rng.hpp"
#include "evsched/scenario.hpp"

namespace evtest {

// A small instance with a hand-sized grid, randomized irradiance/prices and
// a fleet added by the caller. Class counts are synced afterwards.
inline evsched::Scenario tiny_scenario(int slot_count, std::uint64_t seed) {
    using namespace evsched;
    Scenario sc;
    sc.grid = TimeGrid{slot_count, 0.5, "07:00"};
    sc.pv = PvArray{0.15, 1.953, panels_for_spaces(24)};
    sc.tariff = TariffParams{};
    sc.config = ScenarioConfig{};
    sc.config.premium_count = sc.config.conservative_count = sc.config.green_count = 0;
    sc.config.seed = seed;
    Rng rng(seed);
    sc.irradiance.values.resize(slot_count);
    std::vector<double> sell(slot_count);
    for (int t = 0; t < slot_count; ++t) {
        sc.irradiance.values[t] = rng.uniform(0.0, 900.0);
        sell[t] = 14.0 + rng.uniform(0.0, 20.0);
    }
    sc.prices = make_price_curve(sell, sc.tariff.grid_spread_cents);
    return sc;
}

inline void sync_counts(evsched::Scenario& sc) {
    sc.config.premium_count = sc.config.conservative_count = sc.config.green_count = 0;
    for (const auto& ev : sc.fleet) {
        switch (ev.ev_class) {
            case evsched::EvClass::Premium: ++sc.config.premium_count; break;
            case evsched::EvClass::Conservative: ++sc.config.conservative_count; break;
            case evsched::EvClass::Green: ++sc.config.green_count; break;
        }
    }
}

inline evsched::EvSpec make_ev(const std::string& id, evsched::EvClass cls, double capacity,
                               double initial, double target, int arrive, int leave,
                               double max_rate = 5.0) {
    evsched::EvSpec ev;
    ev.id = id;
    ev.ev_class = cls;
    ev.capacity_kwh = capacity;
    ev.initial_soc_kwh = initial;
    ev.target_soc_kwh = target;
    ev.min_soc_kwh = 0.2 * capacity;
    ev.green_floor_kwh = 0.4 * capacity;
    ev.arrive_slot = arrive;
    ev.leave_slot = leave;
    ev.max_rate_kwh_per_slot = max_rate;
    return ev;
}

inline std::string temp_path(const std::string& name) {
    return std::string("evsched_test_") + name;
}

} // namespace evtest

#endif
