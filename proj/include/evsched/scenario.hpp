#ifndef EVSCHED_SCENARIO_HPP
#define EVSCHED_SCENARIO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "evsched/common.hpp"
#include "evsched/fleet.hpp"
#include "evsched/pv.hpp"
#include "evsched/rng.hpp"
#include "evsched/tariff.hpp"

namespace evsched {

/// Knobs for random instance generation. Defaults are the bundled demo
/// setup: 22 half-hour slots, an 8/8/8 fleet, capacities on [25, 40] kWh,
/// plug-in SOC on [0.20, 0.30] of capacity, target 0.80, safety floor 0.20,
/// green discharge floor 0.40.
struct ScenarioConfig {
    int premium_count = 8;
    int conservative_count = 8;
    int green_count = 8;
    double capacity_min_kwh = 25.0;
    double capacity_max_kwh = 40.0;
    double initial_soc_fraction_min = 0.20;
    double initial_soc_fraction_max = 0.30;
    double target_soc_fraction = 0.80;
    double min_soc_fraction = 0.20;
    double green_floor_fraction = 0.30;
    double max_rate_kwh_per_slot = 5.0;
    double battery_efficiency = 0.9;
    double grid_max_kwh_per_slot = 500.0;
    std::uint64_t seed = 7;

    void validate() const {
        const auto frac = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (premium_count < 0 || conservative_count < 0 || green_count < 0) {
            throw ValidationError("ScenarioConfig: counts must be >= 0");
        }
        if (!(capacity_min_kwh > 0.0 && capacity_min_kwh <= capacity_max_kwh)) {
            throw ValidationError("ScenarioConfig: capacity range must satisfy 0 < low <= high");
        }
        if (!frac(initial_soc_fraction_min) || !frac(initial_soc_fraction_max) ||
            !frac(target_soc_fraction) || !frac(min_soc_fraction) ||
            !frac(green_floor_fraction)) {
            throw ValidationError("ScenarioConfig: fractions must lie in [0, 1]");
        }
        if (!(min_soc_fraction <= initial_soc_fraction_min &&
              initial_soc_fraction_min <= initial_soc_fraction_max)) {
            throw ValidationError("ScenarioConfig: needs min <= initial_min <= initial_max");
        }
        if (!(max_rate_kwh_per_slot > 0.0)) {
            throw ValidationError("ScenarioConfig: max_rate_kwh_per_slot must be > 0");
        }
        if (!(battery_efficiency > 0.0 && battery_efficiency <= 1.0)) {
            throw ValidationError("ScenarioConfig: battery_efficiency must be in (0, 1]");
        }
        if (!(grid_max_kwh_per_slot > 0.0)) {
            throw ValidationError("ScenarioConfig: grid_max_kwh_per_slot must be > 0");
        }
    }
    bool operator==(const ScenarioConfig&) const = default;
};

/// A complete problem instance.
struct Scenario {
    TimeGrid grid;
    std::vector<EvSpec> fleet;
    PvArray pv;
    IrradianceSeries irradiance;
    PriceCurve prices;
    TariffParams tariff;
    ScenarioConfig config;

    void validate() const {
        grid.validate();
        pv.validate();
        irradiance.validate(grid);
        tariff.validate();
        prices.validate(grid, tariff.grid_spread_cents);
        config.validate();
        std::set<std::string> ids;
        int counts[3] = {0, 0, 0};
        for (const EvSpec& spec : fleet) {
            spec.validate(grid);
            if (!ids.insert(spec.id).second) {
                throw ValidationError("duplicate EV id '" + spec.id + "'");
            }
            ++counts[static_cast<int>(spec.ev_class)];
        }
        if (counts[static_cast<int>(EvClass::Premium)] != config.premium_count ||
            counts[static_cast<int>(EvClass::Conservative)] != config.conservative_count ||
            counts[static_cast<int>(EvClass::Green)] != config.green_count) {
            throw ValidationError("fleet class counts do not match config counts");
        }
    }
    bool operator==(const Scenario&) const = default;
};

/// Half-hour clock position of a slot's midpoint, assuming the horizon
/// starts at 07:00 (the bundled curves' convention).
inline double slot_midpoint_hour(const TimeGrid& grid, int slot) {
    return 7.0 + (static_cast<double>(slot) - 0.5) * grid.slot_hours;
}

/// Bundled synthetic irradiance: a clear-sky bell centred on 12:30. These
/// are stand-in curves, not measurements; values are rounded to 0.1 W/m² so
/// the CSV copies under data/ are exact.
inline IrradianceSeries builtin_summer_irradiance(const TimeGrid& grid) {
    IrradianceSeries series;
    for (int t = 1; t <= grid.slot_count; ++t) {
        const double h = slot_midpoint_hour(grid, t);
        const double z = (h - 12.5) / 3.4;
        series.values.push_back(std::round(1000.0 * std::exp(-z * z) * 10.0) / 10.0);
    }
    return series;
}

/// Winter stand-in: lower peak and a narrower bell, pointwise below the
/// summer curve.
inline IrradianceSeries builtin_winter_irradiance(const TimeGrid& grid) {
    IrradianceSeries series;
    for (int t = 1; t <= grid.slot_count; ++t) {
        const double h = slot_midpoint_hour(grid, t);
        const double z = (h - 12.5) / 2.6;
        series.values.push_back(std::round(420.0 * std::exp(-z * z) * 10.0) / 10.0);
    }
    return series;
}

/// Bundled synthetic wholesale sell prices, cents/kWh: a pronounced morning
/// peak, a low base through the solar hours and a narrow late-afternoon
/// peak, rounded to 0.01. The low midday level prices the PV window well
/// below the daily mean and leaves headroom for battery arbitrage into the
/// peaks.
inline std::vector<double> builtin_grid_sell_prices(const TimeGrid& grid) {
    std::vector<double> prices;
    for (int t = 1; t <= grid.slot_count; ++t) {
        const double h = slot_midpoint_hour(grid, t);
        const double morning = (h - 8.2) / 1.3;
        const double evening = (h - 16.1) / 0.95;
        const double p =
            12.8 + 32.0 * std::exp(-morning * morning) + 19.0 * std::exp(-evening * evening);
        prices.push_back(std::round(p * 100.0) / 100.0);
    }
    return prices;
}

/// Generates a random instance. Deterministic in (config, seed); the draw
/// order per vehicle is capacity, initial SOC fraction, then the
/// arrival/leave pair, which is redrawn until arrival < leave and the target
/// SOC is reachable at the maximum charging rate within the stay. The
/// reachability redraw keeps every generated vehicle's demand satisfiable,
/// so unreachable-target handling only triggers for hand-written files.
inline Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
    config.validate();
    Scenario scenario;
    scenario.config = config;
    scenario.config.seed = seed;
    scenario.grid = TimeGrid{};
    scenario.pv = PvArray{0.15, 1.953, panels_for_spaces(24)};
    scenario.tariff = TariffParams{};
    scenario.irradiance = builtin_summer_irradiance(scenario.grid);
    scenario.prices =
        make_price_curve(builtin_grid_sell_prices(scenario.grid), scenario.tariff.grid_spread_cents);

    const int total = config.premium_count + config.conservative_count + config.green_count;
    Rng rng(seed);
    int width = 2;
    for (int n = total; n >= 100; n /= 10) ++width;
    for (int i = 0; i < total; ++i) {
        EvSpec spec;
        std::string index = std::to_string(i + 1);
        spec.id = "ev" + std::string(width - std::min<int>(width, index.size()), '0') + index;
        spec.ev_class = i < config.premium_count ? EvClass::Premium
                        : i < config.premium_count + config.conservative_count
                            ? EvClass::Conservative
                            : EvClass::Green;
        spec.capacity_kwh = rng.uniform(config.capacity_min_kwh, config.capacity_max_kwh);
        spec.initial_soc_kwh =
            rng.uniform(config.initial_soc_fraction_min, config.initial_soc_fraction_max) *
            spec.capacity_kwh;
        spec.target_soc_kwh = config.target_soc_fraction * spec.capacity_kwh;
        spec.min_soc_kwh = config.min_soc_fraction * spec.capacity_kwh;
        spec.green_floor_kwh = config.green_floor_fraction * spec.capacity_kwh;
        spec.max_rate_kwh_per_slot = config.max_rate_kwh_per_slot;
        for (;;) {
            spec.arrive_slot = rng.uniform_int(1, scenario.grid.slot_count);
            spec.leave_slot = rng.uniform_int(1, scenario.grid.slot_count);
            if (spec.arrive_slot >= spec.leave_slot) continue;
            if (target_reachable(spec, config.battery_efficiency)) break;
        }
        scenario.fleet.push_back(std::move(spec));
    }
    scenario.validate();
    return scenario;
}

inline Scenario generate_scenario(const ScenarioConfig& config) {
    return generate_scenario(config, config.seed);
}

/// Reassigns classes over the same vehicle population: round(fraction * N)
/// vehicles become green, longest stays first (bidirectional use is worth
/// the most for vehicles that are plugged in longest); the remainder splits
/// evenly into premium then conservative by fleet position (an odd remainder
/// gives the extra vehicle to premium). Every other spec field is preserved.
inline Scenario with_green_fraction(const Scenario& base, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw ValidationError("with_green_fraction: fraction must lie in [0, 1]");
    }
    Scenario out = base;
    const int total = static_cast<int>(out.fleet.size());
    const int greens = static_cast<int>(std::lround(fraction * total));
    std::vector<int> by_stay(total);
    for (int i = 0; i < total; ++i) by_stay[i] = i;
    std::stable_sort(by_stay.begin(), by_stay.end(), [&](int a, int b) {
        const int stay_a = out.fleet[a].leave_slot - out.fleet[a].arrive_slot;
        const int stay_b = out.fleet[b].leave_slot - out.fleet[b].arrive_slot;
        if (stay_a != stay_b) return stay_a > stay_b;
        return a < b;
    });
    std::vector<char> is_green(total, 0);
    for (int i = 0; i < greens; ++i) is_green[by_stay[i]] = 1;
    const int premiums = (total - greens + 1) / 2;
    int placed = 0;
    for (int i = 0; i < total; ++i) {
        if (is_green[i]) {
            out.fleet[i].ev_class = EvClass::Green;
            continue;
        }
        out.fleet[i].ev_class = placed < premiums ? EvClass::Premium : EvClass::Conservative;
        ++placed;
    }
    out.config.green_count = greens;
    out.config.premium_count = premiums;
    out.config.conservative_count = total - greens - premiums;
    return out;
}

namespace detail {

inline const nlohmann::json& json_field(const nlohmann::json& j, const std::string& path,
                                        const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw ValidationError("missing field " + path + "." + key);
    }
    return *it;
}

template <typename T>
T json_get(const nlohmann::json& j, const std::string& path, const char* key) {
    try {
        return json_field(j, path, key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("field " + path + "." + key + " has the wrong type");
    }
}

} // namespace detail

inline constexpr int kScenarioSchemaVersion = 1;

inline nlohmann::json scenario_to_json(const Scenario& scenario) {
    nlohmann::json j;
    j["schema_version"] = kScenarioSchemaVersion;
    j["generator"] = Rng::kName;
    j["time_grid"] = {{"slot_count", scenario.grid.slot_count},
                      {"slot_hours", scenario.grid.slot_hours},
                      {"start_label", scenario.grid.start_label}};
    j["pv"] = {{"efficiency", scenario.pv.efficiency},
               {"panel_area_m2", scenario.pv.panel_area_m2},
               {"panel_count", scenario.pv.panel_count}};
    j["irradiance_w_per_m2"] = scenario.irradiance.values;
    j["grid_sell_cents_per_kwh"] = scenario.prices.grid_sell_cents_per_kwh;
    j["tariff"] = {{"markup_cents", scenario.tariff.markup_cents},
                   {"conservative_spread_cents", scenario.tariff.conservative_spread_cents},
                   {"green_charge_factor", scenario.tariff.green_charge_factor},
                   {"green_discharge_factor", scenario.tariff.green_discharge_factor},
                   {"grid_spread_cents", scenario.tariff.grid_spread_cents}};
    j["config"] = {{"premium_count", scenario.config.premium_count},
                   {"conservative_count", scenario.config.conservative_count},
                   {"green_count", scenario.config.green_count},
                   {"capacity_min_kwh", scenario.config.capacity_min_kwh},
                   {"capacity_max_kwh", scenario.config.capacity_max_kwh},
                   {"initial_soc_fraction_min", scenario.config.initial_soc_fraction_min},
                   {"initial_soc_fraction_max", scenario.config.initial_soc_fraction_max},
                   {"target_soc_fraction", scenario.config.target_soc_fraction},
                   {"min_soc_fraction", scenario.config.min_soc_fraction},
                   {"green_floor_fraction", scenario.config.green_floor_fraction},
                   {"max_rate_kwh_per_slot", scenario.config.max_rate_kwh_per_slot},
                   {"battery_efficiency", scenario.config.battery_efficiency},
                   {"grid_max_kwh_per_slot", scenario.config.grid_max_kwh_per_slot},
                   {"seed", scenario.config.seed}};
    nlohmann::json fleet = nlohmann::json::array();
    for (const EvSpec& spec : scenario.fleet) {
        fleet.push_back({{"id", spec.id},
                         {"class", to_string(spec.ev_class)},
                         {"capacity_kwh", spec.capacity_kwh},
                         {"initial_soc_kwh", spec.initial_soc_kwh},
                         {"target_soc_kwh", spec.target_soc_kwh},
                         {"min_soc_kwh", spec.min_soc_kwh},
                         {"green_floor_kwh", spec.green_floor_kwh},
                         {"arrive_slot", spec.arrive_slot},
                         {"leave_slot", spec.leave_slot},
                         {"max_rate_kwh_per_slot", spec.max_rate_kwh_per_slot}});
    }
    j["fleet"] = std::move(fleet);
    return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
    using detail::json_field;
    using detail::json_get;
    const int version = json_get<int>(j, "$", "schema_version");
    if (version != kScenarioSchemaVersion) {
        throw ValidationError("scenario file: unsupported schema_version " +
                              std::to_string(version));
    }
    Scenario scenario;
    {
        const auto& grid = json_field(j, "$", "time_grid");
        scenario.grid.slot_count = json_get<int>(grid, "time_grid", "slot_count");
        scenario.grid.slot_hours = json_get<double>(grid, "time_grid", "slot_hours");
        scenario.grid.start_label = json_get<std::string>(grid, "time_grid", "start_label");
    }
    {
        const auto& pv = json_field(j, "$", "pv");
        scenario.pv.efficiency = json_get<double>(pv, "pv", "efficiency");
        scenario.pv.panel_area_m2 = json_get<double>(pv, "pv", "panel_area_m2");
        scenario.pv.panel_count = json_get<double>(pv, "pv", "panel_count");
    }
    scenario.irradiance.values = json_get<std::vector<double>>(j, "$", "irradiance_w_per_m2");
    {
        const auto& tariff = json_field(j, "$", "tariff");
        scenario.tariff.markup_cents = json_get<double>(tariff, "tariff", "markup_cents");
        scenario.tariff.conservative_spread_cents =
            json_get<double>(tariff, "tariff", "conservative_spread_cents");
        scenario.tariff.green_charge_factor =
            json_get<double>(tariff, "tariff", "green_charge_factor");
        scenario.tariff.green_discharge_factor =
            json_get<double>(tariff, "tariff", "green_discharge_factor");
        scenario.tariff.grid_spread_cents = json_get<double>(tariff, "tariff", "grid_spread_cents");
    }
    scenario.prices = make_price_curve(json_get<std::vector<double>>(j, "$", "grid_sell_cents_per_kwh"),
                                       scenario.tariff.grid_spread_cents);
    {
        const auto& config = json_field(j, "$", "config");
        ScenarioConfig& c = scenario.config;
        c.premium_count = json_get<int>(config, "config", "premium_count");
        c.conservative_count = json_get<int>(config, "config", "conservative_count");
        c.green_count = json_get<int>(config, "config", "green_count");
        c.capacity_min_kwh = json_get<double>(config, "config", "capacity_min_kwh");
        c.capacity_max_kwh = json_get<double>(config, "config", "capacity_max_kwh");
        c.initial_soc_fraction_min = json_get<double>(config, "config", "initial_soc_fraction_min");
        c.initial_soc_fraction_max = json_get<double>(config, "config", "initial_soc_fraction_max");
        c.target_soc_fraction = json_get<double>(config, "config", "target_soc_fraction");
        c.min_soc_fraction = json_get<double>(config, "config", "min_soc_fraction");
        c.green_floor_fraction = json_get<double>(config, "config", "green_floor_fraction");
        c.max_rate_kwh_per_slot = json_get<double>(config, "config", "max_rate_kwh_per_slot");
        c.battery_efficiency = json_get<double>(config, "config", "battery_efficiency");
        c.grid_max_kwh_per_slot = json_get<double>(config, "config", "grid_max_kwh_per_slot");
        c.seed = json_get<std::uint64_t>(config, "config", "seed");
    }
    const auto& fleet = json_field(j, "$", "fleet");
    if (!fleet.is_array()) throw ValidationError("scenario file: field $.fleet must be an array");
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        const std::string path = "fleet[" + std::to_string(i) + "]";
        const auto& entry = fleet[i];
        EvSpec spec;
        spec.id = json_get<std::string>(entry, path, "id");
        spec.ev_class = ev_class_from_string(json_get<std::string>(entry, path, "class"));
        spec.capacity_kwh = json_get<double>(entry, path, "capacity_kwh");
        spec.initial_soc_kwh = json_get<double>(entry, path, "initial_soc_kwh");
        spec.target_soc_kwh = json_get<double>(entry, path, "target_soc_kwh");
        spec.min_soc_kwh = json_get<double>(entry, path, "min_soc_kwh");
        spec.green_floor_kwh = json_get<double>(entry, path, "green_floor_kwh");
        spec.arrive_slot = json_get<int>(entry, path, "arrive_slot");
        spec.leave_slot = json_get<int>(entry, path, "leave_slot");
        spec.max_rate_kwh_per_slot = json_get<double>(entry, path, "max_rate_kwh_per_slot");
        scenario.fleet.push_back(std::move(spec));
    }
    scenario.validate();
    return scenario;
}

inline void save_scenario(const Scenario& scenario, const std::string& path) {
    scenario.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << scenario_to_json(scenario).dump(2) << "\n";
    if (!out) throw IoError("write to '" + path + "' failed");
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("scenario file '" + path + "': " + e.what());
    }
    return scenario_from_json(j);
}

} // namespace evsched

#endif // EVSCHED_SCENARIO_HPP
