#ifndef EVSCHED_PV_HPP
#define EVSCHED_PV_HPP

#include <string>
#include <vector>

#include "evsched/common.hpp"
#include "evsched/detail/csv.hpp"

namespace evsched {

/// The scheduling horizon: slot_count slots of slot_hours each.
struct TimeGrid {
    int slot_count = 22;
    double slot_hours = 0.5;
    std::string start_label = "07:00"; // informational, clock label of slot 1

    void validate() const {
        if (slot_count < 1) throw ValidationError("TimeGrid.slot_count must be >= 1");
        if (!(slot_hours > 0.0)) throw ValidationError("TimeGrid.slot_hours must be > 0");
    }
    bool operator==(const TimeGrid&) const = default;
};

/// Per-slot solar irradiance samples, W/m².
struct IrradianceSeries {
    std::vector<double> values;

    void validate(const TimeGrid& grid) const {
        if (static_cast<int>(values.size()) != grid.slot_count) {
            throw ValidationError("irradiance series length " + std::to_string(values.size()) +
                                  " does not match slot count " + std::to_string(grid.slot_count));
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] >= 0.0)) {
                throw ValidationError("irradiance[" + std::to_string(i + 1) + "] must be >= 0");
            }
        }
    }
    bool operator==(const IrradianceSeries&) const = default;
};

/// Rooftop array: per-panel efficiency and area, and the panel count.
/// The panel count is real-valued; the sizing rule below yields fractional
/// counts and we keep them unrounded.
struct PvArray {
    double efficiency = 0.15;     // dimensionless, (0, 1]
    double panel_area_m2 = 1.953; // 1.926 m x 1.014 m module
    double panel_count = 0.0;

    void validate() const {
        if (!(efficiency > 0.0 && efficiency <= 1.0)) {
            throw ValidationError("PvArray.efficiency must be in (0, 1]");
        }
        if (!(panel_area_m2 > 0.0)) throw ValidationError("PvArray.panel_area_m2 must be > 0");
        if (!(panel_count >= 0.0)) throw ValidationError("PvArray.panel_count must be >= 0");
    }
    bool operator==(const PvArray&) const = default;
};

/// Station generation per slot, kWh.
struct GenerationProfile {
    std::vector<double> energy_kwh;

    double total_kwh() const {
        double sum = 0.0;
        for (double v : energy_kwh) sum += v;
        return sum;
    }
};

/// Energy produced by one panel over one slot, kWh.
/// Power is efficiency x area x irradiance (W); integrating over the slot
/// and converting W to kW gives kWh.
inline double panel_energy_kwh(double efficiency, double panel_area_m2,
                               double irradiance_w_per_m2, double slot_hours) {
    if (!(efficiency >= 0.0) || !(panel_area_m2 >= 0.0) ||
        !(irradiance_w_per_m2 >= 0.0) || !(slot_hours >= 0.0)) {
        throw ValidationError("panel_energy_kwh: all inputs must be >= 0");
    }
    if (efficiency > 1.0) throw ValidationError("panel_energy_kwh: efficiency must be <= 1");
    return efficiency * panel_area_m2 * irradiance_w_per_m2 * slot_hours / 1000.0;
}

/// Per-slot station generation: single-panel energy times the panel count.
inline GenerationProfile station_generation(const PvArray& array,
                                            const IrradianceSeries& irradiance,
                                            const TimeGrid& grid) {
    grid.validate();
    array.validate();
    irradiance.validate(grid);
    GenerationProfile profile;
    profile.energy_kwh.reserve(irradiance.values.size());
    for (double sample : irradiance.values) {
        profile.energy_kwh.push_back(
            panel_energy_kwh(array.efficiency, array.panel_area_m2, sample, grid.slot_hours) *
            array.panel_count);
    }
    return profile;
}

/// Panels that fit on the roof over a given number of vehicle spaces:
/// space footprint 2.4 m x 4.8 m, panel footprint 1.926 m x 1.014 m.
/// Returns a real-valued count (not rounded).
inline double panels_for_spaces(int vehicle_spaces) {
    if (vehicle_spaces < 0) throw ValidationError("panels_for_spaces: spaces must be >= 0");
    return static_cast<double>(vehicle_spaces) * (2.4 * 4.8) / (1.926 * 1.014);
}

/// Loads an irradiance CSV (header `slot,irradiance_w_per_m2`, slots 1..T
/// ascending). expected_slots < 0 accepts any length.
inline IrradianceSeries load_irradiance_csv(const std::string& path, int expected_slots = -1) {
    IrradianceSeries series;
    series.values = detail::read_slot_csv(path, "slot,irradiance_w_per_m2", expected_slots);
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (series.values[i] < 0.0) {
            throw ValidationError(path + ": irradiance at slot " + std::to_string(i + 1) +
                                  " is negative");
        }
    }
    return series;
}

} // namespace evsched

#endif // EVSCHED_PV_HPP
