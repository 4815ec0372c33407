#ifndef EVSCHED_TARIFF_HPP
#define EVSCHED_TARIFF_HPP

#include <cmath>
#include <string>
#include <vector>

#include "evsched/common.hpp"
#include "evsched/detail/csv.hpp"
#include "evsched/pv.hpp"

namespace evsched {

/// Station-wide pricing parameters, all prices in cents/kWh.
///   markup_cents            premium markup added to the grid sell price
///   conservative_spread_cents  half-width of the rate-dependent discount band
///   green_charge_factor     discount factor on the premium price for green charging
///   green_discharge_factor  fraction of the green charge price paid for discharge
///   grid_spread_cents       grid buy price = sell price - spread
struct TariffParams {
    double markup_cents = 5.0;
    double conservative_spread_cents = 4.0;
    double green_charge_factor = 0.75;
    double green_discharge_factor = 0.85;
    double grid_spread_cents = 2.0;

    void validate() const {
        if (!(markup_cents >= 0.0)) throw ValidationError("TariffParams.markup_cents must be >= 0");
        if (!(conservative_spread_cents >= 0.0)) {
            throw ValidationError("TariffParams.conservative_spread_cents must be >= 0");
        }
        if (!(green_charge_factor > 0.0 && green_charge_factor <= 1.0)) {
            throw ValidationError("TariffParams.green_charge_factor must be in (0, 1]");
        }
        if (!(green_discharge_factor > 0.0 && green_discharge_factor <= 1.0)) {
            throw ValidationError("TariffParams.green_discharge_factor must be in (0, 1]");
        }
        if (!(grid_spread_cents >= 0.0)) {
            throw ValidationError("TariffParams.grid_spread_cents must be >= 0");
        }
    }
    bool operator==(const TariffParams&) const = default;
};

/// Grid buy price: what the grid pays the station per kWh.
inline double grid_buy_price(double grid_sell_price, double grid_spread) {
    if (!(grid_spread >= 0.0)) throw ValidationError("grid_buy_price: spread must be >= 0");
    const double buy = grid_sell_price - grid_spread;
    if (buy < 0.0) {
        throw ValidationError("grid_buy_price: sell price " + std::to_string(grid_sell_price) +
                              " below spread " + std::to_string(grid_spread));
    }
    return buy;
}

/// Premium charging price: grid sell price plus the station markup.
inline double premium_price(double grid_sell_price, double markup) {
    if (!(grid_sell_price >= 0.0) || !(markup >= 0.0)) {
        throw ValidationError("premium_price: inputs must be >= 0");
    }
    return grid_sell_price + markup;
}

/// Rate-dependent conservative price. Slower charging earns a discount below
/// the premium price; the price rises back to the premium price as the
/// conservative rate approaches the premium rate. A conservative rate at or
/// above the premium rate is capped at the premium price (the vehicle is
/// treated as premium). The cap lives here so the formula's discontinuity is
/// owned by one function.
inline double conservative_price(double premium_price_cents, double spread_gamma,
                                 double premium_rate, double conservative_rate) {
    if (!(premium_rate > 0.0)) throw ValidationError("conservative_price: premium rate must be > 0");
    if (!(conservative_rate >= 0.0)) {
        throw ValidationError("conservative_price: conservative rate must be >= 0");
    }
    if (conservative_rate >= premium_rate) return premium_price_cents;
    return premium_price_cents + spread_gamma -
           2.0 * spread_gamma * premium_rate / (premium_rate + conservative_rate);
}

/// Green charging price: discounted premium price.
inline double green_charge_price(double premium_price_cents, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("green_charge_price: eta must be in (0, 1]");
    return premium_price_cents * eta;
}

/// Price paid to a green vehicle per discharged kWh.
inline double green_discharge_price(double green_charge_price_cents, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw ValidationError("green_discharge_price: epsilon must be in (0, 1]");
    }
    return green_charge_price_cents * epsilon;
}

/// Grid sell and derived buy prices per slot, cents/kWh.
struct PriceCurve {
    std::vector<double> grid_sell_cents_per_kwh;
    std::vector<double> grid_buy_cents_per_kwh;

    void validate(const TimeGrid& grid, double grid_spread) const {
        if (static_cast<int>(grid_sell_cents_per_kwh.size()) != grid.slot_count ||
            grid_buy_cents_per_kwh.size() != grid_sell_cents_per_kwh.size()) {
            throw ValidationError("price curve length does not match slot count");
        }
        for (std::size_t i = 0; i < grid_sell_cents_per_kwh.size(); ++i) {
            if (!(grid_sell_cents_per_kwh[i] > 0.0)) {
                throw ValidationError("sell price at slot " + std::to_string(i + 1) +
                                      " must be > 0");
            }
            const double expected = grid_sell_cents_per_kwh[i] - grid_spread;
            if (grid_buy_cents_per_kwh[i] < 0.0 ||
                std::abs(grid_buy_cents_per_kwh[i] - expected) > 1e-9) {
                throw ValidationError("buy price at slot " + std::to_string(i + 1) +
                                      " must equal sell price minus the grid spread");
            }
        }
    }
    bool operator==(const PriceCurve&) const = default;
};

/// Builds a curve from sell prices, deriving buy prices via the spread.
inline PriceCurve make_price_curve(std::vector<double> sell_cents, double grid_spread) {
    PriceCurve curve;
    curve.grid_buy_cents_per_kwh.reserve(sell_cents.size());
    for (std::size_t i = 0; i < sell_cents.size(); ++i) {
        if (!(sell_cents[i] > 0.0)) {
            throw ValidationError("sell price at slot " + std::to_string(i + 1) + " must be > 0");
        }
        curve.grid_buy_cents_per_kwh.push_back(grid_buy_price(sell_cents[i], grid_spread));
    }
    curve.grid_sell_cents_per_kwh = std::move(sell_cents);
    return curve;
}

/// Loads a price CSV (header `slot,grid_sell_cents_per_kwh`, slots 1..T
/// ascending) and derives buy prices. expected_slots < 0 accepts any length.
inline PriceCurve load_price_csv(const std::string& path, double grid_spread,
                                 int expected_slots = -1) {
    auto sell = detail::read_slot_csv(path, "slot,grid_sell_cents_per_kwh", expected_slots);
    try {
        return make_price_curve(std::move(sell), grid_spread);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

} // namespace evsched

#endif // EVSCHED_TARIFF_HPP
