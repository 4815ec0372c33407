#ifndef EVSCHED_ANALYSIS_HPP
#define EVSCHED_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evsched/scenario.hpp"
#include "evsched/scheduler.hpp"

namespace evsched {

/// Aggregated trading-cost analysis of one solved schedule. Average costs
/// are per vehicle of the class; a class that is absent reports NaN and a
/// zero count.
struct CostReport {
    double gamma_cents = 0.0;
    CostBreakdown breakdown;
    int premium_count = 0, conservative_count = 0, green_count = 0;
    double premium_avg_cost_cents = std::numeric_limits<double>::quiet_NaN();
    double conservative_avg_cost_cents = std::numeric_limits<double>::quiet_NaN();
    double green_avg_cost_cents = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    std::string season_label;
    double green_fraction = 0.0;
    std::string data_note =
        "bundled curves are synthetic stand-ins; absolute costs depend on the input data";
};

struct SweepRow {
    double param = 0.0;       // green fraction or panel count
    double gamma_cents = 0.0; // total trading cost
    double grid_in_kwh = 0.0; // bought from the grid
    double grid_out_kwh = 0.0; // sold to the grid
    double green_discharge_kwh = 0.0;
    double pv_kwh = 0.0;
};

namespace detail {

struct FlowTotals {
    double grid_in_kwh = 0.0;
    double grid_out_kwh = 0.0;
    double green_discharge_kwh = 0.0;
};

inline FlowTotals flow_totals(const Schedule& schedule) {
    FlowTotals totals;
    for (double v : schedule.grid_import_kwh) totals.grid_in_kwh += v;
    for (double v : schedule.grid_export_kwh) totals.grid_out_kwh += v;
    for (const EvTrajectory& ev : schedule.evs) {
        for (double v : ev.discharge_kwh) totals.green_discharge_kwh += v;
    }
    return totals;
}

// Net amount one vehicle paid the station over the day, cents.
inline double ev_cost_cents(const Scenario& scenario, const Schedule& schedule, std::size_t i) {
    const EvSpec& spec = scenario.fleet[i];
    const EvTrajectory& ev = schedule.evs[i];
    const SlotPrices prices = slot_prices(scenario);
    double cost = 0.0;
    for (int t = 0; t < scenario.grid.slot_count; ++t) {
        switch (ev.ev_class) {
            case EvClass::Green:
                cost += prices.green_charge[t] * ev.charge_kwh[t] -
                        prices.green_discharge[t] * ev.discharge_kwh[t];
                break;
            case EvClass::Premium:
                cost += prices.premium[t] * ev.charge_kwh[t];
                break;
            case EvClass::Conservative:
                cost += (ev.premium_treated
                             ? prices.premium[t]
                             : conservative_price(prices.premium[t],
                                                  scenario.tariff.conservative_spread_cents,
                                                  spec.max_rate_kwh_per_slot,
                                                  conservative_rate(
                                                      spec, scenario.config.battery_efficiency))) *
                        ev.charge_kwh[t];
                break;
        }
    }
    return cost;
}

} // namespace detail

/// Recomputes every cost term from the raw flows and prices and aggregates
/// per-class averages.
inline CostReport cost_report(const Schedule& schedule, const Scenario& scenario,
                              std::string season_label = "") {
    CostReport report;
    report.breakdown = detail::breakdown_from_flows(scenario, schedule);
    report.gamma_cents = report.breakdown.total();
    double class_total[3] = {0.0, 0.0, 0.0};
    int class_count[3] = {0, 0, 0};
    for (std::size_t i = 0; i < scenario.fleet.size(); ++i) {
        const int c = static_cast<int>(scenario.fleet[i].ev_class);
        class_total[c] += detail::ev_cost_cents(scenario, schedule, i);
        ++class_count[c];
    }
    report.premium_count = class_count[static_cast<int>(EvClass::Premium)];
    report.conservative_count = class_count[static_cast<int>(EvClass::Conservative)];
    report.green_count = class_count[static_cast<int>(EvClass::Green)];
    if (report.premium_count > 0) {
        report.premium_avg_cost_cents =
            class_total[static_cast<int>(EvClass::Premium)] / report.premium_count;
    }
    if (report.conservative_count > 0) {
        report.conservative_avg_cost_cents =
            class_total[static_cast<int>(EvClass::Conservative)] / report.conservative_count;
    }
    if (report.green_count > 0) {
        report.green_avg_cost_cents =
            class_total[static_cast<int>(EvClass::Green)] / report.green_count;
    }
    report.seed = scenario.config.seed;
    report.season_label = std::move(season_label);
    report.green_fraction =
        scenario.fleet.empty()
            ? 0.0
            : static_cast<double>(report.green_count) / static_cast<double>(scenario.fleet.size());
    return report;
}

/// Optimizes the same vehicle population under a list of green fractions.
/// Rows come back ordered by fraction. An infeasible row aborts the sweep.
inline std::vector<SweepRow> penetration_sweep(const Scenario& base,
                                               std::vector<double> fractions,
                                               const SolveOptions& options = {}) {
    std::sort(fractions.begin(), fractions.end());
    const GenerationProfile gen = station_generation(base.pv, base.irradiance, base.grid);
    std::vector<SweepRow> rows;
    for (double fraction : fractions) {
        const Scenario scenario = with_green_fraction(base, fraction);
        const Schedule schedule = optimize(scenario, options);
        if (schedule.status != SolveStatus::Optimal &&
            schedule.status != SolveStatus::LimitReached) {
            throw ValidationError("penetration sweep at fraction " + std::to_string(fraction) +
                                  ": " + std::string(to_string(schedule.status)) +
                                  (schedule.infeasible_hint.empty() ? ""
                                                                    : ": " + schedule.infeasible_hint));
        }
        const detail::FlowTotals totals = detail::flow_totals(schedule);
        rows.push_back({fraction, schedule.total_cost_cents, totals.grid_in_kwh,
                        totals.grid_out_kwh, totals.green_discharge_kwh, gen.total_kwh()});
    }
    return rows;
}

/// Optimizes the same fleet under different rooftop panel counts.
inline std::vector<SweepRow> panel_sweep(const Scenario& base, std::vector<double> panel_counts,
                                         const SolveOptions& options = {}) {
    std::sort(panel_counts.begin(), panel_counts.end());
    std::vector<SweepRow> rows;
    for (double count : panel_counts) {
        if (count < 0.0) throw ValidationError("panel_sweep: panel counts must be >= 0");
        Scenario scenario = base;
        scenario.pv.panel_count = count;
        const GenerationProfile gen =
            station_generation(scenario.pv, scenario.irradiance, scenario.grid);
        const Schedule schedule = optimize(scenario, options);
        if (schedule.status != SolveStatus::Optimal &&
            schedule.status != SolveStatus::LimitReached) {
            throw ValidationError("panel sweep at count " + std::to_string(count) + ": " +
                                  std::string(to_string(schedule.status)));
        }
        const detail::FlowTotals totals = detail::flow_totals(schedule);
        rows.push_back({count, schedule.total_cost_cents, totals.grid_in_kwh, totals.grid_out_kwh,
                        totals.green_discharge_kwh, gen.total_kwh()});
    }
    return rows;
}

/// Neutral default for the fixed-contract comparison: the mean grid sell
/// price of the scenario.
inline double default_contract_price(const Scenario& scenario) {
    double sum = 0.0;
    for (double p : scenario.prices.grid_sell_cents_per_kwh) sum += p;
    return sum / static_cast<double>(scenario.prices.grid_sell_cents_per_kwh.size());
}

/// Comparison floor: every vehicle is green and a single contract price
/// replaces the grid buy/sell prices and every per-class price.
inline CostReport baseline_fixed_contract(const Scenario& scenario, double contract_cents,
                                          const SolveOptions& options = {}) {
    if (!(contract_cents > 0.0)) {
        throw ValidationError("baseline_fixed_contract: contract price must be > 0");
    }
    Scenario baseline = with_green_fraction(scenario, 1.0);
    baseline.tariff.markup_cents = 0.0;          // per-class price == contract
    baseline.tariff.conservative_spread_cents = 0.0;
    baseline.tariff.green_charge_factor = 1.0;
    baseline.tariff.green_discharge_factor = 1.0;
    baseline.tariff.grid_spread_cents = 0.0;     // buy == sell == contract
    baseline.prices = make_price_curve(
        std::vector<double>(baseline.grid.slot_count, contract_cents), 0.0);
    const Schedule schedule = optimize(baseline, options);
    if (schedule.status != SolveStatus::Optimal && schedule.status != SolveStatus::LimitReached) {
        throw ValidationError("baseline_fixed_contract: " +
                              std::string(to_string(schedule.status)));
    }
    return cost_report(schedule, baseline, "baseline");
}

struct SeasonalComparison {
    CostReport summer;
    CostReport winter;
    double summer_green_discharge_kwh = 0.0;
    double winter_green_discharge_kwh = 0.0;
};

/// Two optimized runs differing only in the irradiance series.
inline SeasonalComparison seasonal_compare(const Scenario& base,
                                           const IrradianceSeries& summer,
                                           const IrradianceSeries& winter,
                                           const SolveOptions& options = {}) {
    SeasonalComparison cmp;
    Scenario s = base;
    s.irradiance = summer;
    const Schedule summer_schedule = optimize(s, options);
    cmp.summer = cost_report(summer_schedule, s, "summer");
    cmp.summer_green_discharge_kwh = detail::flow_totals(summer_schedule).green_discharge_kwh;
    Scenario w = base;
    w.irradiance = winter;
    const Schedule winter_schedule = optimize(w, options);
    cmp.winter = cost_report(winter_schedule, w, "winter");
    cmp.winter_green_discharge_kwh = detail::flow_totals(winter_schedule).green_discharge_kwh;
    return cmp;
}

inline nlohmann::json report_to_json(const CostReport& report) {
    nlohmann::json j;
    j["gamma_cents"] = report.gamma_cents;
    j["breakdown"] = {{"green_discharge_payments", report.breakdown.green_discharge_payments},
                      {"grid_purchase_cost", report.breakdown.grid_purchase_cost},
                      {"green_charge_revenue", report.breakdown.green_charge_revenue},
                      {"premium_revenue", report.breakdown.premium_revenue},
                      {"conservative_revenue", report.breakdown.conservative_revenue},
                      {"grid_sale_revenue", report.breakdown.grid_sale_revenue}};
    const auto avg = [](double v) {
        return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
    };
    j["per_class"] = {
        {"premium", {{"count", report.premium_count}, {"avg_cost_cents", avg(report.premium_avg_cost_cents)}}},
        {"conservative",
         {{"count", report.conservative_count}, {"avg_cost_cents", avg(report.conservative_avg_cost_cents)}}},
        {"green", {{"count", report.green_count}, {"avg_cost_cents", avg(report.green_avg_cost_cents)}}}};
    j["seed"] = report.seed;
    j["season"] = report.season_label;
    j["green_fraction"] = report.green_fraction;
    j["data_note"] = report.data_note;
    return j;
}

inline void write_report_text(const CostReport& report, std::ostream& os) {
    const auto line = [&](const std::string& label, double value) {
        os << std::left << std::setw(28) << label << std::right << std::setw(12) << std::fixed
           << std::setprecision(2) << value << "\n";
    };
    os << "trading cost report";
    if (!report.season_label.empty()) os << " (" << report.season_label << ")";
    os << "\n";
    line("total cost (cents)", report.gamma_cents);
    line("  green discharge payments", report.breakdown.green_discharge_payments);
    line("  grid purchases", report.breakdown.grid_purchase_cost);
    line("  green charging revenue", report.breakdown.green_charge_revenue);
    line("  premium revenue", report.breakdown.premium_revenue);
    line("  conservative revenue", report.breakdown.conservative_revenue);
    line("  grid sales revenue", report.breakdown.grid_sale_revenue);
    const auto avg_line = [&](const std::string& label, int count, double value) {
        os << std::left << std::setw(28) << label;
        if (count > 0) {
            os << std::right << std::setw(12) << std::fixed << std::setprecision(2) << value
               << "  (n=" << count << ")";
        } else {
            os << std::right << std::setw(12) << "n/a";
        }
        os << "\n";
    };
    avg_line("avg premium EV cost", report.premium_count, report.premium_avg_cost_cents);
    avg_line("avg conservative EV cost", report.conservative_count,
             report.conservative_avg_cost_cents);
    avg_line("avg green EV cost", report.green_count, report.green_avg_cost_cents);
    os << "note: " << report.data_note << "\n";
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "param,gamma_cents,grid_in_kwh,grid_out_kwh,green_discharge_kwh,pv_kwh\n";
    for (const SweepRow& row : rows) {
        os << row.param << ',' << row.gamma_cents << ',' << row.grid_in_kwh << ','
           << row.grid_out_kwh << ',' << row.green_discharge_kwh << ',' << row.pv_kwh << "\n";
    }
}

inline nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SweepRow& row : rows) {
        arr.push_back({{"param", row.param},
                       {"gamma_cents", row.gamma_cents},
                       {"grid_in_kwh", row.grid_in_kwh},
                       {"grid_out_kwh", row.grid_out_kwh},
                       {"green_discharge_kwh", row.green_discharge_kwh},
                       {"pv_kwh", row.pv_kwh}});
    }
    return arr;
}

} // namespace evsched

#endif // EVSCHED_ANALYSIS_HPP
