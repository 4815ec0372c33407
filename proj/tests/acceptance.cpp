// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Large-instance solves run under a fixed deterministic node budget; their
// schedules are validated feasible regardless of proof status, and the
// status is printed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "evsched/evsched.hpp"

using namespace evsched;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int index, bool pass, const std::string& name, const std::string& detail) {
    std::printf("[%2d] %s  %s%s%s\n", index, pass ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

// Node-based budgets keep every run deterministic. The feasibility suite
// uses a lean cap (feasibility and the SOC/flow properties hold by
// construction for any incumbent); ordering and trend criteria get a richer
// cap for incumbent quality.
SolveOptions lean_options() {
    SolveOptions options;
    options.node_limit = 60;
    options.heuristic_node_budget = 400;
    return options;
}

SolveOptions rich_options() {
    SolveOptions options;
    options.node_limit = 150;
    options.heuristic_node_budget = 2500;
    return options;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// ---- criterion 1: solver vs exhaustive enumeration ------------------------

MilpModel random_milp(Rng& rng, int binaries, int continuous) {
    MilpModel model;
    for (int j = 0; j < binaries; ++j) {
        const int v = model.add_variable(0.0, 1.0, true, "b" + std::to_string(j));
        model.set_objective_coeff(v, rng.uniform_int(-10, 10));
    }
    for (int j = 0; j < continuous; ++j) {
        const int v =
            model.add_variable(0.0, rng.uniform(0.5, 10.0), false, "c" + std::to_string(j));
        model.set_objective_coeff(v, rng.uniform_int(-10, 10));
    }
    const int rows = rng.uniform_int(2, 4 + (binaries + continuous) / 3);
    for (int i = 0; i < rows; ++i) {
        std::vector<LinearTerm> terms;
        for (int j = 0; j < model.var_count(); ++j) {
            if (rng.uniform01() < 0.6) continue;
            const int coeff = rng.uniform_int(-5, 5);
            if (coeff != 0) terms.push_back({j, static_cast<double>(coeff)});
        }
        if (terms.empty()) continue;
        const int sense = rng.uniform_int(0, 2);
        model.add_constraint(std::move(terms),
                             sense == 0   ? RowSense::LessEqual
                             : sense == 1 ? RowSense::GreaterEqual
                                          : RowSense::Equal,
                             rng.uniform_int(-8, 15));
    }
    return model;
}

void criterion_solver_oracle() {
    const auto start = clock_type::now();
    Rng rng(2024);
    int checked = 0;
    bool pass = true;
    std::string detail;
    for (int i = 0; i < 25; ++i) {
        const int nb = i < 3 ? 12 : rng.uniform_int(2, 12);
        const int nc = rng.uniform_int(0, 30);
        const MilpModel model = random_milp(rng, nb, nc);
        // enumeration oracle
        std::vector<int> bins;
        for (int j = 0; j < model.var_count(); ++j) {
            if (model.vars()[j].integral) bins.push_back(j);
        }
        std::vector<double> lo(model.var_count()), hi(model.var_count());
        for (int j = 0; j < model.var_count(); ++j) {
            lo[j] = model.vars()[j].lower;
            hi[j] = model.vars()[j].upper;
        }
        double oracle = std::numeric_limits<double>::infinity();
        for (std::uint32_t bits = 0; bits < (1u << bins.size()); ++bits) {
            auto l = lo, h = hi;
            for (std::size_t k = 0; k < bins.size(); ++k) {
                l[bins[k]] = h[bins[k]] = (bits >> k) & 1u;
            }
            const LpResult r = solve_lp(model, l, h);
            if (r.status == SolveStatus::Optimal) oracle = std::min(oracle, r.objective);
        }
        const MilpSolution s = solve(model);
        ++checked;
        if (std::isfinite(oracle)) {
            if (s.status != SolveStatus::Optimal || std::abs(s.objective - oracle) > 1e-6) {
                pass = false;
                detail = "model " + std::to_string(i) + ": tree " +
                         (s.status == SolveStatus::Optimal ? fmt(s.objective)
                                                           : to_string(s.status)) +
                         " vs enumeration " + fmt(oracle);
                break;
            }
        } else if (s.status != SolveStatus::Infeasible) {
            pass = false;
            detail = "model " + std::to_string(i) + ": expected infeasible";
            break;
        }
    }
    const double elapsed = seconds_since(start);
    if (pass && elapsed >= 10.0) {
        pass = false;
        detail = "runtime " + fmt(elapsed) + " s exceeds 10 s";
    }
    if (pass) {
        detail = std::to_string(checked) + " models, " + fmt(elapsed) + " s";
    }
    report(1, pass, "solver equals exhaustive enumeration on random MILPs", detail);
}

// ---- criterion 2: scheduler vs exhaustive oracle ---------------------------

Scenario tiny_instance(std::uint64_t seed, int slots) {
    Scenario sc;
    sc.grid = TimeGrid{slots, 0.5, "07:00"};
    sc.pv = PvArray{0.15, 1.953, panels_for_spaces(24)};
    sc.tariff = TariffParams{};
    sc.config = ScenarioConfig{};
    sc.config.premium_count = sc.config.conservative_count = 0;
    sc.config.green_count = 1;
    sc.config.seed = seed;
    Rng rng(seed);
    sc.irradiance.values.resize(slots);
    std::vector<double> sell(slots);
    for (int t = 0; t < slots; ++t) {
        sc.irradiance.values[t] = rng.uniform(0.0, 1000.0);
        sell[t] = 14.0 + rng.uniform(0.0, 22.0);
    }
    sc.prices = make_price_curve(sell, sc.tariff.grid_spread_cents);
    EvSpec green;
    green.id = "g1";
    green.ev_class = EvClass::Green;
    green.capacity_kwh = 30.0;
    green.initial_soc_kwh = 6.0 + rng.uniform(0.0, 3.0);
    green.target_soc_kwh = green.initial_soc_kwh + rng.uniform(2.0, 6.0);
    green.min_soc_kwh = 5.0;
    green.green_floor_kwh = 9.0;
    green.arrive_slot = 1;
    green.leave_slot = slots;
    green.max_rate_kwh_per_slot = 5.0;
    sc.fleet.push_back(green);
    return sc;
}

void criterion_scheduler_oracle() {
    const auto start = clock_type::now();
    bool pass = true;
    std::string detail;
    for (int i = 0; i < 10 && pass; ++i) {
        const int slots = 3 + (i % 2);
        const Scenario sc = tiny_instance(300 + i, slots);
        const FixedLoadProfile fixed = build_fixed_load(
            sc.fleet, sc.prices, sc.tariff, sc.config.battery_efficiency, sc.grid);
        auto [model, map] = build_model(sc, fixed);
        std::vector<int> bins;
        for (int t = 0; t < slots; ++t) bins.push_back(map.grid_mode[t]);
        for (const auto& block : map.greens) {
            for (int v : block.mode) bins.push_back(v);
        }
        std::vector<double> lo(model.var_count()), hi(model.var_count());
        for (int j = 0; j < model.var_count(); ++j) {
            lo[j] = model.vars()[j].lower;
            hi[j] = model.vars()[j].upper;
        }
        double oracle = std::numeric_limits<double>::infinity();
        for (std::uint32_t bits = 0; bits < (1u << bins.size()); ++bits) {
            auto l = lo, h = hi;
            bool ok = true;
            for (std::size_t k = 0; k < bins.size(); ++k) {
                const double v = (bits >> k) & 1u;
                if (v < lo[bins[k]] - 0.5 || v > hi[bins[k]] + 0.5) {
                    ok = false;
                    break;
                }
                l[bins[k]] = h[bins[k]] = v;
            }
            if (!ok) continue;
            const LpResult r = solve_lp(model, l, h);
            if (r.status == SolveStatus::Optimal) oracle = std::min(oracle, r.objective);
        }
        const Schedule s = optimize(sc);
        if (s.status != SolveStatus::Optimal ||
            std::abs(s.total_cost_cents - oracle) > 1e-6 * std::max(1.0, std::abs(oracle))) {
            pass = false;
            detail = "instance " + std::to_string(i) + ": optimize " + fmt(s.total_cost_cents) +
                     " vs oracle " + fmt(oracle);
        }
    }
    if (pass) detail = "10 instances, " + fmt(seconds_since(start)) + " s";
    report(2, pass, "scheduler equals the y/x enumeration oracle on tiny instances", detail);
}

// ---- criteria 3-5: feasibility suite ---------------------------------------

struct SuiteResult {
    std::vector<Scenario> scenarios;
    std::vector<Schedule> schedules;
    double worst_seconds = 0.0;
    int limit_reached = 0;
};

SuiteResult run_feasibility_suite() {
    SuiteResult out;
    const SolveOptions options = lean_options();
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const Scenario sc = generate_scenario(ScenarioConfig{}, seed);
        const auto start = clock_type::now();
        Schedule s = optimize(sc, options);
        out.worst_seconds = std::max(out.worst_seconds, seconds_since(start));
        if (s.status == SolveStatus::LimitReached) ++out.limit_reached;
        out.scenarios.push_back(sc);
        out.schedules.push_back(std::move(s));
    }
    return out;
}

void criterion_feasibility(const SuiteResult& suite) {
    bool pass = true;
    std::string detail;
    int violations = 0;
    for (std::size_t i = 0; i < suite.scenarios.size() && pass; ++i) {
        const Schedule& s = suite.schedules[i];
        if (s.status != SolveStatus::Optimal && s.status != SolveStatus::LimitReached) {
            pass = false;
            detail = "seed " + std::to_string(i + 1) + ": " + to_string(s.status);
            break;
        }
        const auto v = validate_schedule(suite.scenarios[i], s);
        violations += static_cast<int>(v.size());
        if (!v.empty()) {
            pass = false;
            detail = "seed " + std::to_string(i + 1) + ": " + v.front().family + ": " +
                     v.front().message;
        }
    }
    if (pass && suite.worst_seconds >= 60.0) {
        pass = false;
        detail = "slowest solve " + fmt(suite.worst_seconds) + " s exceeds 60 s";
    }
    if (pass) {
        detail = "50 seeds, 0 violations, slowest solve " + fmt(suite.worst_seconds) + " s, " +
                 std::to_string(suite.limit_reached) + " node-capped (best incumbent, validated)";
    }
    report(3, pass, "feasibility suite validates clean at 1e-6", detail);
}

void criterion_complementarity(const SuiteResult& suite) {
    double worst = 0.0;
    for (std::size_t i = 0; i < suite.scenarios.size(); ++i) {
        const Schedule& s = suite.schedules[i];
        for (std::size_t t = 0; t < s.grid_import_kwh.size(); ++t) {
            worst = std::max(worst, std::min(s.grid_import_kwh[t], s.grid_export_kwh[t]));
        }
        for (const EvTrajectory& ev : s.evs) {
            for (std::size_t t = 0; t < ev.charge_kwh.size(); ++t) {
                worst = std::max(worst, std::min(ev.charge_kwh[t], ev.discharge_kwh[t]));
            }
        }
    }
    report(4, worst <= 1e-6, "no simultaneous grid or battery flows",
           "largest simultaneous flow " + fmt(worst * 1e9) + "e-9 kWh");
}

void criterion_terminal_soc(const SuiteResult& suite) {
    bool pass = true;
    std::string detail;
    for (std::size_t i = 0; i < suite.scenarios.size() && pass; ++i) {
        const Scenario& sc = suite.scenarios[i];
        const Schedule& s = suite.schedules[i];
        for (std::size_t n = 0; n < sc.fleet.size(); ++n) {
            const EvSpec& spec = sc.fleet[n];
            if (s.evs[n].soc_kwh[spec.leave_slot - 1] < spec.target_soc_kwh - 1e-6) {
                pass = false;
                detail = "seed " + std::to_string(i + 1) + ", " + spec.id + " ends below target";
                break;
            }
            // premium twin reaches the target no later than the conservative plan
            if (spec.ev_class == EvClass::Conservative) {
                EvSpec twin = spec;
                twin.ev_class = EvClass::Premium;
                const auto premium = premium_schedule(twin, sc.config.battery_efficiency, sc.grid);
                const auto conservative =
                    conservative_schedule(spec, sc.config.battery_efficiency, sc.grid);
                int premium_hit = sc.grid.slot_count + 1, conservative_hit = sc.grid.slot_count + 1;
                for (int t = 0; t < sc.grid.slot_count; ++t) {
                    if (premium.soc_kwh[t] >= spec.target_soc_kwh - 1e-9) {
                        premium_hit = std::min(premium_hit, t + 1);
                    }
                    if (conservative.soc_kwh[t] >= spec.target_soc_kwh - 1e-9) {
                        conservative_hit = std::min(conservative_hit, t + 1);
                    }
                }
                if (premium_hit > conservative_hit) {
                    pass = false;
                    detail = "seed " + std::to_string(i + 1) + ", " + spec.id +
                             ": premium twin reaches the target later";
                    break;
                }
            }
        }
    }
    if (pass) detail = "all vehicles end at or above target across 50 seeds";
    report(5, pass, "terminal SOC reached; premium never later than conservative", detail);
}

// ---- criterion 6: early-leave ordering -------------------------------------

void criterion_early_leave(const Scenario& sc, const Schedule& s) {
    const EarlyLeaveReport report6 = evaluate_early_leaving(s, sc, 2);
    double sum[3] = {0, 0, 0};
    int count[3] = {0, 0, 0};
    bool floor_ok = true;
    for (const auto& entry : report6.entries) {
        const int c = static_cast<int>(entry.ev_class);
        sum[c] += entry.soc_kwh / entry.target_kwh; // target-normalized, as plotted
        count[c] += 1;
        if (entry.ev_class == EvClass::Green) floor_ok &= entry.floor_encoding_ok;
    }
    bool pass = true;
    std::string detail;
    double avg[3] = {0, 0, 0};
    for (int c = 0; c < 3; ++c) {
        if (count[c] == 0) {
            pass = false;
            detail = "a class has no evaluable vehicle at k=2";
        } else {
            avg[c] = sum[c] / count[c];
        }
    }
    const double premium = avg[static_cast<int>(EvClass::Premium)];
    const double conservative = avg[static_cast<int>(EvClass::Conservative)];
    const double green = avg[static_cast<int>(EvClass::Green)];
    if (pass && !(premium >= conservative - 1e-9)) {
        pass = false;
        detail = "premium " + fmt(premium) + " < conservative " + fmt(conservative);
    }
    if (pass && !(green <= conservative + 1e-9 && green <= premium + 1e-9)) {
        pass = false;
        detail = "green " + fmt(green) + " is not the lowest";
    }
    if (pass && !floor_ok) {
        pass = false;
        detail = "a green vehicle violates the discharge-floor encoding at t_l - 2";
    }
    if (pass) {
        detail = "avg SOC/target at t_l-2: premium " + fmt(premium) + ", conservative " +
                 fmt(conservative) + ", green " + fmt(green);
    }
    report(6, pass, "early-leave SOC ordering (premium >= conservative, green lowest)", detail);
}

// ---- criteria 7-8: trends ---------------------------------------------------

void criterion_penetration_trend() {
    const Scenario base = generate_scenario(ScenarioConfig{}, 7); // bundled summer data
    const SolveOptions options = rich_options();
    bool pass = true;
    std::string detail;
    try {
        const auto rows = penetration_sweep(base, {0.0, 0.25, 0.5, 0.75, 1.0}, options);
        double lo = rows[0].gamma_cents, hi = rows[0].gamma_cents;
        for (const auto& row : rows) {
            lo = std::min(lo, row.gamma_cents);
            hi = std::max(hi, row.gamma_cents);
        }
        const double slack = 0.01 * (hi - lo);
        for (std::size_t i = 1; i < rows.size() && pass; ++i) {
            if (rows[i].gamma_cents > rows[i - 1].gamma_cents + slack) {
                pass = false;
                detail = "cost rises from " + fmt(rows[i - 1].gamma_cents) + " to " +
                         fmt(rows[i].gamma_cents) + " at fraction " + fmt(rows[i].param);
            }
        }
        const double contract = default_contract_price(base);
        const CostReport baseline = baseline_fixed_contract(base, contract, options);
        const double d100 = std::abs(rows[4].gamma_cents - baseline.gamma_cents);
        const double d25 = std::abs(rows[1].gamma_cents - baseline.gamma_cents);
        if (pass && !(d100 < d25)) {
            pass = false;
            detail = "full-green distance to baseline " + fmt(d100) +
                     " not below quarter-green distance " + fmt(d25);
        }
        if (pass) {
            detail = "cost " + fmt(rows[0].gamma_cents) + " -> " + fmt(rows[4].gamma_cents) +
                     " cents; baseline " + fmt(baseline.gamma_cents) + ", distances " +
                     fmt(d25) + " -> " + fmt(d100);
        }
    } catch (const std::exception& e) {
        pass = false;
        detail = e.what();
    }
    report(7, pass, "cost falls with green share and approaches the baseline", detail);
}

void criterion_seasonal_trend() {
    const Scenario base = generate_scenario(ScenarioConfig{}, 7);
    const SolveOptions options = rich_options();
    bool pass = true;
    std::string detail;
    try {
        const SeasonalComparison cmp =
            seasonal_compare(base, builtin_summer_irradiance(base.grid),
                             builtin_winter_irradiance(base.grid), options);
        if (!(cmp.winter.gamma_cents >= cmp.summer.gamma_cents - 1e-6)) {
            pass = false;
            detail = "winter cost " + fmt(cmp.winter.gamma_cents) + " below summer " +
                     fmt(cmp.summer.gamma_cents);
        } else if (!(cmp.winter_green_discharge_kwh >= cmp.summer_green_discharge_kwh - 1e-6)) {
            pass = false;
            detail = "winter discharge " + fmt(cmp.winter_green_discharge_kwh) +
                     " kWh below summer " + fmt(cmp.summer_green_discharge_kwh) + " kWh";
        } else {
            detail = "cost " + fmt(cmp.summer.gamma_cents) + " -> " + fmt(cmp.winter.gamma_cents) +
                     " cents; green discharge " + fmt(cmp.summer_green_discharge_kwh) + " -> " +
                     fmt(cmp.winter_green_discharge_kwh) + " kWh";
        }
    } catch (const std::exception& e) {
        pass = false;
        detail = e.what();
    }
    report(8, pass, "winter costs more and draws more from green batteries", detail);
}

// ---- criterion 9: per-class cost ordering ----------------------------------

void criterion_class_costs(const Scenario& sc, const Schedule& s) {
    const CostReport report9 = cost_report(s, sc);
    bool pass = report9.green_avg_cost_cents < report9.conservative_avg_cost_cents &&
                report9.conservative_avg_cost_cents <= report9.premium_avg_cost_cents + 1e-9;
    const std::string detail = "avg cents/vehicle: green " + fmt(report9.green_avg_cost_cents) +
                               ", conservative " + fmt(report9.conservative_avg_cost_cents) +
                               ", premium " + fmt(report9.premium_avg_cost_cents);
    report(9, pass, "green vehicles pay least, premium most", detail);
}

// ---- criterion 10: pricing identities ---------------------------------------

void criterion_pricing() {
    bool pass = true;
    std::string detail;
    if (conservative_price(25.0, 4.0, 5.0, 5.0) != 25.0) {
        pass = false;
        detail = "equal rates must collapse to the premium price";
    }
    if (pass && std::abs(conservative_price(25.0, 4.0, 5.0, 0.0) - 21.0) > 1e-12) {
        pass = false;
        detail = "zero rate must price at premium minus the band";
    }
    Rng rng(555);
    for (int i = 0; i < 1000 && pass; ++i) {
        const double premium_rate = rng.uniform(0.5, 8.0);
        double r1 = rng.uniform(0.0, premium_rate * 0.999);
        double r2 = rng.uniform(0.0, premium_rate * 0.999);
        if (r1 == r2) continue;
        if (r1 > r2) std::swap(r1, r2);
        const double p = rng.uniform(5.0, 40.0);
        const double gamma = rng.uniform(0.5, 8.0);
        if (!(conservative_price(p, gamma, premium_rate, r1) <
              conservative_price(p, gamma, premium_rate, r2))) {
            pass = false;
            detail = "monotonicity fails at rates " + fmt(r1) + " < " + fmt(r2);
        }
    }
    for (int i = 0; i < 100 && pass; ++i) {
        const double p = rng.uniform(0.0, 50.0);
        const double eta = rng.uniform(0.01, 1.0);
        const double eps = rng.uniform(0.01, 1.0);
        if (green_charge_price(p, eta) != p * eta ||
            green_discharge_price(p * eta, eps) != p * eta * eps) {
            pass = false;
            detail = "factor identities must hold exactly";
        }
    }
    if (pass) detail = "cap, band floor, 1000-pair monotonicity, exact factor identities";
    report(10, pass, "rate-dependent and green pricing identities", detail);
}

// ---- criterion 11: pv sizing and linearity ----------------------------------

void criterion_pv() {
    bool pass = std::abs(panels_for_spaces(24) - 141.569) <= 1e-3;
    std::string detail;
    if (!pass) detail = "panels_for_spaces(24) = " + fmt(panels_for_spaces(24));
    Rng rng(777);
    const TimeGrid grid;
    const IrradianceSeries series = builtin_summer_irradiance(grid);
    for (int i = 0; i < 50 && pass; ++i) {
        const double k1 = rng.uniform(1.0, 200.0);
        const double scale = rng.uniform(0.1, 4.0);
        const PvArray a{0.15, 1.953, k1};
        const PvArray b{0.15, 1.953, k1 * scale};
        const auto ga = station_generation(a, series, grid);
        const auto gb = station_generation(b, series, grid);
        IrradianceSeries scaled = series;
        for (double& v : scaled.values) v *= scale;
        const auto gc = station_generation(a, scaled, grid);
        for (int t = 0; t < grid.slot_count; ++t) {
            const double rel = std::max(1.0, std::abs(ga.energy_kwh[t]));
            if (std::abs(gb.energy_kwh[t] - scale * ga.energy_kwh[t]) > 1e-9 * rel ||
                std::abs(gc.energy_kwh[t] - scale * ga.energy_kwh[t]) > 1e-9 * rel) {
                pass = false;
                detail = "linearity breaks at slot " + std::to_string(t + 1);
                break;
            }
        }
    }
    if (pass) detail = "panels_for_spaces(24) = " + fmt(panels_for_spaces(24)) + "; linear in K and irradiance";
    report(11, pass, "rooftop sizing rule and generation linearity", detail);
}

} // namespace

int main() {
    std::printf("acceptance suite (deterministic node budgets: suite %ld, trends %ld)\n",
                lean_options().node_limit, rich_options().node_limit);
    criterion_solver_oracle();
    criterion_scheduler_oracle();
    const SuiteResult suite = run_feasibility_suite();
    criterion_feasibility(suite);
    criterion_complementarity(suite);
    criterion_terminal_soc(suite);
    const Scenario default_scenario = generate_scenario(ScenarioConfig{}, 7);
    const Schedule default_schedule = optimize(default_scenario, rich_options());
    criterion_early_leave(default_scenario, default_schedule);
    criterion_penetration_trend();
    criterion_seasonal_trend();
    criterion_class_costs(default_scenario, default_schedule);
    criterion_pricing();
    criterion_pv();
    std::printf("%s (%d of 11 failed)\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures;
}
