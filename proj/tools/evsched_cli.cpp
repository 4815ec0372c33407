// Command-line front end: scenario generation, optimization, sweeps and
// schedule validation, wired for reproducible runs (identical inputs and
// flags give byte-identical output files).

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evsched/evsched.hpp"

namespace {

// Exit codes: 0 success, 2 usage, 3 validation, 4 infeasible, 5 I/O.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitIo = 5;

struct Overrides {
    std::optional<double> kappa, panel_area, panels;
    std::optional<int> spaces;
    std::optional<double> mu, e_max, e_gmax, green_floor;
    std::optional<double> rho, gamma, eta, epsilon, omega;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--kappa", o.kappa, "panel efficiency (0,1]");
    cmd->add_option("--panel-area", o.panel_area, "panel area, m^2");
    cmd->add_option("--panels", o.panels, "panel count (overrides --spaces)");
    cmd->add_option("--spaces", o.spaces, "vehicle spaces used to size the rooftop array");
    cmd->add_option("--mu", o.mu, "battery charging efficiency (0,1]");
    cmd->add_option("--e-max", o.e_max, "per-vehicle max charge rate, kWh/slot");
    cmd->add_option("--e-gmax", o.e_gmax, "grid flow cap, kWh/slot");
    cmd->add_option("--green-floor", o.green_floor, "green discharge floor fraction of capacity");
    cmd->add_option("--rho", o.rho, "premium markup, cents/kWh");
    cmd->add_option("--gamma", o.gamma, "conservative price band, cents");
    cmd->add_option("--eta", o.eta, "green charge discount factor (0,1]");
    cmd->add_option("--epsilon", o.epsilon, "green discharge payout factor (0,1]");
    cmd->add_option("--omega", o.omega, "grid sell/buy spread, cents/kWh");
}

void apply_overrides(evsched::Scenario& scenario, const Overrides& o) {
    if (o.kappa) scenario.pv.efficiency = *o.kappa;
    if (o.panel_area) scenario.pv.panel_area_m2 = *o.panel_area;
    if (o.spaces) scenario.pv.panel_count = evsched::panels_for_spaces(*o.spaces);
    if (o.panels) scenario.pv.panel_count = *o.panels;
    if (o.mu) scenario.config.battery_efficiency = *o.mu;
    if (o.e_max) {
        scenario.config.max_rate_kwh_per_slot = *o.e_max;
        for (auto& ev : scenario.fleet) ev.max_rate_kwh_per_slot = *o.e_max;
    }
    if (o.e_gmax) scenario.config.grid_max_kwh_per_slot = *o.e_gmax;
    if (o.green_floor) {
        scenario.config.green_floor_fraction = *o.green_floor;
        for (auto& ev : scenario.fleet) ev.green_floor_kwh = *o.green_floor * ev.capacity_kwh;
    }
    if (o.rho) scenario.tariff.markup_cents = *o.rho;
    if (o.gamma) scenario.tariff.conservative_spread_cents = *o.gamma;
    if (o.eta) scenario.tariff.green_charge_factor = *o.eta;
    if (o.epsilon) scenario.tariff.green_discharge_factor = *o.epsilon;
    if (o.omega) {
        scenario.tariff.grid_spread_cents = *o.omega;
        scenario.prices = evsched::make_price_curve(scenario.prices.grid_sell_cents_per_kwh,
                                                    *o.omega);
    }
    scenario.validate();
}

void print_warnings(const evsched::Schedule& schedule) {
    for (const std::string& w : schedule.warnings) std::cerr << "warning: " << w << "\n";
}

double total_fill_kwh(const evsched::Scenario& scenario) {
    double total = 0.0;
    for (const auto& ev : scenario.fleet) {
        total += std::max(0.0, ev.target_soc_kwh - ev.initial_soc_kwh);
    }
    return total;
}

std::vector<double> parse_list(const std::string& csv, const std::string& flag) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            values.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("junk");
        } catch (const std::exception&) {
            throw evsched::ValidationError(flag + ": cannot parse '" + item + "'");
        }
    }
    if (values.empty()) throw evsched::ValidationError(flag + ": empty list");
    return values;
}

int cmd_generate(const std::string& out_path, std::uint64_t seed, int premium, int conservative,
                 int green, const std::string& season, const std::string& irradiance_csv,
                 const std::string& prices_csv, const Overrides& overrides, bool json_summary) {
    using namespace evsched;
    ScenarioConfig config;
    config.premium_count = premium;
    config.conservative_count = conservative;
    config.green_count = green;
    Scenario scenario = generate_scenario(config, seed);
    if (season == "winter") {
        scenario.irradiance = builtin_winter_irradiance(scenario.grid);
    } else if (season != "summer") {
        throw ValidationError("--season must be 'summer' or 'winter'");
    }
    if (!irradiance_csv.empty()) {
        scenario.irradiance = load_irradiance_csv(irradiance_csv, scenario.grid.slot_count);
    }
    if (!prices_csv.empty()) {
        scenario.prices = load_price_csv(prices_csv, scenario.tariff.grid_spread_cents,
                                         scenario.grid.slot_count);
    }
    apply_overrides(scenario, overrides);
    save_scenario(scenario, out_path);
    if (json_summary) {
        nlohmann::json j{{"file", out_path},
                         {"seed", seed},
                         {"premium", premium},
                         {"conservative", conservative},
                         {"green", green},
                         {"total_fill_kwh", total_fill_kwh(scenario)}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "wrote " << out_path << ": " << premium << " premium, " << conservative
                  << " conservative, " << green << " green; total requested fill "
                  << total_fill_kwh(scenario) << " kWh (seed " << seed << ")\n";
    }
    return kExitOk;
}

int cmd_run(const std::string& scenario_path, const std::string& out_prefix,
            const std::string& flows_csv, const Overrides& overrides,
            const evsched::SolveOptions& options, bool json_summary) {
    using namespace evsched;
    Scenario scenario = load_scenario(scenario_path);
    apply_overrides(scenario, overrides);
    if (scenario.tariff.green_discharge_factor < 0.79) {
        std::cerr << "warning: discharge payout factor " << scenario.tariff.green_discharge_factor
                  << " is below 0.79; convergence may be slow, the run proceeds under the "
                     "configured limits\n";
    }
    const Schedule schedule = optimize(scenario, options);
    print_warnings(schedule);
    if (schedule.status == SolveStatus::Infeasible) {
        std::cerr << "infeasible: " << schedule.infeasible_hint << "\n";
        return kExitInfeasible;
    }
    if (schedule.status == SolveStatus::Unbounded || schedule.grid_import_kwh.empty()) {
        std::cerr << "no schedule produced (" << to_string(schedule.status) << ")\n";
        return kExitInfeasible;
    }
    const std::string schedule_path = out_prefix + "_schedule.json";
    const std::string report_json_path = out_prefix + "_report.json";
    const std::string report_text_path = out_prefix + "_report.txt";
    save_schedule(schedule, schedule_path);
    const CostReport report = cost_report(schedule, scenario);
    {
        std::ofstream out(report_json_path);
        if (!out) throw IoError("cannot write '" + report_json_path + "'");
        out << report_to_json(report).dump(2) << "\n";
    }
    {
        std::ofstream out(report_text_path);
        if (!out) throw IoError("cannot write '" + report_text_path + "'");
        write_report_text(report, out);
    }
    if (!flows_csv.empty()) {
        std::ofstream out(flows_csv);
        if (!out) throw IoError("cannot write '" + flows_csv + "'");
        write_flows_csv(scenario, schedule, out);
    }
    std::cerr << "solved in " << schedule.solve_seconds << " s, " << schedule.node_count
              << " nodes\n";
    if (json_summary) {
        nlohmann::json j{{"status", to_string(schedule.status)},
                         {"gamma_cents", schedule.total_cost_cents},
                         {"node_count", schedule.node_count},
                         {"bound_gap", schedule.bound_gap},
                         {"schedule_file", schedule_path},
                         {"report_file", report_json_path}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "status " << to_string(schedule.status) << ", total cost "
                  << schedule.total_cost_cents << " cents; wrote " << schedule_path << ", "
                  << report_json_path << ", " << report_text_path << "\n";
    }
    return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, const std::string& fractions_csv,
              const std::string& panels_csv, const std::string& out_path,
              const std::string& baseline_contract, const evsched::SolveOptions& options,
              bool json_summary) {
    using namespace evsched;
    if (fractions_csv.empty() == panels_csv.empty()) {
        std::cerr << "exactly one of --green-fractions or --panels is required\n";
        return kExitUsage;
    }
    const Scenario scenario = load_scenario(scenario_path);
    std::vector<SweepRow> rows;
    if (!fractions_csv.empty()) {
        auto fractions = parse_list(fractions_csv, "--green-fractions");
        rows = penetration_sweep(scenario, fractions, options);
    } else {
        auto panels = parse_list(panels_csv, "--panels");
        rows = panel_sweep(scenario, panels, options);
    }
    {
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot write '" + out_path + "'");
        write_sweep_csv(rows, out);
    }
    nlohmann::json j{{"rows", sweep_to_json(rows)}, {"csv_file", out_path}};
    if (!baseline_contract.empty()) {
        const double contract = baseline_contract == "auto"
                                    ? default_contract_price(scenario)
                                    : std::stod(baseline_contract);
        const CostReport baseline = baseline_fixed_contract(scenario, contract, options);
        j["baseline"] = {{"contract_cents_per_kwh", contract},
                         {"gamma_cents", baseline.gamma_cents}};
    }
    if (json_summary) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "wrote " << out_path << " (" << rows.size() << " rows)\n";
        if (j.contains("baseline")) {
            std::cout << "baseline contract " << j["baseline"]["contract_cents_per_kwh"]
                      << " cents/kWh -> total cost " << j["baseline"]["gamma_cents"]
                      << " cents\n";
        }
    }
    return kExitOk;
}

int cmd_validate(const std::string& scenario_path, const std::string& schedule_path,
                 bool json_summary) {
    using namespace evsched;
    const Scenario scenario = load_scenario(scenario_path);
    const Schedule schedule = load_schedule(schedule_path);
    const std::vector<Violation> violations = validate_schedule(scenario, schedule);
    if (json_summary) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Violation& v : violations) {
            arr.push_back({{"family", v.family}, {"message", v.message}});
        }
        std::cout << nlohmann::json{{"violations", arr}}.dump(2) << "\n";
    } else {
        for (const Violation& v : violations) {
            std::cout << v.family << ": " << v.message << "\n";
        }
        std::cout << (violations.empty() ? "schedule is feasible" : "schedule is infeasible")
                  << " (" << violations.size() << " violations)\n";
    }
    return violations.empty() ? kExitOk : kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PV charging-station energy trading scheduler"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "generate a random scenario file");
    std::string gen_out = "scenario.json";
    std::uint64_t seed = 7;
    int premium = 8, conservative = 8, green = 8;
    std::string season = "summer", irradiance_csv, prices_csv;
    Overrides gen_overrides;
    bool gen_json = false;
    generate->add_option("--out", gen_out, "output scenario file");
    generate->add_option("--seed", seed, "random seed");
    generate->add_option("--premium", premium, "number of premium vehicles");
    generate->add_option("--conservative", conservative, "number of conservative vehicles");
    generate->add_option("--green", green, "number of green vehicles");
    generate->add_option("--season", season, "bundled irradiance curve: summer or winter");
    generate->add_option("--irradiance", irradiance_csv, "irradiance CSV (overrides --season)");
    generate->add_option("--prices", prices_csv, "grid sell price CSV");
    generate->add_flag("--json", gen_json, "machine-readable summary on stdout");
    add_override_flags(generate, gen_overrides);

    // run
    auto* run = app.add_subcommand("run", "optimize a scenario and write schedule + report");
    std::string run_scenario, run_out = "run", flows_csv;
    Overrides run_overrides;
    evsched::SolveOptions run_options;
    run_options.node_limit = 4000; // deterministic default; wall-clock limits are opt-in
    bool run_json = false;
    run->add_option("--scenario", run_scenario, "scenario file")->required();
    run->add_option("--out", run_out, "output file prefix");
    run->add_option("--flows-csv", flows_csv, "also write a per-slot flow CSV");
    run->add_option("--node-limit", run_options.node_limit, "branch-and-bound node limit");
    run->add_option("--time-limit", run_options.time_limit_seconds,
                    "solver wall-time limit, seconds (0 = none)");
    run->add_option("--gap", run_options.relative_gap, "relative optimality gap target");
    run->add_flag("--json", run_json, "machine-readable summary on stdout");
    add_override_flags(run, run_overrides);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "re-optimize under swept green share or panels");
    std::string sweep_scenario, fractions_csv, panels_csv, sweep_out = "sweep.csv";
    std::string baseline_contract;
    evsched::SolveOptions sweep_options;
    sweep_options.node_limit = 4000;
    bool sweep_json = false;
    sweep->add_option("--scenario", sweep_scenario, "scenario file")->required();
    sweep->add_option("--green-fractions", fractions_csv, "comma-separated green fractions");
    sweep->add_option("--panels", panels_csv, "comma-separated panel counts");
    sweep->add_option("--out", sweep_out, "output CSV path");
    sweep->add_option("--baseline-contract", baseline_contract,
                      "fixed-contract baseline price in cents, or 'auto' for the mean sell price");
    sweep->add_option("--node-limit", sweep_options.node_limit, "branch-and-bound node limit");
    sweep->add_option("--time-limit", sweep_options.time_limit_seconds,
                      "per-solve wall-time limit, seconds (0 = none)");
    sweep->add_flag("--json", sweep_json, "machine-readable summary on stdout");

    // validate
    auto* validate = app.add_subcommand("validate", "re-check a schedule against its scenario");
    std::string val_scenario, val_schedule;
    bool val_json = false;
    validate->add_option("--scenario", val_scenario, "scenario file")->required();
    validate->add_option("--schedule", val_schedule, "schedule file")->required();
    validate->add_flag("--json", val_json, "machine-readable summary on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (generate->parsed()) {
            return cmd_generate(gen_out, seed, premium, conservative, green, season,
                                irradiance_csv, prices_csv, gen_overrides, gen_json);
        }
        if (run->parsed()) {
            return cmd_run(run_scenario, run_out, flows_csv, run_overrides, run_options, run_json);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_scenario, fractions_csv, panels_csv, sweep_out,
                             baseline_contract, sweep_options, sweep_json);
        }
        if (validate->parsed()) {
            return cmd_validate(val_scenario, val_schedule, val_json);
        }
    } catch (const evsched::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const evsched::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitUsage;
}
