#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "cloudcontrol/errors.hpp"
#include "cloudcontrol/gestalt.hpp"
#include "cloudcontrol/scenario.hpp"
#include "cloudcontrol/signaling.hpp"
#include "cloudcontrol/simulate.hpp"
#include "cloudcontrol/vehicle.hpp"

namespace {

using nlohmann::json;
namespace cc = cloudcontrol;
namespace sg = cloudcontrol::signaling;
namespace fi = cloudcontrol::flipit;
namespace ge = cloudcontrol::gestalt;
namespace si = cloudcontrol::simulate;
namespace vh = cloudcontrol::vehicle;
namespace sc = cloudcontrol::scenario;
namespace fs = std::filesystem;

// Exit codes: 0 success, 1 unexpected failure, then one code per
// distinguished error class.
constexpr int kExitOther = 1;
constexpr int kExitSchema = 2;
constexpr int kExitNoSelection = 3;
constexpr int kExitDivergence = 4;

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("CLOUDCONTROL_LOG");
        if (env == nullptr) return LogLevel::Info;
        const std::string value(env);
        if (value == "quiet") return LogLevel::Quiet;
        if (value == "debug") return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return level;
}

void log_info(const std::string& message) {
    if (log_level() >= LogLevel::Info) std::cerr << "[cloudcontrol] " << message << '\n';
}

void log_debug(const std::string& message) {
    if (log_level() >= LogLevel::Debug) std::cerr << "[cloudcontrol] " << message << '\n';
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buffer[32];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
    return std::string(buffer, ptr);
}

struct OutputOptions {
    std::string scenario_hash;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out_dir;
    std::string format = "json";
};

void stamp(json& report, const OutputOptions& opts) {
    report["scenario_hash"] = opts.scenario_hash;
    report["seed"] = opts.seed ? json(*opts.seed) : json(nullptr);
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << text;
    log_info("wrote " + file.string());
}

std::string provenance_line(const OutputOptions& opts) {
    std::string line = "# scenario_hash=" + opts.scenario_hash;
    line += " seed=" + (opts.seed ? std::to_string(*opts.seed) : std::string("none"));
    line += "\n";
    return line;
}

void emit_report(const json& report, const char* name, const OutputOptions& opts,
                 const std::string& csv_form) {
    if (opts.format == "csv")
        std::cout << csv_form;
    else
        std::cout << report.dump(2) << '\n';
    if (opts.out_dir) {
        fs::create_directories(*opts.out_dir);
        write_text(*opts.out_dir / (std::string(name) + "_report.json"), report.dump(2) + "\n");
        if (!csv_form.empty())
            write_text(*opts.out_dir / (std::string(name) + "_report.csv"), csv_form);
    }
}

json profile_json(const sg::PBEProfile& e) {
    return json{
        {"id", sg::to_string(e.id)},
        {"defender_prob_high", e.defender_strategy.prob_high},
        {"attacker_prob_high", e.attacker_strategy.prob_high},
        {"trust_given_high", e.receiver_strategy.trust_given_high},
        {"trust_given_low", e.receiver_strategy.trust_given_low},
        {"belief",
         {{"attacker_given_high", e.belief.attacker_given_high},
          {"attacker_given_low", e.belief.attacker_given_low}}},
        {"utilities",
         {{"defender", e.utility_defender},
          {"attacker", e.utility_attacker},
          {"receiver", e.utility_receiver}}}};
}

json flip_json(const fi::FlipItEquilibrium& f) {
    return json{{"case", fi::to_string(f.case_id)},
                {"freq_defender", f.profile.freq_defender},
                {"freq_attacker", f.profile.freq_attacker},
                {"attacker_single_move", f.profile.attacker_single_move},
                {"control_ratio", f.control_ratio},
                {"payoff_defender", f.payoff_defender},
                {"payoff_attacker", f.payoff_attacker}};
}

json estimate_json(const si::Estimate& e) {
    return json{{"mean", e.mean}, {"std_error", e.std_error}};
}

int cmd_signaling(const sc::Scenario& scenario, double p, OutputOptions opts) {
    const auto tb = sg::trust_benefits(scenario.utilities, p);
    const auto quadrant = sg::classify_quadrant(tb, scenario.policies.zero_tolerance);
    const auto equilibria =
        sg::enumerate_pbe(scenario.utilities, p, scenario.policies.zero_tolerance);

    json report;
    stamp(report, opts);
    report["p"] = p;
    report["trust_benefits"] = {{"tb_high", tb.tb_high}, {"tb_low", tb.tb_low}};
    report["quadrant"] = {{"region", sg::to_string(quadrant.region)},
                          {"on_tb_high_axis", quadrant.on_tb_high_axis},
                          {"on_tb_low_axis", quadrant.on_tb_low_axis}};
    report["equilibria"] = json::array();
    for (const auto& e : equilibria) report["equilibria"].push_back(profile_json(e));

    int exit_code = 0;
    if (scenario.policies.selection == sg::SelectionPolicy::Enumerate) {
        report["selected"] = nullptr;
        report["selection_policy"] = "enumerate";
    } else {
        report["selection_policy"] = "paper";
        try {
            const auto& chosen = sg::select_equilibrium(equilibria, tb,
                                                        scenario.policies.selection,
                                                        scenario.policies.zero_tolerance);
            report["selected"] = sg::to_string(chosen.id);
        } catch (const cc::NoSelectionError& e) {
            report["selected"] = nullptr;
            report["selection_error"] = e.reason();
            exit_code = kExitNoSelection;
        }
    }

    std::string csv = provenance_line(opts);
    csv += "id,defender_prob_high,attacker_prob_high,trust_given_high,trust_given_low,"
           "belief_high,belief_low,utility_defender,utility_attacker,utility_receiver\n";
    for (const auto& e : equilibria) {
        csv += std::string(sg::to_string(e.id)) + ',' +
               format_double(e.defender_strategy.prob_high) + ',' +
               format_double(e.attacker_strategy.prob_high) + ',' +
               format_double(e.receiver_strategy.trust_given_high) + ',' +
               format_double(e.receiver_strategy.trust_given_low) + ',' +
               format_double(e.belief.attacker_given_high) + ',' +
               format_double(e.belief.attacker_given_low) + ',' +
               format_double(e.utility_defender) + ',' + format_double(e.utility_attacker) + ',' +
               format_double(e.utility_receiver) + '\n';
    }
    emit_report(report, "signaling", opts, csv);
    return exit_code;
}

int cmd_flipit(const sc::Scenario& scenario, OutputOptions opts) {
    if (!scenario.value_defender || !scenario.value_attacker)
        throw cc::ScenarioError(
            "scenario: flipit.value_defender and flipit.value_attacker are required for the "
            "flipit command");
    const fi::FlipItParams params{scenario.move_cost_defender, scenario.move_cost_attacker,
                                  *scenario.value_defender, *scenario.value_attacker};
    const fi::FlipItEquilibrium eq = fi::nash_equilibrium(params);

    json report;
    stamp(report, opts);
    report["params"] = {{"move_cost_defender", params.move_cost_defender},
                        {"move_cost_attacker", params.move_cost_attacker},
                        {"value_defender", params.value_defender},
                        {"value_attacker", params.value_attacker}};
    report["equilibrium"] = flip_json(eq);

    std::string csv = provenance_line(opts);
    csv += "case,freq_defender,freq_attacker,attacker_single_move,control_ratio,"
           "payoff_defender,payoff_attacker\n";
    csv += std::string(fi::to_string(eq.case_id)) + ',' +
           format_double(eq.profile.freq_defender) + ',' +
           format_double(eq.profile.freq_attacker) + ',' +
           (eq.profile.attacker_single_move ? "true" : "false") + ',' +
           format_double(eq.control_ratio) + ',' + format_double(eq.payoff_defender) + ',' +
           format_double(eq.payoff_attacker) + '\n';
    emit_report(report, "flipit", opts, csv);
    return 0;
}

int cmd_gestalt(const sc::Scenario& scenario, std::optional<int> grid_override,
                OutputOptions opts) {
    ge::CloudControlGame game = sc::to_game(scenario);
    if (grid_override) game.grid_resolution = *grid_override;

    const auto solutions = ge::scan_fixed_points(game);
    const auto curves = ge::curve_export(game);

    json report;
    stamp(report, opts);
    report["grid_resolution"] = game.grid_resolution;
    report["fixed_point_tolerance"] = game.fixed_point_tolerance;
    report["certified"] = json::array();
    report["boundary_candidates"] = json::array();
    for (const auto& s : solutions) {
        json entry{{"p_dagger", s.p_dagger},
                   {"utility_defender", s.utility_defender},
                   {"utility_attacker", s.utility_attacker},
                   {"equilibrium", profile_json(s.pbe)},
                   {"flipit", flip_json(s.flip)}};
        if (s.certified) {
            report["certified"].push_back(entry);
        } else {
            if (s.left_utilities)
                entry["left_utilities"] = {{"defender", s.left_utilities->first},
                                           {"attacker", s.left_utilities->second}};
            if (s.right_utilities)
                entry["right_utilities"] = {{"defender", s.right_utilities->first},
                                            {"attacker", s.right_utilities->second}};
            report["boundary_candidates"].push_back(entry);
        }
    }

    std::string curve_csv = provenance_line(opts);
    curve_csv += "p,utility_defender,utility_attacker,ratio,control_ratio\n";
    for (const auto& row : curves) {
        curve_csv += format_double(row.p) + ',' + format_double(row.utility_defender) + ',' +
                     format_double(row.utility_attacker) + ',' + format_double(row.ratio) + ',' +
                     format_double(row.control_ratio) + '\n';
    }
    if (opts.out_dir) {
        fs::create_directories(*opts.out_dir);
        write_text(*opts.out_dir / "gestalt_curves.csv", curve_csv);
    }

    std::string summary_csv = provenance_line(opts);
    summary_csv += "p_dagger,certified,utility_defender,utility_attacker,equilibrium,flip_case\n";
    for (const auto& s : solutions) {
        summary_csv += format_double(s.p_dagger) + ',' + (s.certified ? "true" : "false") + ',' +
                       format_double(s.utility_defender) + ',' +
                       format_double(s.utility_attacker) + ',' + sg::to_string(s.pbe.id) + ',' +
                       fi::to_string(s.flip.case_id) + '\n';
    }
    emit_report(report, "gestalt", opts, summary_csv);
    return 0;
}

int cmd_simulate(const sc::Scenario& scenario, std::optional<std::uint64_t> seed_override,
                 OutputOptions opts) {
    if (!scenario.simulation)
        throw cc::ScenarioError("scenario: the simulate command requires a simulation block");
    const sc::SimulationBlock& block = *scenario.simulation;

    si::SimulationConfig config;
    config.horizon = block.horizon;
    config.replications = block.replications;
    config.seed = seed_override.value_or(block.seed);
    config.epoch_rate = block.epoch_rate;
    config.tie_break = block.tie_break;
    opts.seed = config.seed;

    json report;
    stamp(report, opts);
    report["mode"] = block.mode;

    si::SimulationReport result;
    if (block.mode == "cloudcontrol") {
        config.game = sc::to_game(scenario);
        const auto solutions = ge::scan_fixed_points(*config.game);
        const ge::GestaltSolution* certified = nullptr;
        for (const auto& s : solutions)
            if (s.certified) {
                certified = &s;
                break;
            }
        if (certified == nullptr)
            throw std::runtime_error("no certified solution available for the full replay");
        report["replayed_p_dagger"] = certified->p_dagger;
        result = si::simulate_cloudcontrol(config, *certified);
    } else {
        const double value_d = block.value_defender.value_or(scenario.value_defender.value_or(0.0));
        const double value_a = block.value_attacker.value_or(scenario.value_attacker.value_or(0.0));
        if (!block.value_defender && !scenario.value_defender)
            throw cc::ScenarioError("scenario: simulation values are missing");
        config.params = {scenario.move_cost_defender, scenario.move_cost_attacker, value_d,
                         value_a};
        if (block.profile) {
            config.profile = *block.profile;
        } else {
            config.profile = fi::nash_equilibrium(config.params).profile;
            report["derived_profile"] = true;
        }
        for (const std::string& warning : config.validate()) log_info("warning: " + warning);
        result = si::simulate_flipit(config);
    }

    report["horizon"] = result.horizon;
    report["replications"] = result.replications;
    report["profile"] = {{"freq_defender", config.profile.freq_defender},
                         {"freq_attacker", config.profile.freq_attacker},
                         {"attacker_single_move", config.profile.attacker_single_move}};
    report["empirical_p"] = estimate_json(result.empirical_p);
    report["move_rate_defender"] = estimate_json(result.move_rate_defender);
    report["move_rate_attacker"] = estimate_json(result.move_rate_attacker);
    report["payoff_defender"] = estimate_json(result.payoff_defender);
    report["payoff_attacker"] = estimate_json(result.payoff_attacker);
    if (result.receiver_mean) report["receiver_mean"] = estimate_json(*result.receiver_mean);

    std::string csv = provenance_line(opts);
    csv += "field,mean,std_error\n";
    const auto row = [&](const char* name, const si::Estimate& e) {
        csv += std::string(name) + ',' + format_double(e.mean) + ',' +
               format_double(e.std_error) + '\n';
    };
    row("empirical_p", result.empirical_p);
    row("move_rate_defender", result.move_rate_defender);
    row("move_rate_attacker", result.move_rate_attacker);
    row("payoff_defender", result.payoff_defender);
    row("payoff_attacker", result.payoff_attacker);
    if (result.receiver_mean) row("receiver_mean", *result.receiver_mean);
    emit_report(report, "simulate", opts, csv);
    return 0;
}

int cmd_vehicle(const sc::Scenario& scenario, std::optional<std::uint64_t> seed_override,
                OutputOptions opts) {
    if (!scenario.vehicle_block)
        throw cc::ScenarioError("scenario: the vehicle command requires a vehicle block");
    const sc::VehicleBlock& block = *scenario.vehicle_block;

    vh::TrajectoryConfig config;
    config.dt = block.dt;
    config.horizon = block.horizon;
    config.seed = seed_override.value_or(block.seed);
    config.small_angle_bound = block.small_angle_bound;
    config.divergence_bound = block.divergence_bound;
    opts.seed = config.seed;

    const vh::Trajectory trajectory =
        vh::simulate_trajectory(block.initial, block.params, block.gains, block.threshold,
                                block.receiver, block.schedule, config);

    const auto loop = vh::closed_loop_matrix(block.params, block.gains);
    double max_abs_lateral = std::abs(block.initial.lateral);
    bool linearization_ok = true;
    for (const auto& step : trajectory.steps) {
        max_abs_lateral = std::max(max_abs_lateral, std::abs(step.state.lateral));
        linearization_ok = linearization_ok && step.small_angle_ok;
    }

    json report;
    stamp(report, opts);
    report["steps"] = trajectory.steps.size();
    report["dt"] = config.dt;
    report["horizon"] = config.horizon;
    report["closed_loop_stable"] = loop.stable;
    report["final_state"] = {{"lateral", trajectory.final_state.lateral},
                             {"heading", trajectory.final_state.heading}};
    report["max_abs_lateral"] = max_abs_lateral;
    report["linearization_ok"] = linearization_ok;

    std::string csv = provenance_line(opts);
    csv += "t,lateral,heading,delta_car,delta_cloud,applied,message,action,owner\n";
    for (const auto& step : trajectory.steps) {
        csv += format_double(step.t) + ',' + format_double(step.state.lateral) + ',' +
               format_double(step.state.heading) + ',' + format_double(step.delta_car) + ',' +
               format_double(step.delta_cloud) + ',' + format_double(step.applied) + ',' +
               sg::to_string(step.message) + ',' + sg::to_string(step.action) + ',' +
               sg::to_string(step.owner) + '\n';
    }
    if (opts.out_dir) {
        fs::create_directories(*opts.out_dir);
        write_text(*opts.out_dir / "vehicle_trajectory.csv", csv);
    }
    emit_report(report, "vehicle", opts, std::string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cloud-control game toolkit: signaling equilibria, takeover analysis, "
                 "fixed points, Monte Carlo validation and the vehicle case study"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    std::string format = "json";
    double p = 0.0;
    std::uint64_t seed = 0;
    int grid = 0;

    const auto add_common = [&](CLI::App* cmd, bool needs_scenario = true) {
        auto* opt = cmd->add_option("--scenario", scenario_path, "scenario JSON file");
        if (needs_scenario) opt->required();
        cmd->add_option("--out", out_dir, "directory for report and data files");
        cmd->add_option("--format", format, "stdout report format")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    auto* sig = app.add_subcommand("signaling", "enumerate and select equilibria at a prior");
    add_common(sig);
    sig->add_option("--p", p, "prior probability of a compromised cloud")
        ->required()
        ->check(CLI::Range(0.0, 1.0));

    auto* flip = app.add_subcommand("flipit", "closed-form takeover equilibrium for the "
                                              "scenario's values and costs");
    add_common(flip);

    auto* gest = app.add_subcommand("gestalt", "scan for fixed points of the composed maps");
    add_common(gest);
    gest->add_option("--grid", grid, "override the scan grid resolution")
        ->check(CLI::PositiveNumber);

    auto* simu = app.add_subcommand("simulate", "Monte Carlo replay of periodic play");
    add_common(simu);
    auto* sim_seed = simu->add_option("--seed", seed, "override the scenario seed");

    auto* veh = app.add_subcommand("vehicle", "closed-loop trajectory under the trust policy");
    add_common(veh);
    auto* veh_seed = veh->add_option("--seed", seed, "override the scenario seed");

    CLI11_PARSE(app, argc, argv);

    try {
        const sc::Scenario scenario = sc::load_scenario(scenario_path);
        log_debug("loaded scenario " + scenario_path);

        OutputOptions opts;
        opts.scenario_hash = sc::scenario_fingerprint(scenario);
        opts.format = format;
        if (!out_dir.empty()) opts.out_dir = fs::path(out_dir);

        if (sig->parsed()) return cmd_signaling(scenario, p, opts);
        if (flip->parsed()) return cmd_flipit(scenario, opts);
        if (gest->parsed())
            return cmd_gestalt(scenario, grid > 0 ? std::optional<int>(grid) : std::nullopt, opts);
        if (simu->parsed())
            return cmd_simulate(scenario,
                                sim_seed->count() > 0 ? std::optional<std::uint64_t>(seed)
                                                      : std::nullopt,
                                opts);
        if (veh->parsed())
            return cmd_vehicle(scenario,
                               veh_seed->count() > 0 ? std::optional<std::uint64_t>(seed)
                                                     : std::nullopt,
                               opts);
        return kExitOther;
    } catch (const cc::ScenarioError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSchema;
    } catch (const sg::AssumptionViolationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSchema;
    } catch (const cc::NoSelectionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoSelection;
    } catch (const cc::DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
}
