#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "cloudcontrol/gestalt.hpp"
#include "cloudcontrol/signaling.hpp"
#include "cloudcontrol/simulate.hpp"
#include "cloudcontrol/vehicle.hpp"

namespace cloudcontrol::scenario {

struct Policies {
    signaling::SelectionPolicy selection = signaling::SelectionPolicy::PaperSelection;
    signaling::Belief off_path_belief{1.0, 1.0};
    double zero_tolerance = kDefaultZeroTolerance;
    double fixed_point_tolerance = kDefaultFixedPointTolerance;
    int grid_resolution = 1001;

    bool operator==(const Policies&) const = default;
};

struct SimulationBlock {
    std::string mode = "flipit";  // "flipit" or "cloudcontrol"
    double horizon = 0.0;
    int replications = 0;
    std::uint64_t seed = 0;
    std::optional<flipit::PeriodicProfile> profile;  // defaults to the Nash profile
    std::optional<double> value_defender;            // default: flipit block values
    std::optional<double> value_attacker;
    double epoch_rate = 1.0;
    simulate::TieBreak tie_break = simulate::TieBreak::DefenderWins;

    bool operator==(const SimulationBlock&) const = default;
};

struct VehicleBlock {
    vehicle::VehicleParams params;
    vehicle::GainVector gains;
    double threshold = 0.0;
    vehicle::VehicleState initial;
    signaling::ReceiverStrategy receiver;
    vehicle::CloudSchedule schedule;
    double dt = 1e-3;
    double horizon = 10.0;
    std::uint64_t seed = 0;
    double small_angle_bound = 0.3;
    double divergence_bound = 1e6;

    bool operator==(const VehicleBlock&) const = default;
};

/// One scenario file: the signaling tables, the takeover move costs, policy
/// knobs, and the optional simulation and vehicle blocks.
struct Scenario {
    signaling::SignalingUtilities utilities;
    double move_cost_defender = 0.0;
    double move_cost_attacker = 0.0;
    std::optional<double> value_defender;  // stand-alone takeover analysis inputs
    std::optional<double> value_attacker;
    Policies policies;
    std::optional<SimulationBlock> simulation;
    std::optional<VehicleBlock> vehicle_block;

    bool operator==(const Scenario&) const = default;
};

/// Parses scenario JSON. Numeric leaves may be JSON numbers or decimal
/// strings; strings are converted exactly once at load. Throws ScenarioError
/// with the offending path on malformed input.
Scenario parse_scenario(const std::string& json_text);

Scenario load_scenario(const std::filesystem::path& file);

/// Serializes a scenario back to JSON. The output re-parses to a value that
/// compares equal to the input.
std::string serialize_scenario(const Scenario& s);

gestalt::CloudControlGame to_game(const Scenario& s);

/// Provenance fingerprint of a scenario: FNV-1a of its canonical serialized
/// form, rendered as fixed-width hex.
std::string scenario_fingerprint(const Scenario& s);

}  // namespace cloudcontrol::scenario
