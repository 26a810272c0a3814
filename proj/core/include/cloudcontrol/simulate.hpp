#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cloudcontrol/flipit.hpp"
#include "cloudcontrol/gestalt.hpp"

namespace cloudcontrol::simulate {

/// Who wins when both players move at the same instant (measure zero under
/// random phases, but the sweep has to pick someone).
enum class TieBreak { DefenderWins, AttackerWins };

struct SimulationConfig {
    double horizon = 0.0;       // time units, > 0
    int replications = 0;       // > 0
    std::uint64_t seed = 0;
    flipit::PeriodicProfile profile;
    flipit::FlipItParams params;  // values + move costs for the payoff accounting
    TieBreak tie_break = TieBreak::DefenderWins;
    double epoch_rate = 1.0;    // signaling decision epochs per unit time
    std::optional<gestalt::CloudControlGame> game;  // required for the full replay

    /// Hard errors throw std::invalid_argument; soft issues (short horizon
    /// relative to the move periods) come back as warnings.
    std::vector<std::string> validate() const;
};

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

struct SimulationReport {
    Estimate empirical_p;          // time-average of attacker control
    Estimate move_rate_defender;   // moves per unit time
    Estimate move_rate_attacker;
    Estimate payoff_defender;      // per-unit-time value minus move costs
    Estimate payoff_attacker;
    std::optional<Estimate> receiver_mean;  // mean signaling payoff (full replay only)
    int replications = 0;
    double horizon = 0.0;
};

/// Monte Carlo replay of periodic play with uniformly random phases.
/// The defender owns the resource at t = 0; a move grabs the resource when
/// the other side holds it; every move costs its mover. Ownership fractions
/// are computed exactly from interval lengths. Identical seeds reproduce the
/// report bit for bit.
SimulationReport simulate_flipit(const SimulationConfig& config);

/// Full replay: the takeover timeline of the solution's equilibrium profile
/// with the signaling stage sampled at decision epochs. At each epoch the
/// current owner draws a message from its equilibrium sender strategy, the
/// device responds per its equilibrium strategy, and all three payoffs
/// accumulate. Requires a certified solution and a configured game.
SimulationReport simulate_cloudcontrol(const SimulationConfig& config,
                                       const gestalt::GestaltSolution& solution);

}  // namespace cloudcontrol::simulate
