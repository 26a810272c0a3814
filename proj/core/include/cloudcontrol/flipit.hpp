#pragma once

#include <utility>

namespace cloudcontrol::flipit {

/// Per-move costs and the per-unit-time values of holding the cloud.
/// The values are typically the equilibrium sender utilities of the
/// signaling stage.
struct FlipItParams {
    double move_cost_defender = 0.0;  // > 0
    double move_cost_attacker = 0.0;  // > 0
    double value_defender = 0.0;
    double value_attacker = 0.0;

    bool operator==(const FlipItParams&) const = default;
};

/// Periodic strategies: equally spaced moves with a uniformly random phase.
/// attacker_single_move encodes the "move exactly once" limit of a vanishing
/// attack frequency; freq_attacker stays 0 numerically in that case.
struct PeriodicProfile {
    double freq_defender = 0.0;
    double freq_attacker = 0.0;
    bool attacker_single_move = false;

    bool operator==(const PeriodicProfile&) const = default;
};

/// The five closed-form Nash equilibrium regimes, keyed by the sign pattern
/// of the values and the ordering of the cost-to-value ratios.
enum class NashCase {
    DefenderAdvantage,   // defender's cost/value ratio strictly smaller, both values > 0
    AttackerAdvantage,   // attacker's cost/value ratio strictly smaller, both values > 0
    EqualRatio,          // equal ratios, both values > 0
    NoAttack,            // attacker value <= 0: nobody moves
    SingleMoveTakeover,  // attacker value > 0 >= defender value: one attack, no renewal
};

const char* to_string(NashCase c);

struct FlipItPayoffs {
    double defender = 0.0;
    double attacker = 0.0;

    bool operator==(const FlipItPayoffs&) const = default;
};

struct FlipItEquilibrium {
    PeriodicProfile profile;
    double control_ratio = 0.0;
    double payoff_defender = 0.0;
    double payoff_attacker = 0.0;
    NashCase case_id = NashCase::NoAttack;

    bool operator==(const FlipItEquilibrium&) const = default;
};

/// Long-run average payoffs of both players at periodic frequencies
/// (f_d, f_a). The faster player holds the resource 1 - slow/(2*fast) of the
/// time; a never-moving attacker earns zero while the defender holds always.
/// The two branches agree at f_d == f_a.
FlipItPayoffs flipit_payoffs(double f_d, double f_a, const FlipItParams& params);

/// Fraction of time the attacker controls the resource under periodic play.
/// attacker_single_move means one attack ever: control is total when the
/// defender never renews and vanishing otherwise.
double control_ratio(double f_d, double f_a, bool attacker_single_move = false);

/// Closed-form Nash equilibrium over periodic strategies (five regimes).
/// Move costs must be strictly positive.
FlipItEquilibrium nash_equilibrium(const FlipItParams& params);

/// Map from the pair of cloud-holding values to the equilibrium control
/// ratio: Nash equilibrium then control_ratio. Depends on the values only
/// through their ratio; a non-positive attacker value yields 0 and a
/// non-positive defender value with a positive attacker value yields 1.
double t_f(double value_defender,
           double value_attacker,
           double move_cost_defender,
           double move_cost_attacker);

enum class Player { Defender, Attacker };

/// Grid for the best-response search oracle.
struct FrequencyGrid {
    double f_max = 0.0;
    int steps = 0;  // grid points are i * f_max / steps for i = 0..steps

    double at(int i) const { return f_max * static_cast<double>(i) / steps; }
};

/// Grid argmax of a player's payoff against a fixed opponent frequency.
/// Ties resolve to the largest frequency. Verification oracle for the
/// closed-form equilibrium; independent of nash_equilibrium.
double best_response_frequency(double opponent_freq,
                               Player side,
                               const FlipItParams& params,
                               const FrequencyGrid& grid,
                               bool opponent_single_move = false);

}  // namespace cloudcontrol::flipit
