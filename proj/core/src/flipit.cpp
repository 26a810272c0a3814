#include "cloudcontrol/flipit.hpp"

#include <cmath>
#include <stdexcept>

namespace cloudcontrol::flipit {

const char* to_string(NashCase c) {
    switch (c) {
        case NashCase::DefenderAdvantage: return "defender_advantage";
        case NashCase::AttackerAdvantage: return "attacker_advantage";
        case NashCase::EqualRatio: return "equal_ratio";
        case NashCase::NoAttack: return "no_attack";
        case NashCase::SingleMoveTakeover: return "single_move_takeover";
    }
    return "?";
}

FlipItPayoffs flipit_payoffs(double f_d, double f_a, const FlipItParams& params) {
    if (f_d < 0.0 || f_a < 0.0)
        throw std::invalid_argument("move frequencies must be non-negative");
    if (f_a == 0.0) {
        // The attacker never moves: zero attacker payoff, the defender holds
        // throughout and only pays its renewal cost.
        return {params.value_defender - params.move_cost_defender * f_d, 0.0};
    }
    if (f_d >= f_a) {
        const double attacker_share = f_a / (2.0 * f_d);
        return {params.value_defender * (1.0 - attacker_share) - params.move_cost_defender * f_d,
                params.value_attacker * attacker_share - params.move_cost_attacker * f_a};
    }
    const double defender_share = f_d / (2.0 * f_a);
    return {params.value_defender * defender_share - params.move_cost_defender * f_d,
            params.value_attacker * (1.0 - defender_share) - params.move_cost_attacker * f_a};
}

double control_ratio(double f_d, double f_a, bool attacker_single_move) {
    if (attacker_single_move) {
        // One attack ever: total control if the defender never renews,
        // vanishing in the long run otherwise.
        return f_d == 0.0 ? 1.0 : 0.0;
    }
    if (f_a == 0.0) return 0.0;
    if (f_d >= f_a) return f_a / (2.0 * f_d);
    return 1.0 - f_d / (2.0 * f_a);
}

FlipItEquilibrium nash_equilibrium(const FlipItParams& params) {
    if (params.move_cost_defender <= 0.0 || params.move_cost_attacker <= 0.0)
        throw std::invalid_argument("move costs must be strictly positive");

    const double value_d = params.value_defender;
    const double value_a = params.value_attacker;
    FlipItEquilibrium eq;

    if (value_a <= 0.0) {
        // No incentive to attack; the defender holds its initial control for free.
        eq.case_id = NashCase::NoAttack;
        eq.profile = {0.0, 0.0, false};
    } else if (value_d <= 0.0) {
        // Only the attacker values the cloud: a single move takes it forever.
        eq.case_id = NashCase::SingleMoveTakeover;
        eq.profile = {0.0, 0.0, true};
    } else {
        // Both values positive: compare cost-to-value ratios by cross products.
        const double lhs = params.move_cost_defender * value_a;
        const double rhs = params.move_cost_attacker * value_d;
        if (lhs < rhs) {
            eq.case_id = NashCase::DefenderAdvantage;
            eq.profile.freq_defender = value_a / (2.0 * params.move_cost_attacker);
            eq.profile.freq_attacker = params.move_cost_defender /
                                       (2.0 * params.move_cost_attacker * params.move_cost_attacker) *
                                       (value_a * value_a) / value_d;
        } else if (lhs > rhs) {
            eq.case_id = NashCase::AttackerAdvantage;
            eq.profile.freq_defender = params.move_cost_attacker /
                                       (2.0 * params.move_cost_defender * params.move_cost_defender) *
                                       (value_d * value_d) / value_a;
            eq.profile.freq_attacker = value_d / (2.0 * params.move_cost_defender);
        } else {
            eq.case_id = NashCase::EqualRatio;
            eq.profile.freq_defender = value_a / (2.0 * params.move_cost_attacker);
            eq.profile.freq_attacker = value_d / (2.0 * params.move_cost_defender);
        }
    }

    eq.control_ratio = control_ratio(eq.profile.freq_defender, eq.profile.freq_attacker,
                                     eq.profile.attacker_single_move);
    if (eq.case_id == NashCase::SingleMoveTakeover) {
        // The single move's cost amortizes to zero per unit time.
        eq.payoff_defender = 0.0;
        eq.payoff_attacker = value_a;
    } else {
        const FlipItPayoffs payoffs =
            flipit_payoffs(eq.profile.freq_defender, eq.profile.freq_attacker, params);
        eq.payoff_defender = payoffs.defender;
        eq.payoff_attacker = payoffs.attacker;
    }
    return eq;
}

double t_f(double value_defender,
           double value_attacker,
           double move_cost_defender,
           double move_cost_attacker) {
    const FlipItEquilibrium eq = nash_equilibrium({move_cost_defender, move_cost_attacker,
                                                   value_defender, value_attacker});
    return eq.control_ratio;
}

double best_response_frequency(double opponent_freq,
                               Player side,
                               const FlipItParams& params,
                               const FrequencyGrid& grid,
                               bool opponent_single_move) {
    if (grid.steps <= 0 || grid.f_max <= 0.0)
        throw std::invalid_argument("search grid must have positive extent and steps");

    const auto payoff = [&](double f) {
        if (side == Player::Defender) {
            if (opponent_single_move) {
                // Against a one-shot attacker, any positive renewal rate
                // reclaims the cloud for all but a vanishing fraction of time.
                return f == 0.0 ? 0.0 : params.value_defender - params.move_cost_defender * f;
            }
            return flipit_payoffs(f, opponent_freq, params).defender;
        }
        return flipit_payoffs(opponent_freq, f, params).attacker;
    };

    double best_f = 0.0;
    double best_value = payoff(0.0);
    for (int i = 1; i <= grid.steps; ++i) {
        const double f = grid.at(i);
        const double value = payoff(f);
        if (value >= best_value) {  // ties resolve to the largest frequency
            best_value = value;
            best_f = f;
        }
    }
    return best_f;
}

}  // namespace cloudcontrol::flipit
