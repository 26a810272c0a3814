#include "doctest.h"

#include <cmath>
#include <random>

#include "cloudcontrol/flipit.hpp"
#include "cloudcontrol/numeric.hpp"

using namespace cloudcontrol;
using namespace cloudcontrol::flipit;

namespace {

FlipItParams params(double cost_d, double cost_a, double value_d, double value_a) {
    return {cost_d, cost_a, value_d, value_a};
}

}  // namespace

TEST_CASE("flipit_payoffs: the three frequency branches") {
    // Nobody moves: the defender keeps its initial control for free.
    const FlipItPayoffs idle = flipit_payoffs(0.0, 0.0, params(0.25, 0.25, 1.0, 0.0));
    CHECK(idle.defender == doctest::Approx(1.0));
    CHECK(idle.attacker == doctest::Approx(0.0));

    // Equal frequencies: each side holds half the time.
    const FlipItPayoffs even = flipit_payoffs(1.0, 1.0, params(0.25, 0.25, 1.0, 1.0));
    CHECK(even.defender == doctest::Approx(0.25));

    // Faster attacker: 1 * (1 - 1/4) - 0.1 * 2.
    const FlipItPayoffs fast = flipit_payoffs(1.0, 2.0, params(0.25, 0.1, 1.0, 1.0));
    CHECK(fast.attacker == doctest::Approx(0.55));
}

TEST_CASE("flipit_payoffs branch continuity at equal frequencies") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 200; ++i) {
        const double f = 0.1 + 5.0 * uniform_unit(rng);
        const FlipItParams pr = params(0.05 + uniform_unit(rng), 0.05 + uniform_unit(rng),
                                       -1.0 + 4.0 * uniform_unit(rng),
                                       -1.0 + 4.0 * uniform_unit(rng));
        const FlipItPayoffs at_tie = flipit_payoffs(f, f, pr);
        // Both hand-written branch formulas at f_d == f_a.
        const double defender_fast = pr.value_defender * (1.0 - f / (2.0 * f)) -
                                     pr.move_cost_defender * f;
        const double attacker_slow = pr.value_attacker * (f / (2.0 * f)) -
                                     pr.move_cost_attacker * f;
        const double defender_slow = pr.value_defender * (f / (2.0 * f)) -
                                     pr.move_cost_defender * f;
        const double attacker_fast = pr.value_attacker * (1.0 - f / (2.0 * f)) -
                                     pr.move_cost_attacker * f;
        CHECK(at_tie.defender == defender_fast);
        CHECK(at_tie.defender == defender_slow);
        CHECK(at_tie.attacker == attacker_slow);
        CHECK(at_tie.attacker == attacker_fast);
    }
}

TEST_CASE("control_ratio covers all branches and stays in [0, 1]") {
    CHECK(control_ratio(2.0, 0.0) == doctest::Approx(0.0));
    CHECK(control_ratio(1.0, 1.0) == doctest::Approx(0.5));
    CHECK(control_ratio(1.0, 2.0) == doctest::Approx(0.75));
    CHECK(control_ratio(0.0, 0.0, true) == doctest::Approx(1.0));
    CHECK(control_ratio(0.5, 0.0, true) == doctest::Approx(0.0));

    std::mt19937_64 rng(37);
    for (int i = 0; i < 500; ++i) {
        const double f_d = 5.0 * uniform_unit(rng);
        const double f_a = 5.0 * uniform_unit(rng);
        const double ratio = control_ratio(f_d, f_a);
        CHECK(ratio >= 0.0);
        CHECK(ratio <= 1.0);
        if (f_d == f_a && f_d > 0.0) CHECK(ratio == 0.5);
    }
}

TEST_CASE("nash_equilibrium: the five closed-form regimes") {
    SUBCASE("equal ratios") {
        const FlipItEquilibrium eq = nash_equilibrium(params(0.25, 0.25, 1.0, 1.0));
        CHECK(eq.case_id == NashCase::EqualRatio);
        CHECK(eq.profile.freq_defender == doctest::Approx(2.0));
        CHECK(eq.profile.freq_attacker == doctest::Approx(2.0));
        CHECK(eq.control_ratio == doctest::Approx(0.5));
    }
    SUBCASE("non-positive attacker value: nobody moves") {
        const FlipItEquilibrium eq = nash_equilibrium(params(0.25, 0.25, 1.0, -1.0));
        CHECK(eq.case_id == NashCase::NoAttack);
        CHECK(eq.profile.freq_defender == 0.0);
        CHECK(eq.profile.freq_attacker == 0.0);
        CHECK(eq.control_ratio == 0.0);
        CHECK(eq.payoff_defender == doctest::Approx(1.0));
        CHECK(eq.payoff_attacker == doctest::Approx(0.0));
    }
    SUBCASE("zero attacker value routes to the no-attack regime") {
        CHECK(nash_equilibrium(params(0.25, 0.25, 1.0, 0.0)).case_id == NashCase::NoAttack);
    }
    SUBCASE("positive attacker value, non-positive defender value: single move") {
        const FlipItEquilibrium eq = nash_equilibrium(params(0.25, 0.25, 0.0, 1.0));
        CHECK(eq.case_id == NashCase::SingleMoveTakeover);
        CHECK(eq.profile.freq_defender == 0.0);
        CHECK(eq.profile.attacker_single_move);
        CHECK(eq.control_ratio == doctest::Approx(1.0));
        CHECK(eq.payoff_attacker == doctest::Approx(1.0));
        CHECK(eq.payoff_defender == doctest::Approx(0.0));
    }
    SUBCASE("defender advantage keeps the defender faster") {
        const FlipItEquilibrium eq = nash_equilibrium(params(0.1, 0.25, 1.0, 1.0));
        CHECK(eq.case_id == NashCase::DefenderAdvantage);
        CHECK(eq.profile.freq_defender > eq.profile.freq_attacker);
        CHECK(eq.control_ratio < 0.5);
    }
    SUBCASE("attacker advantage mirrors it") {
        const FlipItEquilibrium eq = nash_equilibrium(params(0.25, 0.1, 1.0, 1.0));
        CHECK(eq.case_id == NashCase::AttackerAdvantage);
        CHECK(eq.profile.freq_attacker > eq.profile.freq_defender);
        CHECK(eq.control_ratio > 0.5);
    }
    SUBCASE("non-positive move costs are rejected") {
        CHECK_THROWS_AS(nash_equilibrium(params(0.0, 0.25, 1.0, 1.0)), std::invalid_argument);
    }
}

TEST_CASE("t_f: examples and the ratio closed form") {
    CHECK(t_f(1.0, 1.0, 0.25, 0.25) == doctest::Approx(0.5));
    CHECK(t_f(2.0, -1.0, 0.25, 0.25) == doctest::Approx(0.0));
    CHECK(t_f(0.0, 0.0, 0.25, 0.25) == doctest::Approx(0.0));  // zero-pair convention
    CHECK(t_f(0.0, 1.0, 0.25, 0.25) == doctest::Approx(1.0));  // defender-out convention

    std::mt19937_64 rng(41);
    for (int i = 0; i < 300; ++i) {
        const double value_d = 0.1 + 3.0 * uniform_unit(rng);
        const double value_a = 0.1 + 3.0 * uniform_unit(rng);
        const double cost_d = 0.05 + uniform_unit(rng);
        const double cost_a = 0.05 + uniform_unit(rng);
        const double p = t_f(value_d, value_a, cost_d, cost_a);
        // The map depends on the values only through the cost-weighted ratio.
        const double q = cost_d * value_a / (cost_a * value_d);
        const double expected = q <= 1.0 ? q / 2.0 : 1.0 - 1.0 / (2.0 * q);
        CHECK(p == doctest::Approx(expected).epsilon(1e-12));
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("t_f scale invariance in the value pair") {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 200; ++i) {
        const double value_d = 0.1 + 3.0 * uniform_unit(rng);
        const double value_a = 0.1 + 3.0 * uniform_unit(rng);
        const double cost_d = 0.05 + uniform_unit(rng);
        const double cost_a = 0.05 + uniform_unit(rng);
        const double c = 0.1 + 5.0 * uniform_unit(rng);
        CHECK(t_f(c * value_d, c * value_a, cost_d, cost_a) ==
              doctest::Approx(t_f(value_d, value_a, cost_d / c, cost_a / c)).epsilon(1e-12));
    }
}

TEST_CASE("t_f is non-decreasing in the attacker value") {
    for (double cost_a : {0.1, 0.3}) {
        double previous = -1.0;
        for (int i = 0; i <= 100; ++i) {
            const double value_a = -0.5 + 0.05 * i;
            const double p = t_f(1.5, value_a, 0.2, cost_a);
            CHECK(p >= previous - 1e-15);
            previous = p;
        }
    }
}

TEST_CASE("best_response_frequency: grid oracle behavior") {
    SUBCASE("an uncontested resource is never worth flipping") {
        const double br = best_response_frequency(0.0, Player::Defender,
                                                  params(0.25, 0.25, 1.0, 1.0),
                                                  {4.0, 1000});
        CHECK(br == 0.0);
    }
    SUBCASE("equal-ratio equilibrium: argmax within one grid step") {
        const FlipItParams pr = params(0.25, 0.25, 1.0, 1.0);
        const FlipItEquilibrium eq = nash_equilibrium(pr);  // frequencies (2, 2)
        const FrequencyGrid grid{2.0 * eq.profile.freq_defender, 1000};
        const double step = grid.f_max / grid.steps;
        const double br_d = best_response_frequency(eq.profile.freq_attacker, Player::Defender,
                                                    pr, grid);
        const double br_a = best_response_frequency(eq.profile.freq_defender, Player::Attacker,
                                                    pr, grid);
        CHECK(std::abs(br_d - eq.profile.freq_defender) <= step + 1e-12);
        CHECK(std::abs(br_a - eq.profile.freq_attacker) <= step + 1e-12);
    }
    SUBCASE("a non-positive attacker value never attacks") {
        const double br = best_response_frequency(1.0, Player::Attacker,
                                                  params(0.25, 0.25, 1.0, -0.5),
                                                  {4.0, 1000});
        CHECK(br == 0.0);
    }
}

TEST_CASE("closed-form equilibria survive the grid best-response oracle") {
    std::mt19937_64 rng(47);
    // A handful of draws per regime here; the acceptance suite runs the full
    // hundred-draw verification.
    for (int i = 0; i < 10; ++i) {
        for (int regime = 0; regime < 3; ++regime) {
            double value_d = 0.2 + 2.0 * uniform_unit(rng);
            double value_a = 0.2 + 2.0 * uniform_unit(rng);
            double cost_d = 0.05 + 0.5 * uniform_unit(rng);
            double cost_a = 0.05 + 0.5 * uniform_unit(rng);
            if (regime == 2) {
                // Dyadic construction hits the equal-ratio branch exactly.
                value_a = std::ldexp(1.0, static_cast<int>(rng() % 3) - 1);
                cost_d = cost_a * value_d / value_a;
            }
            const FlipItParams pr = params(cost_d, cost_a, value_d, value_a);
            const FlipItEquilibrium eq = nash_equilibrium(pr);
            const double f_ref = std::max({eq.profile.freq_defender, eq.profile.freq_attacker,
                                           1.0});
            const FrequencyGrid grid{2.0 * f_ref, 2000};
            const double step = grid.f_max / grid.steps;

            const double br_d = best_response_frequency(eq.profile.freq_attacker,
                                                        Player::Defender, pr, grid);
            const double br_a = best_response_frequency(eq.profile.freq_defender,
                                                        Player::Attacker, pr, grid);
            const double gain_d =
                flipit_payoffs(br_d, eq.profile.freq_attacker, pr).defender - eq.payoff_defender;
            const double gain_a =
                flipit_payoffs(eq.profile.freq_defender, br_a, pr).attacker - eq.payoff_attacker;
            const double lipschitz_d =
                std::abs(value_d) / (2.0 * std::max(eq.profile.freq_attacker, step)) + cost_d;
            const double lipschitz_a =
                std::abs(value_a) / (2.0 * std::max(eq.profile.freq_defender, step)) + cost_a;
            CHECK(gain_d <= lipschitz_d * step + 1e-9);
            CHECK(gain_a <= lipschitz_a * step + 1e-9);
        }
    }
}
