#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "cloudcontrol/errors.hpp"
#include "cloudcontrol/signaling.hpp"
#include "support/oracles.hpp"

using namespace cloudcontrol;
using namespace cloudcontrol::signaling;

namespace {

constexpr CloudType A = CloudType::Attacker;
constexpr CloudType D = CloudType::Defender;
constexpr Message H = Message::High;
constexpr Message L = Message::Low;
constexpr Action T = Action::Trust;
constexpr Action N = Action::NotTrust;

/// The admissible table used by several examples: quadrant I at small priors,
/// both senders prefer their high message trusted, rejected payoffs zero.
SignalingUtilities quadrant1_table() {
    SignalingUtilities u;
    u.receiver.at(A, H, T) = -1.0;
    u.receiver.at(A, H, N) = 1.0;   // trust gain -2 (A2)
    u.receiver.at(D, H, T) = 1.0;
    u.receiver.at(D, H, N) = -1.0;  // trust gain +2
    u.receiver.at(A, L, T) = 0.0;
    u.receiver.at(A, L, N) = -0.5;  // trust gain +0.5
    u.receiver.at(D, L, T) = 1.0;
    u.receiver.at(D, L, N) = 0.0;   // trust gain +1 (A1)
    u.attacker.at(H, T) = 2.0;
    u.attacker.at(L, T) = 1.0;
    u.attacker.at(H, N) = 0.0;
    u.attacker.at(L, N) = 0.0;
    u.defender.at(H, T) = 2.0;
    u.defender.at(L, T) = 1.0;
    u.defender.at(H, N) = 0.0;
    u.defender.at(L, N) = 0.0;
    return u;
}

std::vector<EquilibriumId> ids_of(const std::vector<PBEProfile>& profiles) {
    std::vector<EquilibriumId> ids;
    for (const auto& p : profiles) ids.push_back(p.id);
    return ids;
}

bool contains(const std::vector<EquilibriumId>& ids, EquilibriumId id) {
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

}  // namespace

TEST_CASE("validate_assumptions flags each violated label") {
    SignalingUtilities u = quadrant1_table();
    CHECK(validate_assumptions(u).empty());

    SUBCASE("equality violates the strict A1 inequality") {
        u.receiver.at(D, L, T) = u.receiver.at(D, L, N);
        const auto violated = validate_assumptions(u);
        REQUIRE(violated.size() == 1);
        CHECK(violated[0] == Assumption::A1);
    }
    SUBCASE("reversed attacker trusted preference violates A4") {
        u.attacker.at(H, T) = 1.0;
        u.attacker.at(L, T) = 2.0;  // still above the rejected payoffs
        const auto violated = validate_assumptions(u);
        REQUIRE(violated.size() == 1);
        CHECK(violated[0] == Assumption::A4);
    }
    SUBCASE("trusted payoff below a rejected payoff violates A3") {
        u.defender.at(L, T) = -1.0;
        const auto violated = validate_assumptions(u);
        REQUIRE(violated.size() == 1);
        CHECK(violated[0] == Assumption::A3);
    }
}

TEST_CASE("expected_sender_utility expands the double sum") {
    SenderTable table;
    table.at(H, T) = 2.0;

    CHECK(expected_sender_utility({1.0, 1.0}, {1.0}, table) == doctest::Approx(2.0));
    CHECK(expected_sender_utility({0.0, 0.0}, {0.5}, table) == doctest::Approx(0.0));
    // Hand expansion: 2 * 0.5 * 1 plus the zero not-trust branch.
    CHECK(expected_sender_utility({0.5, 1.0}, {1.0}, table) == doctest::Approx(1.0));
}

TEST_CASE("expected_receiver_utility expands the type/action sum") {
    ReceiverTable r;
    r.at(A, H, T) = -1.0;
    r.at(A, H, N) = 0.0;
    r.at(D, H, T) = 1.0;
    r.at(D, H, N) = 0.0;
    r.at(D, L, T) = 1.0;

    CHECK(expected_receiver_utility({1.0, 0.0}, H, {1.0, 0.0}, r) == doctest::Approx(-1.0));
    CHECK(expected_receiver_utility({0.0, 1.0}, L, {0.0, 0.0}, r) == doctest::Approx(1.0));
    // Four-term sum at mu = 0.5, half trust: 0.5*0.5*(-1) + 0.5*0.5*1 = 0.
    CHECK(expected_receiver_utility({0.5, 0.0}, H, {0.5, 0.0}, r) == doctest::Approx(0.0));
}

TEST_CASE("bayes_posterior: pooling, separating and off-path cases") {
    const Belief off_path{1.0, 1.0};
    // Both pool high: the posterior equals the prior.
    CHECK(bayes_posterior({1.0}, {1.0}, 0.3, H, off_path) == doctest::Approx(0.3));
    // Separating: only the attacker sends high.
    CHECK(bayes_posterior({1.0}, {0.0}, 0.5, H, off_path) == doctest::Approx(1.0));
    // Both pool high, low has zero probability: the configured off-path value.
    CHECK(bayes_posterior({1.0}, {1.0}, 0.3, L, off_path) == doctest::Approx(1.0));
}

TEST_CASE("trust_benefits at the prior endpoints and midpoint") {
    SignalingUtilities u = quadrant1_table();

    const TrustBenefits tb0 = trust_benefits(u, 0.0);
    CHECK(tb0.tb_low == doctest::Approx(u.receiver.trust_gain(D, L)));
    CHECK(tb0.tb_low > 0.0);  // A1

    const TrustBenefits tb1 = trust_benefits(u, 1.0);
    CHECK(tb1.tb_high == doctest::Approx(u.receiver.trust_gain(A, H)));
    CHECK(tb1.tb_high < 0.0);  // A2

    // Affine combination by hand: attacker-high diff -2, defender-high diff +1.
    u.receiver.at(D, H, T) = 0.0;
    u.receiver.at(D, H, N) = -1.0;
    CHECK(trust_benefits(u, 0.5).tb_high == doctest::Approx(-0.5));
}

TEST_CASE("classify_quadrant sign map and axis flags") {
    CHECK(classify_quadrant({1.0, 1.0}).region == QuadrantRegion::I);
    CHECK(classify_quadrant({-1.0, 1.0}).region == QuadrantRegion::IV);
    CHECK(classify_quadrant({1.0, -1.0}).region == QuadrantRegion::II);
    CHECK(classify_quadrant({-1.0, -1.0}).region == QuadrantRegion::III);

    const Quadrant axis = classify_quadrant({0.0, 1.0});
    CHECK(axis.on_tb_high_axis);
    CHECK_FALSE(axis.on_tb_low_axis);
    CHECK(axis.region == QuadrantRegion::I);  // zero counts as positive
}

TEST_CASE("trust_benefit_path: endpoints, flat path, single crossing") {
    std::mt19937_64 rng(20240811);
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};

    SUBCASE("endpoint regions under the structural assumptions") {
        for (int i = 0; i < 50; ++i) {
            const SignalingUtilities u = oracles::random_admissible_table(rng);
            const TrustBenefitPath path = trust_benefit_path(u, grid);
            const QuadrantRegion at0 = path.points.front().quadrant.region;
            const QuadrantRegion at1 = path.points.back().quadrant.region;
            CHECK((at0 == QuadrantRegion::I || at0 == QuadrantRegion::IV));
            CHECK((at1 == QuadrantRegion::III || at1 == QuadrantRegion::IV));
        }
    }

    SUBCASE("equal per-type differences collapse the path to a point") {
        SignalingUtilities u = quadrant1_table();
        // Make both types' trust gains coincide per message (slope zero).
        u.receiver.at(A, H, T) = 0.0;
        u.receiver.at(A, H, N) = -1.0;  // gain +1 == defender's (violates A2, bypass enumerate)
        u.receiver.at(A, L, T) = 1.0;
        u.receiver.at(A, L, N) = 0.0;  // gain +1 == defender's
        const TrustBenefitPath path = trust_benefit_path(u, grid);
        for (const auto& sample : path.points) {
            CHECK(sample.tb.tb_high == doctest::Approx(path.points[0].tb.tb_high));
            CHECK(sample.tb.tb_low == doctest::Approx(path.points[0].tb.tb_low));
        }
        CHECK(path.crossings.empty());
    }

    SUBCASE("the bundled family crosses the tb_high axis once, at p = 1/2") {
        const SignalingUtilities u = quadrant1_table();
        // tb_high(p) = 2 - 4p: the affine root is exactly 0.5.
        const TrustBenefitPath path = trust_benefit_path(u, grid);
        REQUIRE(path.crossings.size() == 1);
        CHECK(path.crossings[0].which == TrustBenefitCrossing::Which::TbHigh);
        CHECK(path.crossings[0].p == doctest::Approx(0.5));
    }
}

TEST_CASE("enumerate_pbe matches the named examples") {
    SUBCASE("quadrant-I game contains the pool-high trusted equilibrium") {
        const SignalingUtilities u = quadrant1_table();
        const auto profiles = enumerate_pbe(u, 0.1);
        const auto ids = ids_of(profiles);
        CHECK(contains(ids, EquilibriumId::Eq8));
        // Brute-force confirmation: the scan finds the pool-high trusted class.
        const auto hits = oracles::scan_pure_equilibria(u, 0.1);
        bool found = false;
        for (const auto& hit : hits)
            found = found || (hit.profile.defender_message == H &&
                              hit.profile.attacker_message == H && hit.profile.on_high == T);
        CHECK(found);
    }

    SUBCASE("double rejection supports the separating equilibrium") {
        SignalingUtilities u = quadrant1_table();
        u.receiver.at(A, L, T) = -0.5;
        u.receiver.at(A, L, N) = 0.0;  // attacker-low trust gain now negative
        u.receiver.at(D, H, T) = -1.0;
        u.receiver.at(D, H, N) = 0.0;  // defender-high trust gain now negative
        REQUIRE(validate_assumptions(u).empty());
        const auto ids = ids_of(enumerate_pbe(u, 0.4));
        CHECK(contains(ids, EquilibriumId::Eq2));
    }

    SUBCASE("the reverse separating candidate is never returned") {
        std::mt19937_64 rng(99);
        for (int i = 0; i < 100; ++i) {
            const SignalingUtilities u = oracles::random_admissible_table(rng);
            for (double p : {0.0, 0.3, 0.7, 1.0}) {
                for (const auto& e : enumerate_pbe(u, p)) {
                    const bool reverse_separating = e.defender_strategy.prob_high == 0.0 &&
                                                    e.attacker_strategy.prob_high == 1.0;
                    CHECK_FALSE(reverse_separating);
                }
            }
        }
    }

    SUBCASE("assumption violations are reported, not silently solved") {
        SignalingUtilities u = quadrant1_table();
        u.receiver.at(D, L, T) = u.receiver.at(D, L, N);
        CHECK_THROWS_AS(enumerate_pbe(u, 0.5), AssumptionViolationError);
    }
}

TEST_CASE("enumerate_pbe equilibria pass the independent deviation oracle") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const SignalingUtilities u = oracles::random_admissible_table(rng);
        for (double p : {0.0, 0.2, 0.5, 0.8, 1.0}) {
            for (const auto& e : enumerate_pbe(u, p)) {
                CHECK(oracles::passes_deviation_oracle(u, e));
                // Bayes consistency of stored beliefs on on-path messages.
                const Belief off_path{e.belief.attacker_given_high, e.belief.attacker_given_low};
                for (Message m : {H, L}) {
                    const double weight = e.attacker_strategy.prob(m) * p +
                                          e.defender_strategy.prob(m) * (1.0 - p);
                    if (weight != 0.0) {
                        CHECK(e.belief.attacker_given(m) ==
                              bayes_posterior(e.attacker_strategy, e.defender_strategy, p, m,
                                              off_path));
                    }
                }
                // Stored utilities match the expected-utility recomputation.
                CHECK(e.utility_defender ==
                      doctest::Approx(expected_sender_utility(e.receiver_strategy,
                                                              e.defender_strategy, u.defender))
                          .epsilon(1e-12));
                CHECK(e.utility_attacker ==
                      doctest::Approx(expected_sender_utility(e.receiver_strategy,
                                                              e.attacker_strategy, u.attacker))
                          .epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("pooling posterior equals the prior exactly") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 50; ++i) {
        const SignalingUtilities u = oracles::random_admissible_table(rng);
        for (double p : {0.0, 0.123, 0.5, 0.987, 1.0}) {
            for (const auto& e : enumerate_pbe(u, p)) {
                if (e.defender_strategy.prob_high != e.attacker_strategy.prob_high) continue;
                const Message pooled = e.defender_strategy.prob_high > 0.5 ? H : L;
                CHECK(e.belief.attacker_given(pooled) == p);
            }
        }
    }
}

TEST_CASE("trust benefits are affine in the prior") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        const SignalingUtilities u = oracles::random_admissible_table(rng);
        const double p1 = uniform_unit(rng);
        const double p2 = uniform_unit(rng);
        const double lambda = uniform_unit(rng);
        const double mix = lambda * p1 + (1.0 - lambda) * p2;
        const TrustBenefits at_mix = trust_benefits(u, mix);
        const TrustBenefits at_p1 = trust_benefits(u, p1);
        const TrustBenefits at_p2 = trust_benefits(u, p2);
        CHECK(at_mix.tb_high ==
              doctest::Approx(lambda * at_p1.tb_high + (1.0 - lambda) * at_p2.tb_high)
                  .epsilon(1e-12));
        CHECK(at_mix.tb_low ==
              doctest::Approx(lambda * at_p1.tb_low + (1.0 - lambda) * at_p2.tb_low)
                  .epsilon(1e-12));
    }
}

TEST_CASE("receiver payoff translation leaves the equilibrium classes unchanged") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 50; ++i) {
        const SignalingUtilities u = oracles::random_admissible_table(rng);
        SignalingUtilities shifted = u;
        const CloudType type = rng() % 2 ? A : D;
        const Message msg = rng() % 2 ? H : L;
        const double offset = -3.0 + 6.0 * uniform_unit(rng);
        shifted.receiver.at(type, msg, T) += offset;
        shifted.receiver.at(type, msg, N) += offset;

        for (double p : {0.1, 0.5, 0.9}) {
            const auto base_ids = ids_of(enumerate_pbe(u, p));
            const auto shifted_ids = ids_of(enumerate_pbe(shifted, p));
            CHECK(base_ids == shifted_ids);
        }
    }
}

TEST_CASE("select_equilibrium follows the region selection narrative") {
    const SignalingUtilities u = quadrant1_table();

    SUBCASE("quadrant I: pool-high trusted dominates for both senders") {
        const auto candidates = enumerate_pbe(u, 0.1);
        REQUIRE(candidates.size() == 2);  // Eq3 and Eq8
        const auto& chosen = select_equilibrium(candidates, trust_benefits(u, 0.1),
                                                SelectionPolicy::PaperSelection);
        CHECK(chosen.id == EquilibriumId::Eq8);
    }

    SUBCASE("on the tb_high axis the senders pool low") {
        // Candidate set handed in directly, as on the axis in the narrative.
        std::vector<PBEProfile> candidates(3);
        candidates[0].id = EquilibriumId::Eq3;
        candidates[0].utility_defender = 1.6;
        candidates[0].utility_attacker = 0.8;
        candidates[1].id = EquilibriumId::Eq8;
        candidates[1].utility_defender = 2.0;
        candidates[1].utility_attacker = 3.0;
        candidates[2].id = EquilibriumId::Eq6;
        candidates[2].utility_defender = 0.0;
        candidates[2].utility_attacker = 0.0;
        const auto& chosen = select_equilibrium(candidates, TrustBenefits{0.0, 0.7},
                                                SelectionPolicy::PaperSelection);
        CHECK(chosen.id == EquilibriumId::Eq3);
    }

    SUBCASE("singleton set returns its element") {
        const auto candidates = enumerate_pbe(u, 0.9);  // quadrant IV: only Eq3
        REQUIRE(candidates.size() == 1);
        const auto& chosen = select_equilibrium(candidates, trust_benefits(u, 0.9),
                                                SelectionPolicy::PaperSelection);
        CHECK(chosen.id == EquilibriumId::Eq3);
    }

    SUBCASE("incomparable sender preferences report NoSelection") {
        SignalingUtilities split = quadrant1_table();
        split.defender.at(H, T) = 1.0;
        split.defender.at(L, T) = 2.0;  // defender now prefers pooling low
        split.receiver.at(A, L, T) = -1.0;
        split.receiver.at(A, L, N) = 0.0;  // low message rejectable: Eq7 feasible
        REQUIRE(validate_assumptions(split).empty());
        const auto candidates = enumerate_pbe(split, 0.25);
        CHECK(contains(ids_of(candidates), EquilibriumId::Eq3));
        CHECK(contains(ids_of(candidates), EquilibriumId::Eq7));
        CHECK_THROWS_AS(select_equilibrium(candidates, trust_benefits(split, 0.25),
                                           SelectionPolicy::PaperSelection),
                        NoSelectionError);
    }
}

TEST_CASE("t_s composes enumeration, selection and the stored utilities") {
    SUBCASE("quadrant-I game at a small prior") {
        const auto [value_d, value_a] = t_s(0.05, quadrant1_table());
        CHECK(value_d == doctest::Approx(2.0));
        CHECK(value_a == doctest::Approx(2.0));
    }

    SUBCASE("quadrant IV of the traversing family selects pool-low trusted") {
        SignalingUtilities u = quadrant1_table();
        u.attacker.at(H, T) = 3.0;
        u.attacker.at(L, T) = 0.8;
        u.defender.at(H, T) = 2.0;
        u.defender.at(L, T) = 1.6;
        const auto [value_d, value_a] = t_s(0.75, u);  // tb_high(0.75) < 0
        CHECK(value_d == doctest::Approx(1.6));
        CHECK(value_a == doctest::Approx(0.8));
    }

    SUBCASE("all-rejected game with zero rejected payoffs maps to (0, 0)") {
        SignalingUtilities u = quadrant1_table();
        // Push both trust benefits negative at p = 0.6 while keeping A1/A2.
        u.receiver.at(A, L, T) = -2.0;
        u.receiver.at(A, L, N) = 0.0;
        u.receiver.at(D, H, T) = -1.0;
        u.receiver.at(D, H, N) = 0.0;
        REQUIRE(validate_assumptions(u).empty());
        const TrustBenefits tb = trust_benefits(u, 0.6);
        REQUIRE(tb.tb_high < 0.0);
        REQUIRE(tb.tb_low < 0.0);
        const auto [value_d, value_a] = t_s(0.6, u);
        CHECK(value_d == doctest::Approx(0.0));
        CHECK(value_a == doctest::Approx(0.0));
    }

    SUBCASE("the enumerate policy does not define a single selection") {
        CHECK_THROWS_AS(t_s(0.1, quadrant1_table(), SelectionPolicy::Enumerate),
                        NoSelectionError);
    }
}

TEST_CASE("degenerate prior p = 1: the documented out-of-taxonomy equilibrium") {
    // With a rejectable low message and both senders preferring their own
    // rejected message, the reverse-separating profile is an equilibrium at
    // exactly p = 1 (the safe type has zero weight, so its message is off
    // path). The enumerator intentionally stays within the taxonomy.
    SignalingUtilities u = quadrant1_table();
    u.receiver.at(A, L, T) = -0.5;
    u.receiver.at(A, L, N) = 0.0;  // rejectable low message
    u.attacker.at(H, N) = 0.5;
    u.attacker.at(L, N) = 0.0;  // attacker prefers high rejected
    u.defender.at(L, N) = 0.5;
    u.defender.at(H, N) = 0.0;  // defender prefers low rejected
    u.attacker.at(H, T) = 2.0;  // keep A3/A4 intact
    u.defender.at(H, T) = 2.0;
    REQUIRE(validate_assumptions(u).empty());

    const auto hits_mid = oracles::scan_pure_equilibria(u, 0.5);
    for (const auto& hit : hits_mid)
        CHECK_FALSE(hit.profile.defender_message == L && hit.profile.attacker_message == H);

    const auto hits_one = oracles::scan_pure_equilibria(u, 1.0);
    bool reverse_found = false;
    for (const auto& hit : hits_one)
        reverse_found = reverse_found ||
                        (hit.profile.defender_message == L && hit.profile.attacker_message == H &&
                         hit.profile.on_high == N && hit.profile.on_low == N);
    CHECK(reverse_found);
    for (const auto& e : enumerate_pbe(u, 1.0))
        CHECK_FALSE(e.defender_strategy.prob_high == 0.0 && e.attacker_strategy.prob_high == 1.0);
}
