#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cloudcontrol/numeric.hpp"

namespace cloudcontrol::signaling {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Who controls the cloud: a compromised (attacker) or safe (defender) sender.
enum class CloudType { Attacker, Defender };

/// Risk label attached to a cloud command.
enum class Message { High, Low };

/// The device either follows the cloud command or falls back to its own control.
enum class Action { Trust, NotTrust };

const char* to_string(CloudType t);
const char* to_string(Message m);
const char* to_string(Action a);

inline constexpr int index_of(Message m) { return m == Message::High ? 0 : 1; }
inline constexpr int index_of(Action a) { return a == Action::Trust ? 0 : 1; }
inline constexpr int index_of(CloudType t) { return t == CloudType::Attacker ? 0 : 1; }

inline constexpr Message other(Message m) {
    return m == Message::High ? Message::Low : Message::High;
}
inline constexpr Action other(Action a) {
    return a == Action::Trust ? Action::NotTrust : Action::Trust;
}

/// Payoff table for one sender, indexed by (message, receiver action).
struct SenderTable {
    std::array<double, 4> values{};

    double at(Message m, Action a) const { return values[index_of(m) * 2 + index_of(a)]; }
    double& at(Message m, Action a) { return values[index_of(m) * 2 + index_of(a)]; }

    bool operator==(const SenderTable&) const = default;
};

/// Payoff table for the device, indexed by (sender type, message, action).
struct ReceiverTable {
    std::array<double, 8> values{};

    double at(CloudType t, Message m, Action a) const {
        return values[index_of(t) * 4 + index_of(m) * 2 + index_of(a)];
    }
    double& at(CloudType t, Message m, Action a) {
        return values[index_of(t) * 4 + index_of(m) * 2 + index_of(a)];
    }

    /// Trust-minus-reject payoff difference for (type, message).
    double trust_gain(CloudType t, Message m) const {
        return at(t, m, Action::Trust) - at(t, m, Action::NotTrust);
    }

    bool operator==(const ReceiverTable&) const = default;
};

/// The three payoff tables of the cloud-device signaling game.
struct SignalingUtilities {
    ReceiverTable receiver;
    SenderTable attacker;
    SenderTable defender;

    const SenderTable& sender(CloudType t) const {
        return t == CloudType::Attacker ? attacker : defender;
    }

    bool all_finite() const;

    bool operator==(const SignalingUtilities&) const = default;
};

/// Mixed sender strategy: probability of transmitting the high-risk message.
struct SenderStrategy {
    double prob_high = 0.0;

    double prob(Message m) const { return m == Message::High ? prob_high : 1.0 - prob_high; }

    bool operator==(const SenderStrategy&) const = default;
};

/// Mixed receiver strategy: trust probability conditioned on the message.
struct ReceiverStrategy {
    double trust_given_high = 0.0;
    double trust_given_low = 0.0;

    double trust_prob(Message m) const {
        return m == Message::High ? trust_given_high : trust_given_low;
    }
    double prob(Action a, Message m) const {
        const double t = trust_prob(m);
        return a == Action::Trust ? t : 1.0 - t;
    }

    bool operator==(const ReceiverStrategy&) const = default;
};

/// Posterior probability that the sender is the attacker, per message.
struct Belief {
    double attacker_given_high = 0.0;
    double attacker_given_low = 0.0;

    double attacker_given(Message m) const {
        return m == Message::High ? attacker_given_high : attacker_given_low;
    }
    double& attacker_given(Message m) {
        return m == Message::High ? attacker_given_high : attacker_given_low;
    }

    bool operator==(const Belief&) const = default;
};

/// Receiver's expected gain from trusting (vs rejecting) each pooled message
/// at a given prior. Both components are affine in the prior.
struct TrustBenefits {
    double tb_high = 0.0;
    double tb_low = 0.0;

    bool operator==(const TrustBenefits&) const = default;
};

enum class QuadrantRegion { I, II, III, IV };

const char* to_string(QuadrantRegion r);

/// Sign region of (tb_low, tb_high) with axis-boundary flags.
struct Quadrant {
    QuadrantRegion region = QuadrantRegion::I;
    bool on_tb_high_axis = false;
    bool on_tb_low_axis = false;

    bool operator==(const Quadrant&) const = default;
};

/// Equilibrium labels follow the taxonomy of the game's pooling/separating
/// analysis; the numbering intentionally has no fourth entry.
enum class EquilibriumId { Eq1, Eq2, Eq3, Eq5, Eq6, Eq7, Eq8 };

const char* to_string(EquilibriumId id);

/// A pure-strategy perfect Bayesian equilibrium with its belief witness and
/// the equilibrium utilities (defender, attacker, receiver ex ante).
struct PBEProfile {
    SenderStrategy defender_strategy;
    SenderStrategy attacker_strategy;
    ReceiverStrategy receiver_strategy;
    Belief belief;
    EquilibriumId id = EquilibriumId::Eq1;
    double utility_defender = 0.0;
    double utility_attacker = 0.0;
    double utility_receiver = 0.0;

    bool operator==(const PBEProfile&) const = default;
};

enum class Assumption { A1, A2, A3, A4 };

const char* to_string(Assumption a);

class AssumptionViolationError : public std::invalid_argument {
public:
    explicit AssumptionViolationError(std::vector<Assumption> violated);
    const std::vector<Assumption>& violated() const noexcept { return violated_; }

private:
    std::vector<Assumption> violated_;
};

enum class SelectionPolicy { PaperSelection, Enumerate };

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Checks the four structural assumptions as strict inequalities and returns
/// the violated ones (empty means the game is admissible).
///
/// A1: the receiver gains from trusting a low-risk message of the safe type.
/// A2: the receiver loses from trusting a high-risk message of the compromised type.
/// A3: each sender prefers any trusted outcome to any rejected outcome.
/// A4: the attacker prefers its high-risk message trusted over its low-risk one.
std::vector<Assumption> validate_assumptions(const SignalingUtilities& u,
                                             double zero_tolerance = kDefaultZeroTolerance);

/// Expected utility of a sender with payoff table u_x against the given
/// receiver strategy: sum over messages and actions of payoff times the
/// joint play probability.
double expected_sender_utility(const ReceiverStrategy& receiver,
                               const SenderStrategy& sender,
                               const SenderTable& u_x);

/// Expected utility of the receiver for one message under a belief.
double expected_receiver_utility(const ReceiverStrategy& receiver,
                                 Message m,
                                 const Belief& belief,
                                 const ReceiverTable& u_r);

/// Posterior attacker probability for message m. On-path messages use the
/// Bayes formula; messages sent with probability zero fall back to the
/// configured off-path belief component.
double bayes_posterior(const SenderStrategy& attacker,
                       const SenderStrategy& defender,
                       double prior,
                       Message m,
                       const Belief& off_path_policy);

/// Trust benefits at a prior: the prior-weighted trust-minus-reject
/// differences of the receiver table for each message.
TrustBenefits trust_benefits(const SignalingUtilities& u, double prior);

Quadrant classify_quadrant(const TrustBenefits& tb,
                           double zero_tolerance = kDefaultZeroTolerance);

/// Prior where the given trust benefit changes sign, if it does in (0, 1).
/// Both benefits are affine in the prior so the root is exact.
std::optional<double> tb_high_crossing(const SignalingUtilities& u);
std::optional<double> tb_low_crossing(const SignalingUtilities& u);

struct TrustBenefitSample {
    double p = 0.0;
    TrustBenefits tb;
    Quadrant quadrant;
};

struct TrustBenefitCrossing {
    enum class Which { TbHigh, TbLow };
    Which which = Which::TbHigh;
    double p = 0.0;
};

struct TrustBenefitPath {
    std::vector<TrustBenefitSample> points;
    std::vector<TrustBenefitCrossing> crossings;
};

/// Samples the (tb_low, tb_high) locus over a sorted grid of priors and
/// reports the exact sign-change priors.
TrustBenefitPath trust_benefit_path(const SignalingUtilities& u,
                                    std::span<const double> grid,
                                    double zero_tolerance = kDefaultZeroTolerance);

/// Enumerates every pure-strategy perfect Bayesian equilibrium of the game at
/// the given prior, labelled per the pooling/separating taxonomy. Belief
/// witnesses for constrained equilibria store the maximal feasible posterior.
/// Requires the structural assumptions to hold; throws AssumptionViolationError
/// otherwise.
std::vector<PBEProfile> enumerate_pbe(const SignalingUtilities& u,
                                      double prior,
                                      double zero_tolerance = kDefaultZeroTolerance);

/// Applies the selection narrative: off the tb_high axis the candidate that
/// attains both senders' maximum utilities is picked (first-mover logic);
/// on the axis the senders maximize worst-case utility and pool low trusted.
/// Throws NoSelectionError when no candidate can be ranked.
const PBEProfile& select_equilibrium(const std::vector<PBEProfile>& candidates,
                                     const TrustBenefits& tb,
                                     SelectionPolicy policy,
                                     double zero_tolerance = kDefaultZeroTolerance);

/// Map from prior to the selected equilibrium's (defender, attacker) utilities.
std::pair<double, double> t_s(double prior,
                              const SignalingUtilities& u,
                              SelectionPolicy policy = SelectionPolicy::PaperSelection,
                              double zero_tolerance = kDefaultZeroTolerance);

}  // namespace cloudcontrol::signaling
