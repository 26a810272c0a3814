#include "cloudcontrol/signaling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cloudcontrol/errors.hpp"

namespace cloudcontrol::signaling {

namespace {

constexpr CloudType kAttacker = CloudType::Attacker;
constexpr CloudType kDefender = CloudType::Defender;
constexpr Message kHigh = Message::High;
constexpr Message kLow = Message::Low;
constexpr Action kTrust = Action::Trust;
constexpr Action kReject = Action::NotTrust;

/// Receiver's trust-minus-reject advantage for message m at posterior mu.
/// Affine in mu; trust_benefits is this evaluated at the prior.
double trust_advantage(const ReceiverTable& r, Message m, double mu) {
    return mu * r.trust_gain(kAttacker, m) + (1.0 - mu) * r.trust_gain(kDefender, m);
}

}  // namespace

const char* to_string(CloudType t) {
    return t == kAttacker ? "attacker" : "defender";
}

const char* to_string(Message m) {
    return m == kHigh ? "high" : "low";
}

const char* to_string(Action a) {
    return a == kTrust ? "trust" : "not_trust";
}

const char* to_string(QuadrantRegion r) {
    switch (r) {
        case QuadrantRegion::I: return "I";
        case QuadrantRegion::II: return "II";
        case QuadrantRegion::III: return "III";
        case QuadrantRegion::IV: return "IV";
    }
    return "?";
}

const char* to_string(EquilibriumId id) {
    switch (id) {
        case EquilibriumId::Eq1: return "Eq1";
        case EquilibriumId::Eq2: return "Eq2";
        case EquilibriumId::Eq3: return "Eq3";
        case EquilibriumId::Eq5: return "Eq5";
        case EquilibriumId::Eq6: return "Eq6";
        case EquilibriumId::Eq7: return "Eq7";
        case EquilibriumId::Eq8: return "Eq8";
    }
    return "?";
}

const char* to_string(Assumption a) {
    switch (a) {
        case Assumption::A1: return "A1";
        case Assumption::A2: return "A2";
        case Assumption::A3: return "A3";
        case Assumption::A4: return "A4";
    }
    return "?";
}

AssumptionViolationError::AssumptionViolationError(std::vector<Assumption> violated)
    : std::invalid_argument([&violated] {
          std::ostringstream msg;
          msg << "signaling utilities violate assumption(s):";
          for (Assumption a : violated) msg << ' ' << to_string(a);
          return msg.str();
      }()),
      violated_(std::move(violated)) {}

bool SignalingUtilities::all_finite() const {
    const auto finite = [](const auto& table) {
        return std::all_of(table.values.begin(), table.values.end(),
                           [](double v) { return std::isfinite(v); });
    };
    return finite(receiver) && finite(attacker) && finite(defender);
}

std::vector<Assumption> validate_assumptions(const SignalingUtilities& u, double tol) {
    std::vector<Assumption> violated;
    const auto strictly_positive = [tol](double x) { return sign_with_tolerance(x, tol) > 0; };

    if (!strictly_positive(u.receiver.trust_gain(kDefender, kLow)))
        violated.push_back(Assumption::A1);
    if (!strictly_positive(-u.receiver.trust_gain(kAttacker, kHigh)))
        violated.push_back(Assumption::A2);

    bool a3 = true;
    for (CloudType who : {kAttacker, kDefender}) {
        const SenderTable& s = u.sender(who);
        for (Message trusted : {kHigh, kLow})
            for (Message rejected : {kHigh, kLow})
                a3 = a3 && strictly_positive(s.at(trusted, kTrust) - s.at(rejected, kReject));
    }
    if (!a3) violated.push_back(Assumption::A3);

    if (!strictly_positive(u.attacker.at(kHigh, kTrust) - u.attacker.at(kLow, kTrust)))
        violated.push_back(Assumption::A4);

    return violated;
}

double expected_sender_utility(const ReceiverStrategy& receiver,
                               const SenderStrategy& sender,
                               const SenderTable& u_x) {
    double total = 0.0;
    for (Action a : {kTrust, kReject})
        for (Message m : {kHigh, kLow})
            total += u_x.at(m, a) * receiver.prob(a, m) * sender.prob(m);
    return total;
}

double expected_receiver_utility(const ReceiverStrategy& receiver,
                                 Message m,
                                 const Belief& belief,
                                 const ReceiverTable& u_r) {
    const double mu = belief.attacker_given(m);
    double total = 0.0;
    for (CloudType t : {kAttacker, kDefender}) {
        const double weight = (t == kAttacker) ? mu : 1.0 - mu;
        for (Action a : {kTrust, kReject})
            total += u_r.at(t, m, a) * weight * receiver.prob(a, m);
    }
    return total;
}

double bayes_posterior(const SenderStrategy& attacker,
                       const SenderStrategy& defender,
                       double prior,
                       Message m,
                       const Belief& off_path_policy) {
    const double numerator = attacker.prob(m) * prior;
    const double denominator = numerator + defender.prob(m) * (1.0 - prior);
    if (denominator != 0.0) return numerator / denominator;
    return off_path_policy.attacker_given(m);
}

TrustBenefits trust_benefits(const SignalingUtilities& u, double prior) {
    return {.tb_high = trust_advantage(u.receiver, kHigh, prior),
            .tb_low = trust_advantage(u.receiver, kLow, prior)};
}

Quadrant classify_quadrant(const TrustBenefits& tb, double tol) {
    const int sl = sign_with_tolerance(tb.tb_low, tol);
    const int sh = sign_with_tolerance(tb.tb_high, tol);
    Quadrant q;
    q.on_tb_low_axis = sl == 0;
    q.on_tb_high_axis = sh == 0;
    // Zero counts as positive, matching the trust-on-ties convention.
    if (sl >= 0)
        q.region = sh >= 0 ? QuadrantRegion::I : QuadrantRegion::IV;
    else
        q.region = sh >= 0 ? QuadrantRegion::II : QuadrantRegion::III;
    return q;
}

namespace {

std::optional<double> affine_root(double at_zero, double at_one) {
    if (at_zero == at_one) return std::nullopt;
    const double root = at_zero / (at_zero - at_one);
    if (root > 0.0 && root < 1.0) return root;
    return std::nullopt;
}

}  // namespace

std::optional<double> tb_high_crossing(const SignalingUtilities& u) {
    return affine_root(u.receiver.trust_gain(kDefender, kHigh),
                       u.receiver.trust_gain(kAttacker, kHigh));
}

std::optional<double> tb_low_crossing(const SignalingUtilities& u) {
    return affine_root(u.receiver.trust_gain(kDefender, kLow),
                       u.receiver.trust_gain(kAttacker, kLow));
}

TrustBenefitPath trust_benefit_path(const SignalingUtilities& u,
                                    std::span<const double> grid,
                                    double tol) {
    TrustBenefitPath path;
    path.points.reserve(grid.size());
    for (double p : grid) {
        const TrustBenefits tb = trust_benefits(u, p);
        path.points.push_back({p, tb, classify_quadrant(tb, tol)});
    }
    if (auto c = tb_high_crossing(u))
        path.crossings.push_back({TrustBenefitCrossing::Which::TbHigh, *c});
    if (auto c = tb_low_crossing(u))
        path.crossings.push_back({TrustBenefitCrossing::Which::TbLow, *c});
    std::sort(path.crossings.begin(), path.crossings.end(),
              [](const auto& a, const auto& b) { return a.p < b.p; });
    return path;
}

namespace {

struct ProfileSpec {
    Message defender_message;
    Message attacker_message;
    Action on_high;
    Action on_low;
    Belief belief;
    EquilibriumId id;
};

PBEProfile make_profile(const SignalingUtilities& u, double prior, const ProfileSpec& s) {
    PBEProfile profile;
    profile.defender_strategy = {s.defender_message == kHigh ? 1.0 : 0.0};
    profile.attacker_strategy = {s.attacker_message == kHigh ? 1.0 : 0.0};
    profile.receiver_strategy = {s.on_high == kTrust ? 1.0 : 0.0,
                                 s.on_low == kTrust ? 1.0 : 0.0};
    profile.belief = s.belief;
    profile.id = s.id;

    const Action defender_faces = s.defender_message == kHigh ? s.on_high : s.on_low;
    const Action attacker_faces = s.attacker_message == kHigh ? s.on_high : s.on_low;
    profile.utility_defender = u.defender.at(s.defender_message, defender_faces);
    profile.utility_attacker = u.attacker.at(s.attacker_message, attacker_faces);
    profile.utility_receiver =
        prior * u.receiver.at(kAttacker, s.attacker_message, attacker_faces) +
        (1.0 - prior) * u.receiver.at(kDefender, s.defender_message, defender_faces);
    return profile;
}

}  // namespace

std::vector<PBEProfile> enumerate_pbe(const SignalingUtilities& u, double prior, double tol) {
    if (auto violated = validate_assumptions(u, tol); !violated.empty())
        throw AssumptionViolationError(std::move(violated));

    const TrustBenefits tb = trust_benefits(u, prior);
    const double gain_attacker_low = u.receiver.trust_gain(kAttacker, kLow);
    // A rejecting belief for an off-path message is an interval anchored at
    // mu = 1, so feasibility reduces to the attacker-type trust gain and the
    // maximal (most adversarial) witness is always mu = 1. For the high
    // message rejection is feasible outright (A2).
    const bool low_rejectable = sign_with_tolerance(gain_attacker_low, tol) <= 0;

    const auto weakly_prefers = [tol](const SenderTable& s, Message preferred, Action a) {
        return sign_with_tolerance(s.at(preferred, a) - s.at(other(preferred), a), tol) >= 0;
    };

    std::vector<PBEProfile> out;

    // --- Pooling on the low message: posterior on-path equals the prior.
    if (sign_with_tolerance(tb.tb_low, tol) < 0) {
        // Rejected pooling survives only if neither sender gains from being
        // rejected on the high message instead.
        if (weakly_prefers(u.attacker, kLow, kReject) && weakly_prefers(u.defender, kLow, kReject))
            out.push_back(make_profile(
                u, prior,
                {kLow, kLow, kReject, kReject, Belief{1.0, prior}, EquilibriumId::Eq1}));
    } else {
        const bool both_prefer_low = weakly_prefers(u.attacker, kLow, kTrust) &&
                                     weakly_prefers(u.defender, kLow, kTrust);
        if (both_prefer_low) {
            // Unconstrained belief; unreachable while A4 holds, kept for the
            // taxonomy. The witness best-responds at mu = 1 (reject, by A2).
            out.push_back(make_profile(
                u, prior, {kLow, kLow, kReject, kTrust, Belief{1.0, prior}, EquilibriumId::Eq5}));
        } else {
            // The deviation to the high message must be met with rejection,
            // which a mu = 1 belief always supports.
            out.push_back(make_profile(
                u, prior, {kLow, kLow, kReject, kTrust, Belief{1.0, prior}, EquilibriumId::Eq3}));
        }
    }

    // --- Pooling on the high message.
    if (sign_with_tolerance(tb.tb_high, tol) < 0) {
        if (low_rejectable && weakly_prefers(u.attacker, kHigh, kReject) &&
            weakly_prefers(u.defender, kHigh, kReject))
            out.push_back(make_profile(
                u, prior,
                {kHigh, kHigh, kReject, kReject, Belief{prior, 1.0}, EquilibriumId::Eq6}));
    } else {
        const bool both_prefer_high = weakly_prefers(u.attacker, kHigh, kTrust) &&
                                      weakly_prefers(u.defender, kHigh, kTrust);
        if (both_prefer_high) {
            // Unconstrained belief: no deviation pays whatever the response
            // to the low message is. Store mu = 1 and its best response.
            const Action off = sign_with_tolerance(gain_attacker_low, tol) >= 0 ? kTrust : kReject;
            out.push_back(make_profile(
                u, prior, {kHigh, kHigh, kTrust, off, Belief{prior, 1.0}, EquilibriumId::Eq8}));
        } else if (low_rejectable) {
            out.push_back(make_profile(
                u, prior, {kHigh, kHigh, kTrust, kReject, Belief{prior, 1.0}, EquilibriumId::Eq7}));
        }
    }

    // --- Separating: defender high, attacker low, both rejected. On-path
    // posteriors are the point masses; a message a zero-weight type sends
    // alone is off path and takes the maximal rejecting witness instead.
    {
        const bool high_on_path = prior < 1.0;
        const bool low_on_path = prior > 0.0;
        const double mu_high = high_on_path ? 0.0 : 1.0;
        const double mu_low = 1.0;  // Bayes gives 1 on path; the witness is 1 off path
        const bool high_rejected =
            high_on_path ? sign_with_tolerance(u.receiver.trust_gain(kDefender, kHigh), tol) <= 0
                         : true;  // off path, mu = 1 rejects by A2
        const bool low_rejected =
            low_on_path ? sign_with_tolerance(gain_attacker_low, tol) <= 0 : low_rejectable;
        // Neither rejected sender may prefer the other rejected message.
        const bool attacker_stays = weakly_prefers(u.attacker, kLow, kReject);
        const bool defender_stays = weakly_prefers(u.defender, kHigh, kReject);
        if (high_rejected && low_rejected && attacker_stays && defender_stays)
            out.push_back(make_profile(
                u, prior,
                {kHigh, kLow, kReject, kReject, Belief{mu_high, mu_low}, EquilibriumId::Eq2}));
    }

    std::sort(out.begin(), out.end(),
              [](const PBEProfile& a, const PBEProfile& b) { return a.id < b.id; });
    return out;
}

const PBEProfile& select_equilibrium(const std::vector<PBEProfile>& candidates,
                                     const TrustBenefits& tb,
                                     SelectionPolicy policy,
                                     double tol) {
    if (candidates.empty()) throw NoSelectionError("no equilibrium candidates to select from");
    if (policy == SelectionPolicy::Enumerate)
        throw NoSelectionError("the enumerate policy does not define a single selection");
    if (candidates.size() == 1) return candidates.front();

    // On the tb_high axis the senders cannot guarantee trust when pooling
    // high, so they maximize worst-case utility and pool low trusted.
    if (classify_quadrant(tb, tol).on_tb_high_axis) {
        for (const PBEProfile& c : candidates)
            if (c.id == EquilibriumId::Eq3 || c.id == EquilibriumId::Eq5) return c;
    }

    // Otherwise the senders move first and coordinate on a candidate that
    // attains both of their maxima, when one exists.
    double max_defender = candidates.front().utility_defender;
    double max_attacker = candidates.front().utility_attacker;
    for (const PBEProfile& c : candidates) {
        max_defender = std::max(max_defender, c.utility_defender);
        max_attacker = std::max(max_attacker, c.utility_attacker);
    }
    for (const PBEProfile& c : candidates) {
        if (sign_with_tolerance(c.utility_defender - max_defender, tol) >= 0 &&
            sign_with_tolerance(c.utility_attacker - max_attacker, tol) >= 0)
            return c;
    }
    throw NoSelectionError("no candidate attains both senders' maximum utilities");
}

std::pair<double, double> t_s(double prior,
                              const SignalingUtilities& u,
                              SelectionPolicy policy,
                              double tol) {
    const auto candidates = enumerate_pbe(u, prior, tol);
    try {
        const PBEProfile& chosen = select_equilibrium(candidates, trust_benefits(u, prior), policy, tol);
        return {chosen.utility_defender, chosen.utility_attacker};
    } catch (const NoSelectionError& e) {
        throw NoSelectionError(e.reason(), prior);
    }
}

}  // namespace cloudcontrol::signaling
