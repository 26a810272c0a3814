#include "cloudcontrol/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cloudcontrol/numeric.hpp"

namespace cloudcontrol::simulate {

namespace {

namespace sg = cloudcontrol::signaling;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Equilibrium strategies and tables needed to replay the signaling stage on
/// top of the takeover timeline.
struct SignalingOverlay {
    sg::SenderStrategy defender;
    sg::SenderStrategy attacker;
    sg::ReceiverStrategy receiver;
    const sg::SignalingUtilities* utilities = nullptr;
    double epoch_rate = 1.0;
};

struct ReplicationResult {
    double attacker_share = 0.0;
    double rate_defender = 0.0;
    double rate_attacker = 0.0;
    double payoff_defender = 0.0;
    double payoff_attacker = 0.0;
    double receiver_mean = 0.0;
};

std::vector<double> periodic_move_times(double freq, double horizon, std::mt19937_64& rng) {
    std::vector<double> times;
    if (freq <= 0.0) return times;
    const double period = 1.0 / freq;
    const double phase = uniform_unit(rng) * period;
    times.reserve(static_cast<std::size_t>(horizon * freq) + 2);
    for (std::int64_t k = 0;; ++k) {
        const double t = phase + static_cast<double>(k) * period;
        if (t > horizon) break;
        times.push_back(t);
    }
    return times;
}

ReplicationResult run_replication(const SimulationConfig& config,
                                  const SignalingOverlay* overlay,
                                  std::uint64_t replication_seed) {
    std::mt19937_64 rng(replication_seed);
    const double horizon = config.horizon;

    const std::vector<double> defender_times =
        periodic_move_times(config.profile.freq_defender, horizon, rng);
    std::vector<double> attacker_times;
    if (config.profile.attacker_single_move) {
        // One attack ever, placed at the start: the long-run limit where a
        // single move holds the cloud for the whole run.
        attacker_times.push_back(0.0);
    } else {
        attacker_times = periodic_move_times(config.profile.freq_attacker, horizon, rng);
    }

    // Epoch grid for the signaling overlay: midpoints of unit-rate slots.
    std::vector<double> epochs;
    if (overlay != nullptr && overlay->epoch_rate > 0.0) {
        const double step = 1.0 / overlay->epoch_rate;
        epochs.reserve(static_cast<std::size_t>(horizon * overlay->epoch_rate) + 1);
        for (std::int64_t k = 1;; ++k) {
            const double t = (static_cast<double>(k) - 0.5) * step;
            if (t > horizon) break;
            epochs.push_back(t);
        }
    }

    ReplicationResult result;
    KahanSum attacker_time;
    KahanSum receiver_total;
    KahanSum defender_signal_total;
    KahanSum attacker_signal_total;

    std::size_t di = 0, ai = 0, ei = 0;
    double prev = 0.0;
    bool attacker_owns = false;  // defender controls the resource at t = 0

    const auto sample_epochs_before = [&](double until) {
        while (ei < epochs.size() && epochs[ei] < until) {
            const sg::CloudType owner =
                attacker_owns ? sg::CloudType::Attacker : sg::CloudType::Defender;
            const sg::SenderStrategy& sender =
                attacker_owns ? overlay->attacker : overlay->defender;
            const sg::Message m = uniform_unit(rng) < sender.prob_high
                                      ? sg::Message::High
                                      : sg::Message::Low;
            const sg::Action a = uniform_unit(rng) < overlay->receiver.trust_prob(m)
                                     ? sg::Action::Trust
                                     : sg::Action::NotTrust;
            receiver_total.add(overlay->utilities->receiver.at(owner, m, a));
            if (attacker_owns)
                attacker_signal_total.add(overlay->utilities->attacker.at(m, a));
            else
                defender_signal_total.add(overlay->utilities->defender.at(m, a));
            ++ei;
        }
    };

    while (di < defender_times.size() || ai < attacker_times.size()) {
        const double td = di < defender_times.size() ? defender_times[di] : kInfinity;
        const double ta = ai < attacker_times.size() ? attacker_times[ai] : kInfinity;
        const double t = std::min(td, ta);
        if (overlay != nullptr) sample_epochs_before(t);
        if (attacker_owns) attacker_time.add(t - prev);
        const bool defender_moves = td == t;
        const bool attacker_moves = ta == t;
        if (defender_moves && attacker_moves)
            attacker_owns = config.tie_break == TieBreak::AttackerWins;
        else
            attacker_owns = attacker_moves;
        if (defender_moves) ++di;
        if (attacker_moves) ++ai;
        prev = t;
    }
    if (overlay != nullptr) sample_epochs_before(horizon + 1.0);
    if (attacker_owns) attacker_time.add(horizon - prev);

    result.attacker_share = attacker_time.value() / horizon;
    result.rate_defender = static_cast<double>(defender_times.size()) / horizon;
    result.rate_attacker = static_cast<double>(attacker_times.size()) / horizon;

    if (overlay == nullptr) {
        result.payoff_defender = config.params.value_defender * (1.0 - result.attacker_share) -
                                 config.params.move_cost_defender * result.rate_defender;
        result.payoff_attacker = config.params.value_attacker * result.attacker_share -
                                 config.params.move_cost_attacker * result.rate_attacker;
    } else {
        const double n = epochs.empty() ? 1.0 : static_cast<double>(epochs.size());
        result.payoff_defender = defender_signal_total.value() / n -
                                 config.params.move_cost_defender * result.rate_defender;
        result.payoff_attacker = attacker_signal_total.value() / n -
                                 config.params.move_cost_attacker * result.rate_attacker;
        result.receiver_mean = receiver_total.value() / n;
    }
    return result;
}

class Aggregator {
public:
    void add(double x) {
        sum_.add(x);
        sum_sq_.add(x * x);
        ++n_;
    }
    Estimate estimate() const {
        Estimate e;
        const double n = static_cast<double>(n_);
        e.mean = sum_.value() / n;
        if (n_ > 1) {
            const double variance =
                std::max(0.0, (sum_sq_.value() / n - e.mean * e.mean) * n / (n - 1.0));
            e.std_error = std::sqrt(variance / n);
        }
        return e;
    }

private:
    KahanSum sum_;
    KahanSum sum_sq_;
    int n_ = 0;
};

SimulationReport run_simulation(const SimulationConfig& config, const SignalingOverlay* overlay) {
    Aggregator p_agg, rate_d_agg, rate_a_agg, pay_d_agg, pay_a_agg, recv_agg;
    std::uint64_t seed_state = config.seed;
    for (int rep = 0; rep < config.replications; ++rep) {
        const std::uint64_t rep_seed = splitmix64(seed_state);
        const ReplicationResult r = run_replication(config, overlay, rep_seed);
        p_agg.add(r.attacker_share);
        rate_d_agg.add(r.rate_defender);
        rate_a_agg.add(r.rate_attacker);
        pay_d_agg.add(r.payoff_defender);
        pay_a_agg.add(r.payoff_attacker);
        if (overlay != nullptr) recv_agg.add(r.receiver_mean);
    }

    SimulationReport report;
    report.empirical_p = p_agg.estimate();
    report.move_rate_defender = rate_d_agg.estimate();
    report.move_rate_attacker = rate_a_agg.estimate();
    report.payoff_defender = pay_d_agg.estimate();
    report.payoff_attacker = pay_a_agg.estimate();
    if (overlay != nullptr) report.receiver_mean = recv_agg.estimate();
    report.replications = config.replications;
    report.horizon = config.horizon;
    return report;
}

}  // namespace

std::vector<std::string> SimulationConfig::validate() const {
    if (horizon <= 0.0) throw std::invalid_argument("simulation horizon must be positive");
    if (replications <= 0) throw std::invalid_argument("replications must be positive");
    if (profile.freq_defender < 0.0 || profile.freq_attacker < 0.0)
        throw std::invalid_argument("move frequencies must be non-negative");
    if (profile.attacker_single_move && profile.freq_attacker != 0.0)
        throw std::invalid_argument("a single-move attacker must have zero frequency");
    if (epoch_rate <= 0.0) throw std::invalid_argument("epoch rate must be positive");

    std::vector<std::string> warnings;
    const auto check_period = [&](double freq, const char* who) {
        if (freq > 0.0 && horizon < 10.0 / freq)
            warnings.push_back(std::string("horizon is short relative to the ") + who +
                               " move period; estimates will be noisy");
    };
    check_period(profile.freq_defender, "defender");
    check_period(profile.freq_attacker, "attacker");
    return warnings;
}

SimulationReport simulate_flipit(const SimulationConfig& config) {
    config.validate();
    return run_simulation(config, nullptr);
}

SimulationReport simulate_cloudcontrol(const SimulationConfig& config,
                                       const gestalt::GestaltSolution& solution) {
    if (!solution.certified)
        throw std::invalid_argument("full replay requires a certified solution");
    if (!config.game.has_value())
        throw std::invalid_argument("full replay requires the game in the configuration");

    SimulationConfig effective = config;
    effective.profile = solution.flip.profile;
    effective.params = {config.game->move_cost_defender, config.game->move_cost_attacker,
                        solution.utility_defender, solution.utility_attacker};
    effective.validate();

    SignalingOverlay overlay;
    overlay.defender = solution.pbe.defender_strategy;
    overlay.attacker = solution.pbe.attacker_strategy;
    overlay.receiver = solution.pbe.receiver_strategy;
    overlay.utilities = &config.game->signaling_utilities;
    overlay.epoch_rate = config.epoch_rate;
    return run_simulation(effective, &overlay);
}

}  // namespace cloudcontrol::simulate
