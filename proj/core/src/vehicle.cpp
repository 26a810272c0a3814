#include "cloudcontrol/vehicle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "cloudcontrol/errors.hpp"
#include "cloudcontrol/numeric.hpp"

namespace cloudcontrol::vehicle {

namespace sg = cloudcontrol::signaling;

const char* to_string(CloudSourceKind k) {
    switch (k) {
        case CloudSourceKind::Faithful: return "faithful";
        case CloudSourceKind::NoisyBenign: return "noisy_benign";
        case CloudSourceKind::AdversarialOffset: return "adversarial_offset";
    }
    return "?";
}

StateDerivative dynamics_derivative(const VehicleState& state,
                                    double steering,
                                    const VehicleParams& params) {
    const double v0 = params.speed;
    const double a = params.cg_to_rear;
    const double b = params.wheelbase;
    return {v0 * state.heading + (a * v0 / b) * steering, (v0 / b) * steering};
}

double feedback_control(const VehicleState& state, const GainVector& gains) {
    return -(gains.k1 * state.lateral + gains.k2 * state.heading);
}

ClosedLoop closed_loop_matrix(const VehicleParams& params, const GainVector& gains) {
    const double v0 = params.speed;
    const double b1 = params.cg_to_rear * v0 / params.wheelbase;
    const double b2 = v0 / params.wheelbase;

    ClosedLoop loop;
    loop.matrix = {{{-b1 * gains.k1, v0 - b1 * gains.k2},
                    {-b2 * gains.k1, -b2 * gains.k2}}};

    const double trace = loop.matrix[0][0] + loop.matrix[1][1];
    const double det = loop.matrix[0][0] * loop.matrix[1][1] -
                       loop.matrix[0][1] * loop.matrix[1][0];
    const double half_trace = 0.5 * trace;
    const double discriminant = half_trace * half_trace - det;
    if (discriminant >= 0.0) {
        const double root = std::sqrt(discriminant);
        loop.eigenvalues = {std::complex<double>(half_trace - root, 0.0),
                            std::complex<double>(half_trace + root, 0.0)};
    } else {
        const double imag = std::sqrt(-discriminant);
        loop.eigenvalues = {std::complex<double>(half_trace, -imag),
                            std::complex<double>(half_trace, imag)};
    }
    loop.stable = loop.eigenvalues[0].real() < 0.0 && loop.eigenvalues[1].real() < 0.0;
    return loop;
}

sg::Message risk_filter(double delta_cloud, double delta_car, double threshold) {
    if (threshold < 0.0) throw std::invalid_argument("threshold must be non-negative");
    return std::abs(delta_cloud - delta_car) > threshold ? sg::Message::High
                                                         : sg::Message::Low;
}

namespace {

VehicleState rk4_step(const VehicleState& x,
                      double steering,
                      const VehicleParams& params,
                      double dt) {
    const auto f = [&](const VehicleState& s) { return dynamics_derivative(s, steering, params); };
    const auto advance = [](const VehicleState& s, const StateDerivative& d, double h) {
        return VehicleState{s.lateral + h * d.lateral_rate, s.heading + h * d.heading_rate};
    };
    const StateDerivative k1 = f(x);
    const StateDerivative k2 = f(advance(x, k1, 0.5 * dt));
    const StateDerivative k3 = f(advance(x, k2, 0.5 * dt));
    const StateDerivative k4 = f(advance(x, k3, dt));
    return {x.lateral + dt / 6.0 *
                            (k1.lateral_rate + 2.0 * k2.lateral_rate + 2.0 * k3.lateral_rate +
                             k4.lateral_rate),
            x.heading + dt / 6.0 *
                            (k1.heading_rate + 2.0 * k2.heading_rate + 2.0 * k3.heading_rate +
                             k4.heading_rate)};
}

double cloud_command(const CloudCommandSource& source, double delta_car, std::mt19937_64& rng) {
    switch (source.kind) {
        case CloudSourceKind::Faithful:
            return delta_car;
        case CloudSourceKind::NoisyBenign:
            return delta_car + (2.0 * uniform_unit(rng) - 1.0) * source.noise_bound;
        case CloudSourceKind::AdversarialOffset:
            return delta_car + source.offset;
    }
    return delta_car;
}

}  // namespace

Trajectory simulate_trajectory(const VehicleState& initial,
                               const VehicleParams& params,
                               const GainVector& gains,
                               double threshold,
                               const sg::ReceiverStrategy& receiver,
                               const CloudSchedule& schedule,
                               const TrajectoryConfig& config) {
    if (config.dt <= 0.0) throw std::invalid_argument("dt must be positive");
    if (config.dt > 0.1 * params.wheelbase / params.speed)
        throw std::invalid_argument("dt exceeds the step-size bound 0.1 * wheelbase / speed");
    if (params.speed <= 0.0 || params.wheelbase <= 0.0 || params.cg_to_rear <= 0.0)
        throw std::invalid_argument("vehicle dimensions and speed must be positive");

    std::mt19937_64 rng(config.seed);
    const auto steps = static_cast<std::int64_t>(std::llround(config.horizon / config.dt));

    Trajectory trajectory;
    trajectory.steps.reserve(static_cast<std::size_t>(steps));
    VehicleState state = initial;

    for (std::int64_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * config.dt;
        TrajectoryStep step;
        step.t = t;
        step.state = state;
        step.small_angle_ok = std::abs(state.heading) <= config.small_angle_bound;
        step.delta_car = feedback_control(state, gains);

        const bool attacker_owns = uniform_unit(rng) < schedule.attacker_probability;
        step.owner = attacker_owns ? sg::CloudType::Attacker : sg::CloudType::Defender;
        const CloudCommandSource& source =
            attacker_owns ? schedule.attacker_source : schedule.defender_source;
        step.delta_cloud = cloud_command(source, step.delta_car, rng);
        step.message = risk_filter(step.delta_cloud, step.delta_car, threshold);

        const bool trusts = uniform_unit(rng) < receiver.trust_prob(step.message);
        step.action = trusts ? sg::Action::Trust : sg::Action::NotTrust;
        step.applied = trusts ? step.delta_cloud : step.delta_car;

        state = rk4_step(state, step.applied, params, config.dt);
        trajectory.steps.push_back(step);

        const double norm = std::hypot(state.lateral, state.heading);
        if (!(norm <= config.divergence_bound))
            throw DivergenceError(t + config.dt, norm);
    }
    trajectory.final_state = state;
    return trajectory;
}

}  // namespace cloudcontrol::vehicle
