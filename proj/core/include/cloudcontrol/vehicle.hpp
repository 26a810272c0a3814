#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "cloudcontrol/signaling.hpp"

namespace cloudcontrol::vehicle {

/// Linearized bicycle-model parameters: fixed forward speed, distance from
/// the rear wheel to the center of gravity, and the wheelbase.
struct VehicleParams {
    double speed = 1.0;       // > 0
    double cg_to_rear = 1.0;  // > 0
    double wheelbase = 1.0;   // > 0

    bool operator==(const VehicleParams&) const = default;
};

/// Lateral deviation from the reference line and heading angle.
struct VehicleState {
    double lateral = 0.0;
    double heading = 0.0;  // radians

    bool operator==(const VehicleState&) const = default;
};

struct StateDerivative {
    double lateral_rate = 0.0;
    double heading_rate = 0.0;
};

/// State-feedback gains of the on-board controller.
struct GainVector {
    double k1 = 1.0;  // per distance
    double k2 = 1.0;  // dimensionless

    bool operator==(const GainVector&) const = default;
};

/// Right-hand side of the linearized lateral dynamics for a steering angle.
StateDerivative dynamics_derivative(const VehicleState& state,
                                    double steering,
                                    const VehicleParams& params);

/// On-board proportional control: steer against the measured state.
double feedback_control(const VehicleState& state, const GainVector& gains);

struct ClosedLoop {
    std::array<std::array<double, 2>, 2> matrix{};
    std::array<std::complex<double>, 2> eigenvalues{};
    bool stable = false;  // both eigenvalue real parts strictly negative
};

/// Closed-loop system matrix A - B*K and its eigenvalues from the quadratic
/// characteristic polynomial.
ClosedLoop closed_loop_matrix(const VehicleParams& params, const GainVector& gains);

/// Classifies a cloud command against the on-board command: high risk when
/// the absolute difference exceeds the threshold, low risk at or below it.
signaling::Message risk_filter(double delta_cloud, double delta_car, double threshold);

/// The command shapes a cloud occupant can issue. The model fixes none, so
/// three canonical sources ship: echo the on-board command, echo it with
/// bounded uniform noise, or offset it by a constant.
enum class CloudSourceKind { Faithful, NoisyBenign, AdversarialOffset };

const char* to_string(CloudSourceKind k);

struct CloudCommandSource {
    CloudSourceKind kind = CloudSourceKind::Faithful;
    double offset = 0.0;       // AdversarialOffset: added to the on-board command
    double noise_bound = 0.0;  // NoisyBenign: uniform noise amplitude

    bool operator==(const CloudCommandSource&) const = default;
};

/// Per-step cloud occupancy: the attacker issues with the given probability,
/// the defender otherwise, each through its own command source.
struct CloudSchedule {
    CloudCommandSource defender_source;
    CloudCommandSource attacker_source;
    double attacker_probability = 0.0;

    bool operator==(const CloudSchedule&) const = default;
};

struct TrajectoryConfig {
    double dt = 1e-3;    // > 0 and <= 0.1 * wheelbase / speed
    double horizon = 10.0;
    std::uint64_t seed = 0;
    double small_angle_bound = 0.3;   // linearization validity monitor, radians
    double divergence_bound = 1e6;    // state bound; beyond it the run aborts
};

struct TrajectoryStep {
    double t = 0.0;
    VehicleState state;           // state at t, before integrating this step
    double delta_car = 0.0;
    double delta_cloud = 0.0;
    double applied = 0.0;
    signaling::Message message = signaling::Message::Low;
    signaling::Action action = signaling::Action::NotTrust;
    signaling::CloudType owner = signaling::CloudType::Defender;
    bool small_angle_ok = true;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    VehicleState final_state;
};

/// Closed-loop run under the trust policy: each step computes the on-board
/// command, samples the cloud occupant and its command, classifies the risk,
/// samples the device's action, and integrates one fixed RK4 step with the
/// applied steering held constant. Throws DivergenceError when the state
/// leaves the configured bound.
Trajectory simulate_trajectory(const VehicleState& initial,
                               const VehicleParams& params,
                               const GainVector& gains,
                               double threshold,
                               const signaling::ReceiverStrategy& receiver,
                               const CloudSchedule& schedule,
                               const TrajectoryConfig& config);

}  // namespace cloudcontrol::vehicle
