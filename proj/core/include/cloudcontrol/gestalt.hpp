#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cloudcontrol/flipit.hpp"
#include "cloudcontrol/numeric.hpp"
#include "cloudcontrol/signaling.hpp"

namespace cloudcontrol::gestalt {

/// The coupled game: a signaling stage parameterized by the control ratio,
/// and a takeover stage whose move values come from the signaling equilibrium.
struct CloudControlGame {
    signaling::SignalingUtilities signaling_utilities;
    double move_cost_defender = 0.0;
    double move_cost_attacker = 0.0;
    signaling::SelectionPolicy selection_policy = signaling::SelectionPolicy::PaperSelection;
    signaling::Belief off_path_policy{1.0, 1.0};
    int grid_resolution = 1001;  // number of scan points, >= 100
    double fixed_point_tolerance = kDefaultFixedPointTolerance;
    double zero_tolerance = kDefaultZeroTolerance;

    bool operator==(const CloudControlGame&) const = default;
};

/// A fixed point of the composed maps, or an uncertified candidate at a jump
/// between equilibrium regions. Certified solutions satisfy
/// |composite_map(p) - p| <= fixed_point_tolerance. Uncertified candidates
/// carry the one-sided utility pairs on either side of the jump.
struct GestaltSolution {
    double p_dagger = 0.0;
    double utility_defender = 0.0;
    double utility_attacker = 0.0;
    signaling::PBEProfile pbe;
    flipit::FlipItEquilibrium flip;
    bool certified = false;
    std::optional<std::pair<double, double>> left_utilities;
    std::optional<std::pair<double, double>> right_utilities;
};

/// One evaluation of the composed map: prior -> selected signaling
/// equilibrium utilities -> equilibrium control ratio. Propagates
/// NoSelectionError with the offending prior attached.
double composite_map(double p, const CloudControlGame& game);

/// Locates Gestalt equilibria over the prior interval. The composed map is
/// piecewise constant between trust-benefit sign changes, so the scan walks
/// a uniform grid augmented with the exact crossing priors, bisects every
/// in-segment sign change of g(p) = composite_map(p) - p, and reports jumps
/// of g across region boundaries as uncertified candidates. An empty result
/// is a legitimate outcome. Under the Enumerate policy every equilibrium
/// branch is scanned separately and all branch fixed points are reported.
std::vector<GestaltSolution> scan_fixed_points(const CloudControlGame& game);

/// One row of the exported curve table: the selected utilities and their
/// attacker/defender ratio at a prior, plus the control ratio the takeover
/// stage maps them to. A zero utility pair records ratio 0; a zero defender
/// value with positive attacker value records +infinity.
struct CurveSample {
    double p = 0.0;
    double utility_defender = 0.0;
    double utility_attacker = 0.0;
    double ratio = 0.0;
    double control_ratio = 0.0;
};

std::vector<CurveSample> curve_export(const CloudControlGame& game);

}  // namespace cloudcontrol::gestalt
