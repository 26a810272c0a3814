#include "cloudcontrol/gestalt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cloudcontrol/errors.hpp"

namespace cloudcontrol::gestalt {

namespace {

namespace sg = cloudcontrol::signaling;
namespace fi = cloudcontrol::flipit;

struct MapValue {
    sg::PBEProfile pbe;
    double control = 0.0;  // composed map output at the evaluated prior
};

MapValue evaluate_selected(double p, const CloudControlGame& game) {
    const auto candidates =
        sg::enumerate_pbe(game.signaling_utilities, p, game.zero_tolerance);
    const sg::TrustBenefits tb = sg::trust_benefits(game.signaling_utilities, p);
    try {
        const sg::PBEProfile& chosen = sg::select_equilibrium(
            candidates, tb, sg::SelectionPolicy::PaperSelection, game.zero_tolerance);
        const double control =
            fi::t_f(chosen.utility_defender, chosen.utility_attacker,
                    game.move_cost_defender, game.move_cost_attacker);
        return {chosen, control};
    } catch (const NoSelectionError& e) {
        throw NoSelectionError(e.reason(), p);
    }
}

fi::FlipItEquilibrium flip_at(const sg::PBEProfile& pbe, const CloudControlGame& game) {
    return fi::nash_equilibrium({game.move_cost_defender, game.move_cost_attacker,
                                 pbe.utility_defender, pbe.utility_attacker});
}

GestaltSolution make_certified(double p, const sg::PBEProfile& pbe,
                               const CloudControlGame& game) {
    GestaltSolution s;
    s.p_dagger = p;
    s.utility_defender = pbe.utility_defender;
    s.utility_attacker = pbe.utility_attacker;
    s.pbe = pbe;
    s.flip = flip_at(pbe, game);
    s.certified = true;
    return s;
}

/// Region boundaries of the composed map: the priors where a trust benefit
/// changes sign. The selected equilibrium (and hence the map value) is
/// constant on each open interval between consecutive knots.
std::vector<double> knot_points(const CloudControlGame& game) {
    std::vector<double> knots{0.0, 1.0};
    if (auto c = sg::tb_high_crossing(game.signaling_utilities)) knots.push_back(*c);
    if (auto c = sg::tb_low_crossing(game.signaling_utilities)) knots.push_back(*c);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    return knots;
}

std::vector<double> scan_points(const CloudControlGame& game, int resolution) {
    std::vector<double> points;
    points.reserve(static_cast<size_t>(resolution) + 4);
    for (int i = 0; i < resolution; ++i)
        points.push_back(static_cast<double>(i) / (resolution - 1));
    for (double k : knot_points(game)) points.push_back(k);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

void append_unique(std::vector<GestaltSolution>& out, GestaltSolution s, double tol) {
    for (const GestaltSolution& existing : out) {
        if (existing.certified == s.certified &&
            std::abs(existing.p_dagger - s.p_dagger) <= 2.0 * tol &&
            existing.pbe.id == s.pbe.id)
            return;
    }
    out.push_back(std::move(s));
}

std::vector<GestaltSolution> scan_selected(const CloudControlGame& game) {
    const double tol = game.fixed_point_tolerance;
    std::vector<GestaltSolution> out;

    // Exact evaluations at the grid and region knots. Knots are scan points,
    // so no cell straddles a region boundary in its interior.
    const std::vector<double> points = scan_points(game, game.grid_resolution);
    std::vector<MapValue> values;
    values.reserve(points.size());
    for (double p : points) values.push_back(evaluate_selected(p, game));

    const std::vector<double> knots = knot_points(game);
    const auto is_knot = [&knots](double p) {
        return std::binary_search(knots.begin(), knots.end(), p);
    };

    // Fixed points hit exactly by an evaluation point.
    for (size_t i = 0; i < points.size(); ++i) {
        if (std::abs(values[i].control - points[i]) <= tol)
            append_unique(out, make_certified(points[i], values[i].pbe, game), tol);
    }

    // Per-cell bisection. At knot endpoints the map value of the cell's
    // interior (one-sided limit) replaces the exact-point value, because the
    // axis selection rule can differ at the knot itself.
    for (size_t i = 0; i + 1 < points.size(); ++i) {
        const double lo = points[i];
        const double hi = points[i + 1];
        double t_lo = values[i].control;
        double t_hi = values[i + 1].control;
        if (is_knot(lo) || is_knot(hi)) {
            const MapValue interior = evaluate_selected(0.5 * (lo + hi), game);
            if (is_knot(lo)) t_lo = interior.control;
            if (is_knot(hi)) t_hi = interior.control;
        }
        const double g_lo = t_lo - lo;
        const double g_hi = t_hi - hi;
        if (g_lo * g_hi >= 0.0) continue;  // exact zeros were caught above

        double a = lo;
        double b = hi;
        double ga = g_lo;
        for (int iter = 0; iter < 200 && (b - a) > tol; ++iter) {
            const double mid = 0.5 * (a + b);
            const double gm = evaluate_selected(mid, game).control - mid;
            if (gm == 0.0) {
                a = b = mid;
                break;
            }
            if ((ga > 0.0) == (gm > 0.0)) {
                a = mid;
                ga = gm;
            } else {
                b = mid;
            }
        }
        const double root = 0.5 * (a + b);
        const MapValue at_root = evaluate_selected(root, game);
        if (std::abs(at_root.control - root) <= tol)
            append_unique(out, make_certified(root, at_root.pbe, game), tol);
    }

    // Jumps: where the one-sided map values straddle the diagonal at a region
    // boundary with no exact fixed point there, report an uncertified
    // candidate carrying both one-sided utility pairs.
    for (double c : knots) {
        if (c <= 0.0 || c >= 1.0) continue;
        const auto at_c = evaluate_selected(c, game);
        if (std::abs(at_c.control - c) <= tol) continue;  // certified above
        const auto left_it = std::lower_bound(points.begin(), points.end(), c);
        if (left_it == points.begin() || left_it + 1 == points.end()) continue;
        const double left_p = 0.5 * (*(left_it - 1) + c);
        const double right_p = 0.5 * (c + *(left_it + 1));
        const MapValue left = evaluate_selected(left_p, game);
        const MapValue right = evaluate_selected(right_p, game);
        const double g_left = left.control - c;
        const double g_right = right.control - c;
        if ((g_left > 0.0 && g_right < 0.0) || (g_left < 0.0 && g_right > 0.0)) {
            GestaltSolution s;
            s.p_dagger = c;
            s.utility_defender = at_c.pbe.utility_defender;
            s.utility_attacker = at_c.pbe.utility_attacker;
            s.pbe = at_c.pbe;
            s.flip = flip_at(at_c.pbe, game);
            s.certified = false;
            s.left_utilities = {{left.pbe.utility_defender, left.pbe.utility_attacker}};
            s.right_utilities = {{right.pbe.utility_defender, right.pbe.utility_attacker}};
            append_unique(out, std::move(s), tol);
        }
    }

    std::sort(out.begin(), out.end(), [](const GestaltSolution& a, const GestaltSolution& b) {
        return a.p_dagger < b.p_dagger;
    });
    return out;
}

/// Enumerate policy: every equilibrium branch is a constant map on each
/// region, so each branch contributes a fixed point wherever its value lands
/// inside a region where the branch exists.
std::vector<GestaltSolution> scan_branches(const CloudControlGame& game) {
    const double tol = game.fixed_point_tolerance;
    std::vector<GestaltSolution> out;
    const std::vector<double> knots = knot_points(game);

    const auto try_point = [&](double p_target, sg::EquilibriumId id) {
        const auto candidates =
            sg::enumerate_pbe(game.signaling_utilities, p_target, game.zero_tolerance);
        for (const sg::PBEProfile& cand : candidates) {
            if (cand.id != id) continue;
            const double mapped =
                fi::t_f(cand.utility_defender, cand.utility_attacker,
                        game.move_cost_defender, game.move_cost_attacker);
            if (std::abs(mapped - p_target) <= tol)
                append_unique(out, make_certified(p_target, cand, game), tol);
        }
    };

    for (size_t i = 0; i + 1 < knots.size(); ++i) {
        const double rep = 0.5 * (knots[i] + knots[i + 1]);
        const auto candidates =
            sg::enumerate_pbe(game.signaling_utilities, rep, game.zero_tolerance);
        for (const sg::PBEProfile& cand : candidates) {
            const double mapped =
                fi::t_f(cand.utility_defender, cand.utility_attacker,
                        game.move_cost_defender, game.move_cost_attacker);
            if (mapped > knots[i] && mapped < knots[i + 1]) try_point(mapped, cand.id);
        }
    }
    // Branch fixed points sitting exactly on a knot or interval endpoint.
    for (double k : knots) {
        const auto candidates =
            sg::enumerate_pbe(game.signaling_utilities, k, game.zero_tolerance);
        for (const sg::PBEProfile& cand : candidates) try_point(k, cand.id);
    }

    std::sort(out.begin(), out.end(), [](const GestaltSolution& a, const GestaltSolution& b) {
        return a.p_dagger != b.p_dagger ? a.p_dagger < b.p_dagger : a.pbe.id < b.pbe.id;
    });
    return out;
}

}  // namespace

double composite_map(double p, const CloudControlGame& game) {
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("prior must lie in [0, 1]");
    const auto [value_d, value_a] =
        sg::t_s(p, game.signaling_utilities, game.selection_policy, game.zero_tolerance);
    return fi::t_f(value_d, value_a, game.move_cost_defender, game.move_cost_attacker);
}

std::vector<GestaltSolution> scan_fixed_points(const CloudControlGame& game) {
    if (game.grid_resolution < 100)
        throw std::invalid_argument("grid resolution must be at least 100");
    if (game.fixed_point_tolerance <= 0.0)
        throw std::invalid_argument("fixed-point tolerance must be positive");
    if (game.selection_policy == sg::SelectionPolicy::Enumerate)
        return scan_branches(game);
    return scan_selected(game);
}

std::vector<CurveSample> curve_export(const CloudControlGame& game) {
    const std::vector<double> points = scan_points(game, game.grid_resolution);
    std::vector<CurveSample> rows;
    rows.reserve(points.size());
    for (double p : points) {
        const MapValue v = evaluate_selected(p, game);
        CurveSample row;
        row.p = p;
        row.utility_defender = v.pbe.utility_defender;
        row.utility_attacker = v.pbe.utility_attacker;
        const int sign_d = sign_with_tolerance(row.utility_defender, game.zero_tolerance);
        const int sign_a = sign_with_tolerance(row.utility_attacker, game.zero_tolerance);
        if (sign_d == 0)
            row.ratio = sign_a > 0 ? std::numeric_limits<double>::infinity() : 0.0;
        else
            row.ratio = row.utility_attacker / row.utility_defender;
        row.control_ratio = v.control;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace cloudcontrol::gestalt
