#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sev/game.hpp"
#include "sev/geometry.hpp"

namespace sev {

/// Obstacle corner: locally the intersection of the half planes
/// (x - corner) . v_i < 0 with v_i = (cos theta_i, sin theta_i), inside the
/// ball of radius r. Requires -pi/2 <= theta1 < theta2 < pi/2.
struct CornerSpec {
  Vec2 corner;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double r = 1.0;

  void validate() const;
};

/// Position of the game in polar coordinates about the corner. theta_E and
/// theta_P are the raw angles in (-pi, pi]; gap() is the angular separation
/// of the sight line measured through the free region, which reaches pi
/// exactly on the target boundary. `mirrored` records that the configuration
/// was reflected to match the orientation convention of the closed form.
struct PolarState {
  double d_E = 0.0;
  double theta_E = 0.0;
  double d_P = 0.0;
  double theta_P = 0.0;
  double d_underbar = 0.0;
  bool on_boundary = false;
  bool mirrored = false;

  double gap() const;
};

/// Polar coordinates of a state whose relevant horizons both sit at the
/// corner of the polygon. Throws when a horizon is elsewhere, the angular
/// ranges of the corner assumption fail in both orientations, or the
/// separation exceeds pi (occluded).
PolarState to_polar(const GameState& state, const CornerSpec& spec,
                    const ConvexPolygon& obs);

/// Largest t0 satisfying both smallness conditions: the distance condition
/// dist/(2 gamma) and corner pinning of the horizons for every reachable
/// vantage, checked on 256 sampled directions.
double t0_corner(const PolarState& ps, const GameState& state,
                 const CornerSpec& spec, const ConvexPolygon& obs,
                 const Speeds& sp);

/// Closed-form separation function at a corner:
///   S(t) = gap + arcsin(gamma_e t / d_E) - arcsin(gamma_p t / d_P).
/// Throws when an arcsine argument leaves [0, 1].
double S_corner(double t, const PolarState& ps, const Speeds& sp);

/// Value by the corner representation formula: the smallest t in [0, t0]
/// with S(t) = pi (grid bracket over 1024 cells, then bisection), or nullopt
/// when S stays below pi, in which case the value is at least t0.
std::optional<double> value_corner(const PolarState& ps, const Speeds& sp,
                                   double t0);

/// Two-sided corner estimates. On the side gamma_e d_P <= gamma_p d_E the
/// value is at least t0 (upper bound unavailable from this analysis); on the
/// other side the value is at most (pi - gap) / (gamma_e/d_E - gamma_p/d_P),
/// valid when gap >= pi - t0 (gamma_e/d_E - gamma_p/d_P).
struct CornerBounds {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool upper_valid = false;
  bool evader_side = false;  // true when gamma_e d_P > gamma_p d_E
};
CornerBounds corner_bounds(const PolarState& ps, const Speeds& sp, double t0);

/// Membership test for the semi-permeable barrier gamma_e d_P = gamma_p d_E
/// within the corner's angular validity region.
bool barrier_membership(const PolarState& ps, const Speeds& sp, double tol);

/// Opponent control in polar components, |.| <= 1.
struct PolarControl {
  double radial = 0.0;
  double angular = 0.0;
};

enum class BarrierDefender { Evader, Pursuer };

struct BarrierSimResult {
  struct Row {
    double t, d_E, theta_E, d_P, theta_P, drift;
  };
  std::vector<Row> trajectory;
  double max_drift = 0.0;
  bool clamped = false;  // a radial push toward the corner was cut short
};

/// Simulates the radial-mimic barrier strategy: the defender copies the
/// opponent's radial control with a one-step delay (the discrete realisation
/// of a non-anticipating strategy) while both players' polar dynamics are
/// integrated with explicit Euler. Reports max_t |gamma_e d_P - gamma_p d_E|,
/// which is zero for a radially passive opponent and O(dt) in general.
/// Throws when the initial state is off the barrier, an opponent control
/// exceeds the unit ball, or the trajectory leaves the corner-pinned region.
BarrierSimResult barrier_mimic_simulate(
    const PolarState& ps, const Speeds& sp, const CornerSpec& spec,
    const std::function<PolarControl(double)>& opponent, BarrierDefender defender,
    double dt, double T, double barrier_tol = 1e-9);

}  // namespace sev
