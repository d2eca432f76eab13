#pragma once

#include <memory>
#include <optional>

#include "sev/game.hpp"
#include "sev/geometry.hpp"

namespace sev {

enum class HorizonSideSel { Lower, Upper };

/// Parametrised smooth convex boundary used by the near-boundary analysis.
/// Either an exact circular window (closed-form tangency roots) or a sampled
/// arc table (grid bracketing + bisection). Cheap to copy.
class SmoothCurve {
 public:
  /// Circular window of arclength half-length L centred at angle phi0 of the
  /// circle. orientation = -1 flips the sign of the parameter, which swaps
  /// the roles of the lower/upper ends without moving the geometry.
  static SmoothCurve circle_window(const Circle& c, double phi0, double L,
                                   int orientation);
  static SmoothCurve table(ConvexArc arc);

  double L() const;
  double kappa0() const;
  double C_L() const;
  double kappa_max() const;

  Vec2 point(double s) const;
  Vec2 outward_normal(double s) const;
  Vec2 tangent(double s) const;
  double kappa(double s) const;

  /// (x - Sigma(s)) . n(s).
  double residual(double s, Vec2 x) const;

  /// Solves residual(s, x) = shift on the requested branch: Lower is the
  /// rising branch of the residual (hidden to visible), Upper the falling
  /// one. Returns nullopt when there is no such root inside [-L, L].
  std::optional<double> horizon_root(HorizonSideSel side, double shift,
                                     Vec2 x) const;

 private:
  struct CircleFrame {
    Circle c;
    double phi0 = 0.0;
    int orient = 1;
    double L = 0.0;
  };
  // Exactly one of the two is set.
  std::optional<CircleFrame> circ_;
  std::shared_ptr<const ConvexArc> arc_;
};

/// Validated near-boundary configuration of the smooth-obstacle analysis:
/// the evader's lower horizon at s_E, the pursuer's upper horizon at s_P with
/// s_E <= s_P, the horizon distances and curvatures, and the time window
/// [0, t0] on which the representation formula is exact (players can neither
/// reach the obstacle nor push a horizon out of the parametrised window).
/// t0_bar <= t0 is the smaller window on which the envelope estimates hold;
/// it equals t0 when the curvature is constant.
struct SmoothSetup {
  GameState state;
  Speeds sp;
  SmoothCurve curve;
  double s_E = 0.0;
  double s_P = 0.0;
  double d_E = 0.0;
  double d_P = 0.0;
  double kappa_E = 0.0;
  double kappa_P = 0.0;
  double t0 = 0.0;
  double t0_bar = 0.0;
  double S0 = 0.0;  // s_P - s_E, clamped at zero
};

/// Analytical value estimates with their validity flags.
/// d_star and C_star_or_C hold (d*, C*) for the constant-curvature bounds and
/// (d*_kappa, C(E,P)) for the curvature-weighted ones.
struct ValueBounds {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool lower_valid = false;
  bool upper_valid = false;
  double delta = 0.0;
  double epsilon = 0.0;
  double d_star = 0.0;
  double C_star_or_C = 0.0;
  double S0 = 0.0;
};

/// Builds the setup from a visible state and a Circle or ConvexArc obstacle.
/// Circles are lifted to an exact circular window oriented so that s_E <= s_P.
/// t0 is the largest time passing both smallness conditions: the distance
/// condition dist/(2 gamma) and horizon containment, the latter checked by
/// sampling 256 directions on the reachable circle. Throws when the state is
/// occluded, a needed horizon is off the arc, or s_E > s_P (mis-oriented).
SmoothSetup build_setup(const GameState& state, const Obstacle& obs,
                        const Speeds& sp);

/// Largest horizon parameter reachable by time t from the vantage point:
/// the root of the tangency residual shifted by +speed*t on the lower branch
/// (evader side) or -speed*t on the upper branch (pursuer side). Throws if
/// the root leaves the parametrised window.
double max_horizon_param(Vec2 vantage, double speed, double t,
                         HorizonSideSel side, const SmoothSetup& setup);

/// Horizon-separation function S(t) = max_v s_P(t,v) - max_v s_E(t,v).
/// S(0) = S0; the game ends inside [0, t0] exactly when S reaches zero.
double S_of_t(double t, const SmoothSetup& setup);

/// Value by the representation formula: the smallest root of S on [0, t0]
/// (absolute tolerance 1e-10 * t0), or nullopt when S stays positive, in
/// which case the value exceeds t0. A state already on the boundary returns
/// zero.
std::optional<double> value_by_representation(const SmoothSetup& setup);

/// First strictly positive root of S, skipping the t = 0 root of on-boundary
/// states. This is the boundary-profile limit of the value for states on the
/// non-usable side. nullopt when S never comes back to zero on (0, t0].
std::optional<double> profile_value(const SmoothSetup& setup);

/// Horizon parameter paths along straight trajectories E(tau) = E + tau g_e
/// v_E, P(tau) = P + tau g_p v_P, integrating the visibility-horizon ODE
/// s' = -/+ (xdot . n(s)) / (kappa(s) |Sigma(s) - x|) with classical RK4.
struct HorizonPaths {
  std::vector<double> tau;
  std::vector<double> s_E;
  std::vector<double> s_P;
};
HorizonPaths integrate_horizons(const SmoothSetup& setup, Vec2 v_E, Vec2 v_P,
                                double t_end, int n_steps);

/// Curvature-weighted bounds:
///   lower: V >= min( d*_k / ((1+delta+eps) C), delta t0_bar )
///   upper: V <= (sqrt(S0) + d*_k) / ((1-eps-delta) C)
/// valid when C_L <= (eps kappa0^3 t0 / 2) min(g_e/(k_E^2 d_E^2),
/// g_p/(k_P^2 d_P^2)); the upper flag additionally needs t* <= delta t0_bar
/// and sqrt(S0) <= t*. Requires delta in (0, 1 - eps).
ValueBounds value_bounds_smooth(const SmoothSetup& setup, double delta,
                                double epsilon);

/// Constant-curvature comparison bounds with d* = (g_p/d_P - g_e/d_E)+ and
/// C* = 2 d_P^3 d_E^3 / (d_E^3 g_p^2 + d_P^3 g_e^2):
///   lower: V >= min( kappa0 C* d* / (1+delta), delta t0_bar )
///   upper: V <= (kappa0 + L C_L)/(1-delta) C* ((kappa0 + L C_L) sqrt(S0) + d*)
/// The upper flag needs delta >= 1 - (kappa0 + L C_L)^2 C* and t* <= delta
/// t0_bar. Requires delta in (0, 1).
ValueBounds value_bounds_kconst(const SmoothSetup& setup, double delta);

/// Bracketing slopes of the boundary profile V vs d* below the validity
/// threshold d0: [kappa0 C*/(1+delta), (kappa0 + L C_L) C*/(1-delta)], or the
/// sharp first-order slopes [kappa0 C*, (kappa0 + L C_L) C*] with a quadratic
/// correction when kappa0^2 >= 1/C*. Throws if d_star_max >= d0.
struct ProfileSlopes {
  double slope_low = 0.0;
  double slope_high = 0.0;
  bool sharp = false;
  double d0 = 0.0;
};
ProfileSlopes boundary_profile(const SmoothSetup& setup, double delta,
                               double d_star_max);

}  // namespace sev
