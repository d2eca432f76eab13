#pragma once

#include <utility>

#include "sev/geometry.hpp"

namespace sev {

/// Maximum speeds of the two players.
struct Speeds {
  double gamma_e = 1.0;
  double gamma_p = 1.0;
};

/// Positions of evader and pursuer, both outside the open obstacle.
struct GameState {
  Vec2 E;
  Vec2 P;
};

enum class BoundaryLabel { Usable, NonUsable, Interface, NotOnBoundary };

/// Result of the usable-part test on (or near) the target boundary.
/// `margin` is gamma_e/d_E - gamma_p/d_P at the tangency point; its sign
/// decides the label, Interface within interface_tol of zero.
struct Classification {
  BoundaryLabel label = BoundaryLabel::NotOnBoundary;
  double margin = 0.0;
  Vec2 tangency;
  double d_E = 0.0;
  double d_P = 0.0;
};

/// Isotropic Hamiltonian gamma_e |rho_E| - gamma_p |rho_P|.
double hamiltonian_iso(Vec2 rho_E, Vec2 rho_P, const Speeds& sp);

/// Gradient blocks (gamma_e rho_E/|rho_E|, -gamma_p rho_P/|rho_P|).
/// Throws if either block vanishes (not differentiable there).
std::pair<Vec2, Vec2> hamiltonian_iso_grad(Vec2 rho_E, Vec2 rho_P,
                                           const Speeds& sp);

/// Occlusion test: the sight segment [E, P] meets the obstacle.
bool in_target(const GameState& state, const Obstacle& obs);

/// Signed proximity of the state to the target boundary: clearance of the
/// segment [E, P] to the obstacle, positive while visible.
double boundary_gap(const GameState& state, const Obstacle& obs);

/// Classifies a near-tangent state into the usable / non-usable part of the
/// target boundary via the speed-distance ratio criterion. Throws when the
/// segment grazes the obstacle at more than one spot (ambiguous tangency).
Classification classify_boundary(const GameState& state, const Obstacle& obs,
                                 const Speeds& sp, double boundary_tol,
                                 double interface_tol);

/// Finite-horizon value from the stationary one: min(t, V_inf).
double finite_horizon_value(double t, double V_inf);

}  // namespace sev
