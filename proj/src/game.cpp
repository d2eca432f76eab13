#include "sev/game.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace sev {

double hamiltonian_iso(Vec2 rho_E, Vec2 rho_P, const Speeds& sp) {
  return sp.gamma_e * norm(rho_E) - sp.gamma_p * norm(rho_P);
}

std::pair<Vec2, Vec2> hamiltonian_iso_grad(Vec2 rho_E, Vec2 rho_P,
                                           const Speeds& sp) {
  const double ne = norm(rho_E), np = norm(rho_P);
  if (ne == 0.0 || np == 0.0)
    throw std::domain_error("hamiltonian_iso_grad: gradient undefined at zero block");
  return {sp.gamma_e / ne * rho_E, -sp.gamma_p / np * rho_P};
}

bool in_target(const GameState& state, const Obstacle& obs) {
  return segment_blocked(state.E, state.P, obs);
}

double boundary_gap(const GameState& state, const Obstacle& obs) {
  return segment_clearance(state.E, state.P, obs);
}

namespace {

// Grazing points of the sight segment on the obstacle boundary, within
// boundary_tol of the segment. More than one cluster means the tangency is
// ambiguous.
std::vector<Vec2> tangency_candidates(const GameState& st, const Obstacle& obs,
                                      double boundary_tol, double gap) {
  const double keep = gap + boundary_tol;
  std::vector<Vec2> pts;
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Circle>) {
          const Vec2 cp = closest_point_on_segment(o.center, st.E, st.P);
          const double d = norm(cp - o.center);
          if (d > 0.0) pts.push_back(o.center + o.radius / d * (cp - o.center));
        } else if constexpr (std::is_same_v<T, ConvexArc>) {
          for (const auto& r : o.samples)
            if (point_segment_distance(r.point, st.E, st.P) <= keep)
              pts.push_back(r.point);
        } else {
          for (std::size_t i = 0; i < o.size(); ++i) {
            const Vec2 v = o.vertex(i);
            if (point_segment_distance(v, st.E, st.P) <= keep) pts.push_back(v);
            // An edge can graze the segment away from both vertices.
            const Vec2 w = o.vertex(i + 1);
            for (int k = 1; k < 8; ++k) {
              const Vec2 m = v + (k / 8.0) * (w - v);
              if (point_segment_distance(m, st.E, st.P) <= keep) pts.push_back(m);
            }
          }
        }
      },
      obs);
  // Cluster by spatial proximity; distinct clusters = distinct tangencies.
  std::vector<Vec2> reps;
  const double cluster = 64.0 * boundary_tol + 1e-6 * obstacle_extent(obs);
  for (const Vec2& p : pts) {
    bool found = false;
    for (const Vec2& r : reps)
      if (norm(p - r) <= cluster) { found = true; break; }
    if (!found) reps.push_back(p);
  }
  return reps;
}

}  // namespace

Classification classify_boundary(const GameState& state, const Obstacle& obs,
                                 const Speeds& sp, double boundary_tol,
                                 double interface_tol) {
  const double gap = boundary_gap(state, obs);
  if (gap < -boundary_tol)
    throw std::invalid_argument("classify_boundary: state inside the target");
  Classification out;
  if (gap > boundary_tol) {
    out.label = BoundaryLabel::NotOnBoundary;
    return out;
  }
  const auto reps = tangency_candidates(state, obs, boundary_tol, std::max(gap, 0.0));
  if (reps.empty())
    throw std::runtime_error("classify_boundary: no tangency point found");
  if (reps.size() > 1)
    throw std::runtime_error("classify_boundary: tangent at multiple points");
  out.tangency = reps.front();
  out.d_E = norm(state.E - out.tangency);
  out.d_P = norm(state.P - out.tangency);
  out.margin = sp.gamma_e / out.d_E - sp.gamma_p / out.d_P;
  if (out.margin > interface_tol)
    out.label = BoundaryLabel::Usable;
  else if (out.margin < -interface_tol)
    out.label = BoundaryLabel::NonUsable;
  else
    out.label = BoundaryLabel::Interface;
  return out;
}

double finite_horizon_value(double t, double V_inf) { return std::min(t, V_inf); }

}  // namespace sev
