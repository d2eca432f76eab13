#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace sev {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
inline Vec2 operator*(Vec2 a, double k) { return {k * a.x, k * a.y}; }
inline Vec2 operator/(Vec2 a, double k) { return {a.x / k, a.y / k}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Counter-clockwise quarter turn.
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

inline Vec2 normalized(Vec2 a) {
  const double n = norm(a);
  if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
  return a / n;
}

inline Vec2 rotate(Vec2 a, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Distance from point x to the closed segment [a, b].
double point_segment_distance(Vec2 x, Vec2 a, Vec2 b);

/// Closest point on the closed segment [a, b] to x.
Vec2 closest_point_on_segment(Vec2 x, Vec2 a, Vec2 b);

/// Distance between two closed segments.
double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

// ---------------------------------------------------------------------------
// Obstacles
// ---------------------------------------------------------------------------

struct Circle {
  Vec2 center;
  double radius = 1.0;
};

/// One row of a sampled smooth convex boundary arc.
///
/// The arc is parametrised by arclength s in [-L, L], counter-clockwise
/// around the obstacle, so the unit tangent is Sigma'(s) and the unit normal
/// points out of the obstacle (n = tangent rotated -90 degrees).
struct ArcSample {
  double s = 0.0;
  Vec2 point;
  Vec2 tangent;
  Vec2 normal;
  double kappa = 0.0;
};

/// Smooth uniformly convex boundary portion, stored as an arclength table
/// with linear interpolation between rows.
///
/// Invariants: rows cover [-L, L] with spacing <= 1e-3 * L, kappa >= kappa0
/// everywhere, and |kappa(s1) - kappa(s2)| <= C_L |s1 - s2|.
struct ConvexArc {
  std::vector<ArcSample> samples;
  double L = 0.0;
  double kappa0 = 0.0;
  double C_L = 0.0;

  /// Largest curvature in the table (the table is the ground truth).
  double kappa_max() const;

  /// Linear interpolation of the table at arclength s, tangent/normal
  /// renormalised. Throws if s is outside [-L, L].
  ArcSample at(double s) const;

  /// Checks the structural invariants listed above; throws on violation.
  void validate() const;
};

/// Strictly convex polygon, vertices in counter-clockwise order.
struct ConvexPolygon {
  std::vector<Vec2> vertices;

  std::size_t size() const { return vertices.size(); }
  Vec2 vertex(std::size_t i) const { return vertices[i % vertices.size()]; }
  /// Outward unit normal of edge i (from vertex i to vertex i+1).
  Vec2 edge_normal(std::size_t i) const;

  void validate() const;
};

using Obstacle = std::variant<Circle, ConvexArc, ConvexPolygon>;

/// Rough linear extent of the obstacle, used for relative tolerances.
double obstacle_extent(const Obstacle& obs);

/// Signed distance to the obstacle region: positive outside, negative
/// inside, zero on the boundary. For ConvexArc the region is the local
/// convex side of the arc (intersection of its supporting half planes).
double obstacle_signed_distance(Vec2 x, const Obstacle& obs);

// ---------------------------------------------------------------------------
// Visibility
// ---------------------------------------------------------------------------

/// True iff the open segment (a, b) meets the open obstacle. A segment that
/// only touches the boundary (tangency) is visible and returns false.
/// Throws if a or b is strictly inside the obstacle.
bool segment_blocked(Vec2 a, Vec2 b, const Obstacle& obs);

/// Clearance of the sight segment [a, b] to the obstacle: the distance
/// between the segment and the obstacle when they are disjoint, and minus
/// the penetration depth when the segment cuts through.
double segment_clearance(Vec2 a, Vec2 b, const Obstacle& obs);

/// One visibility horizon: a tangent point of the obstacle seen from a
/// vantage point. `s` is the arclength parameter (circle: radius times the
/// centre-frame angle in (-pi, pi]; polygon: unset, see `corner`).
/// `on_arc` is false when a ConvexArc horizon falls outside the window, in
/// which case only that flag is meaningful.
struct HorizonSide {
  Vec2 point;
  double s = 0.0;
  double dist = 0.0;
  double kappa = 0.0;
  bool on_arc = true;
  int corner = -1;  // polygon vertex index, -1 otherwise
};

/// Both horizons from one vantage point. "lower" bounds the visible part of
/// the boundary from below in s, "upper" from above, matching the
/// counter-clockwise orientation of the boundary.
struct HorizonData {
  HorizonSide lower;
  HorizonSide upper;
};

/// Tangent points from a vantage point strictly outside the obstacle.
/// Circle: closed form. ConvexArc: bisection on the tangency residual after
/// a 64-cell bracket scan; a side whose root leaves [-L, L] is returned with
/// on_arc = false, and if neither side is found this throws. Polygon: the
/// two supporting vertices with their indices in `corner`.
HorizonData horizons(Vec2 vantage, const Obstacle& obs);

/// Root function for ConvexArc horizons: (vantage - Sigma(s)) . n(s).
/// Zero exactly when the line through the vantage is tangent at Sigma(s);
/// positive where the boundary point is visible from the vantage.
double tangency_residual(double s, Vec2 vantage, const ConvexArc& arc);

/// Interpolated curvature of the arc table at s in [-L, L].
double curvature_at(double s, const ConvexArc& arc);

// ---------------------------------------------------------------------------
// Arc builders
// ---------------------------------------------------------------------------

/// Samples the circular arc of half-length `half_len` (in arclength) centred
/// at angle `phi_center` of the circle. kappa0 = 1/R, C_L = 0.
ConvexArc arc_from_circle(const Circle& c, double phi_center, double half_len,
                          int n_samples);

/// Builds an arc from a curvature profile kappa(s) on [-L, L] by integrating
/// the Frenet frame from Sigma(0) = p0 with tangent angle phi0 at s = 0.
ConvexArc arc_from_curvature(const std::function<double(double)>& kappa,
                             double L, int n_samples, Vec2 p0, double phi0,
                             double kappa0, double C_L);

}  // namespace sev
