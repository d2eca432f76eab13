#include "sev/geometry.hpp"

#include <algorithm>
#include <limits>

namespace sev {

namespace {

constexpr double kStrictRel = 1e-12;  // relative tolerance for "strictly inside"

double scene_scale(Vec2 a, Vec2 b, const Obstacle& obs) {
  return norm(a - b) + obstacle_extent(obs) + 1.0;
}

// Clips the parameter interval [t0, t1] of the segment a + t*(b-a) against
// the half plane {x : (x - p) . n <= bound}. Returns false if empty.
bool clip_halfplane(Vec2 a, Vec2 d, Vec2 p, Vec2 n, double bound, double& t0,
                    double& t1) {
  const double c0 = dot(a - p, n);   // value at t = 0
  const double slope = dot(d, n);    // derivative in t
  if (std::abs(slope) < 1e-300) return c0 <= bound;
  const double tc = (bound - c0) / slope;
  if (slope > 0.0)
    t1 = std::min(t1, tc);
  else
    t0 = std::max(t0, tc);
  return t0 <= t1;
}

}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

Vec2 closest_point_on_segment(Vec2 x, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double dd = norm2(d);
  if (dd == 0.0) return a;
  const double t = std::clamp(dot(x - a, d) / dd, 0.0, 1.0);
  return a + t * d;
}

double point_segment_distance(Vec2 x, Vec2 a, Vec2 b) {
  return norm(x - closest_point_on_segment(x, a, b));
}

double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  // Proper crossing means distance zero.
  const Vec2 da = a1 - a0, db = b1 - b0;
  const double den = cross(da, db);
  if (std::abs(den) > 1e-300) {
    const double t = cross(b0 - a0, db) / den;
    const double u = cross(b0 - a0, da) / den;
    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return 0.0;
  }
  double d = point_segment_distance(a0, b0, b1);
  d = std::min(d, point_segment_distance(a1, b0, b1));
  d = std::min(d, point_segment_distance(b0, a0, a1));
  d = std::min(d, point_segment_distance(b1, a0, a1));
  return d;
}

// ---------------------------------------------------------------------------
// ConvexArc
// ---------------------------------------------------------------------------

double ConvexArc::kappa_max() const {
  double m = 0.0;
  for (const auto& r : samples) m = std::max(m, r.kappa);
  return m;
}

ArcSample ConvexArc::at(double s) const {
  if (samples.size() < 2) throw std::invalid_argument("ConvexArc: empty table");
  const double tol = 1e-9 * std::max(L, 1.0);
  if (s < samples.front().s - tol || s > samples.back().s + tol)
    throw std::domain_error("ConvexArc::at: s outside [-L, L]");
  s = std::clamp(s, samples.front().s, samples.back().s);
  auto it = std::upper_bound(
      samples.begin(), samples.end(), s,
      [](double v, const ArcSample& r) { return v < r.s; });
  std::size_t hi = std::min<std::size_t>(it - samples.begin(), samples.size() - 1);
  if (hi == 0) hi = 1;
  const ArcSample& r0 = samples[hi - 1];
  const ArcSample& r1 = samples[hi];
  const double w = (s - r0.s) / (r1.s - r0.s);
  ArcSample out;
  out.s = s;
  out.point = (1.0 - w) * r0.point + w * r1.point;
  out.tangent = normalized((1.0 - w) * r0.tangent + w * r1.tangent);
  out.normal = normalized((1.0 - w) * r0.normal + w * r1.normal);
  out.kappa = (1.0 - w) * r0.kappa + w * r1.kappa;
  return out;
}

void ConvexArc::validate() const {
  if (samples.size() < 2) throw std::invalid_argument("ConvexArc: need >= 2 samples");
  if (!(L > 0.0) || !(kappa0 > 0.0) || C_L < 0.0)
    throw std::invalid_argument("ConvexArc: bad L/kappa0/C_L");
  const double tol = 1e-9 * L;
  if (std::abs(samples.front().s + L) > tol || std::abs(samples.back().s - L) > tol)
    throw std::invalid_argument("ConvexArc: samples must cover [-L, L]");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& r = samples[i];
    if (r.kappa < kappa0 - 1e-12 * kappa0)
      throw std::invalid_argument("ConvexArc: kappa below kappa0");
    if (std::abs(dot(r.tangent, r.normal)) > 1e-9)
      throw std::invalid_argument("ConvexArc: tangent not orthogonal to normal");
    if (std::abs(norm(r.tangent) - 1.0) > 1e-9 || std::abs(norm(r.normal) - 1.0) > 1e-9)
      throw std::invalid_argument("ConvexArc: frame not unit length");
    if (i > 0) {
      const auto& q = samples[i - 1];
      const double ds = r.s - q.s;
      if (ds <= 0.0) throw std::invalid_argument("ConvexArc: s not increasing");
      if (ds > 1e-3 * L * (1.0 + 1e-9))
        throw std::invalid_argument("ConvexArc: sample spacing above 1e-3 * L");
      // Adjacent-pair Lipschitz check implies the all-pairs bound by telescoping.
      if (std::abs(r.kappa - q.kappa) > C_L * ds + 1e-12)
        throw std::invalid_argument("ConvexArc: curvature violates Lipschitz bound");
    }
  }
}

double curvature_at(double s, const ConvexArc& arc) { return arc.at(s).kappa; }

double tangency_residual(double s, Vec2 vantage, const ConvexArc& arc) {
  const ArcSample r = arc.at(s);
  return dot(vantage - r.point, r.normal);
}

ConvexArc arc_from_circle(const Circle& c, double phi_center, double half_len,
                          int n_samples) {
  if (!(c.radius > 0.0)) throw std::invalid_argument("arc_from_circle: radius");
  if (half_len <= 0.0 || half_len > M_PI * c.radius * (1.0 - 1e-12))
    throw std::invalid_argument("arc_from_circle: half_len out of range");
  if (n_samples < 2) throw std::invalid_argument("arc_from_circle: n_samples");
  ConvexArc arc;
  arc.L = half_len;
  arc.kappa0 = 1.0 / c.radius;
  arc.C_L = 0.0;
  arc.samples.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double s = -half_len + 2.0 * half_len * i / (n_samples - 1);
    const double th = phi_center + s / c.radius;
    ArcSample& r = arc.samples[i];
    r.s = s;
    r.normal = {std::cos(th), std::sin(th)};
    r.point = c.center + c.radius * r.normal;
    r.tangent = {-r.normal.y, r.normal.x};
    r.kappa = 1.0 / c.radius;
  }
  return arc;
}

ConvexArc arc_from_curvature(const std::function<double(double)>& kappa,
                             double L, int n_samples, Vec2 p0, double phi0,
                             double kappa0, double C_L) {
  if (n_samples < 3) throw std::invalid_argument("arc_from_curvature: n_samples");
  ConvexArc arc;
  arc.L = L;
  arc.kappa0 = kappa0;
  arc.C_L = C_L;
  arc.samples.resize(n_samples);
  const double ds = 2.0 * L / (n_samples - 1);
  // The tangent angle satisfies phi'(s) = kappa(s); integrate the frame from
  // s = 0 in both directions with RK4 substeps per table row.
  auto fill = [&](int i, double s, Vec2 p, double phi) {
    ArcSample& r = arc.samples[i];
    r.s = s;
    r.point = p;
    r.tangent = {std::cos(phi), std::sin(phi)};
    r.normal = {r.tangent.y, -r.tangent.x};
    r.kappa = kappa(s);
  };
  const int i0 = (n_samples - 1) / 2;
  // Adjust so row i0 is exactly s = 0 (n_samples odd keeps the grid uniform).
  if (n_samples % 2 == 0)
    throw std::invalid_argument("arc_from_curvature: use an odd sample count");
  fill(i0, 0.0, p0, phi0);
  auto step = [&](double s, Vec2& p, double& phi, double h) {
    // RK4 on (x, y, phi)' = (cos phi, sin phi, kappa(s)).
    auto f = [&](double ss, double ph) {
      return std::array<double, 3>{std::cos(ph), std::sin(ph), kappa(ss)};
    };
    const auto k1 = f(s, phi);
    const auto k2 = f(s + h / 2, phi + h / 2 * k1[2]);
    const auto k3 = f(s + h / 2, phi + h / 2 * k2[2]);
    const auto k4 = f(s + h, phi + h * k3[2]);
    p.x += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    p.y += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    phi += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
  };
  Vec2 p = p0;
  double phi = phi0;
  for (int i = i0 + 1; i < n_samples; ++i) {
    step((i - 1 - i0) * ds, p, phi, ds);
    fill(i, (i - i0) * ds, p, phi);
  }
  p = p0;
  phi = phi0;
  for (int i = i0 - 1; i >= 0; --i) {
    step((i + 1 - i0) * ds, p, phi, -ds);
    fill(i, (i - i0) * ds, p, phi);
  }
  return arc;
}

// ---------------------------------------------------------------------------
// ConvexPolygon
// ---------------------------------------------------------------------------

Vec2 ConvexPolygon::edge_normal(std::size_t i) const {
  const Vec2 e = vertex(i + 1) - vertex(i);
  return normalized(Vec2{e.y, -e.x});
}

void ConvexPolygon::validate() const {
  const std::size_t n = vertices.size();
  if (n < 3) throw std::invalid_argument("ConvexPolygon: need >= 3 vertices");
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    scale = std::max(scale, norm(vertex(i + 1) - vertex(i)));
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = vertex(i + 1) - vertex(i);
    const Vec2 e1 = vertex(i + 2) - vertex(i + 1);
    if (norm(e0) < 1e-12 * scale)
      throw std::invalid_argument("ConvexPolygon: repeated vertex");
    if (cross(e0, e1) <= 1e-12 * scale * scale)
      throw std::invalid_argument("ConvexPolygon: not strictly convex CCW");
  }
}

// ---------------------------------------------------------------------------
// Obstacle-generic helpers
// ---------------------------------------------------------------------------

double obstacle_extent(const Obstacle& obs) {
  return std::visit(
      [](const auto& o) -> double {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return 2.0 * o.radius;
        } else if constexpr (std::is_same_v<T, ConvexArc>) {
          return 2.0 * o.L;
        } else {
          double m = 0.0;
          for (const auto& v : o.vertices)
            m = std::max(m, norm(v - o.vertices.front()));
          return std::max(m, 1e-12);
        }
      },
      obs);
}

double obstacle_signed_distance(Vec2 x, const Obstacle& obs) {
  return std::visit(
      [&](const auto& o) -> double {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return norm(x - o.center) - o.radius;
        } else if constexpr (std::is_same_v<T, ConvexArc>) {
          // Outside iff the nearest sample sees x on its outward side.
          double best = std::numeric_limits<double>::max();
          std::size_t k = 0;
          for (std::size_t i = 0; i < o.samples.size(); ++i) {
            const double d = norm2(x - o.samples[i].point);
            if (d < best) { best = d; k = i; }
          }
          const double d = std::sqrt(best);
          return dot(x - o.samples[k].point, o.samples[k].normal) >= 0.0 ? d : -d;
        } else {
          const std::size_t n = o.size();
          double depth = -std::numeric_limits<double>::max();
          for (std::size_t i = 0; i < n; ++i)
            depth = std::max(depth, dot(x - o.vertex(i), o.edge_normal(i)));
          if (depth <= 0.0) return depth;  // inside: minus the plane depth
          double d = std::numeric_limits<double>::max();
          for (std::size_t i = 0; i < n; ++i)
            d = std::min(d, point_segment_distance(x, o.vertex(i), o.vertex(i + 1)));
          return d;
        }
      },
      obs);
}

// ---------------------------------------------------------------------------
// segment_blocked / segment_clearance
// ---------------------------------------------------------------------------

bool segment_blocked(Vec2 a, Vec2 b, const Obstacle& obs) {
  const double tol = kStrictRel * scene_scale(a, b, obs);
  if (obstacle_signed_distance(a, obs) < -tol ||
      obstacle_signed_distance(b, obs) < -tol)
    throw std::invalid_argument("segment_blocked: endpoint inside the obstacle");
  return std::visit(
      [&](const auto& o) -> bool {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return point_segment_distance(o.center, a, b) < o.radius - tol;
        } else if constexpr (std::is_same_v<T, ConvexArc>) {
          // Strictly inside every supporting half plane of the arc.
          double t0 = 0.0, t1 = 1.0;
          const Vec2 d = b - a;
          for (const auto& r : o.samples)
            if (!clip_halfplane(a, d, r.point, r.normal, -tol, t0, t1))
              return false;
          return t1 - t0 > 0.0;
        } else {
          double t0 = 0.0, t1 = 1.0;
          const Vec2 d = b - a;
          const std::size_t n = o.size();
          for (std::size_t i = 0; i < n; ++i)
            if (!clip_halfplane(a, d, o.vertex(i), o.edge_normal(i), -tol, t0, t1))
              return false;
          return t1 - t0 > 0.0;
        }
      },
      obs);
}

double segment_clearance(Vec2 a, Vec2 b, const Obstacle& obs) {
  return std::visit(
      [&](const auto& o) -> double {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return point_segment_distance(o.center, a, b) - o.radius;
        } else if constexpr (std::is_same_v<T, ConvexArc>) {
          if (!segment_blocked(a, b, obs)) {
            double d = std::numeric_limits<double>::max();
            for (const auto& r : o.samples)
              d = std::min(d, point_segment_distance(r.point, a, b));
            return d;
          }
          // Penetration: maximise the concave depth along the segment.
          auto depth = [&](double t) {
            const Vec2 x = a + t * (b - a);
            double dep = std::numeric_limits<double>::max();
            for (const auto& r : o.samples)
              dep = std::min(dep, -dot(x - r.point, r.normal));
            return dep;
          };
          double lo = 0.0, hi = 1.0;
          for (int it = 0; it < 80; ++it) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (depth(m1) < depth(m2)) lo = m1; else hi = m2;
          }
          return -depth(0.5 * (lo + hi));
        } else {
          if (!segment_blocked(a, b, obs)) {
            double d = std::numeric_limits<double>::max();
            const std::size_t n = o.size();
            for (std::size_t i = 0; i < n; ++i)
              d = std::min(d, segment_segment_distance(a, b, o.vertex(i),
                                                       o.vertex(i + 1)));
            return d;
          }
          auto depth = [&](double t) {
            return -obstacle_signed_distance(a + t * (b - a), obs);
          };
          double lo = 0.0, hi = 1.0;
          for (int it = 0; it < 80; ++it) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (depth(m1) < depth(m2)) lo = m1; else hi = m2;
          }
          return -depth(0.5 * (lo + hi));
        }
      },
      obs);
}

// ---------------------------------------------------------------------------
// horizons
// ---------------------------------------------------------------------------

namespace {

HorizonData circle_horizons(Vec2 vantage, const Circle& c) {
  const Vec2 dv = vantage - c.center;
  const double D = norm(dv);
  if (D <= c.radius)
    throw std::invalid_argument("horizons: vantage inside the circle");
  const double ca = c.radius / D;
  const double sa = std::sqrt(std::max(0.0, 1.0 - ca * ca));
  const Vec2 u = dv / D;
  const Vec2 up = perp(u);
  const double tdist = std::sqrt(std::max(0.0, D * D - c.radius * c.radius));
  HorizonData h;
  h.lower.point = c.center + c.radius * (ca * u - sa * up);
  h.upper.point = c.center + c.radius * (ca * u + sa * up);
  for (HorizonSide* side : {&h.lower, &h.upper}) {
    side->dist = tdist;
    side->kappa = 1.0 / c.radius;
    const Vec2 r = *&side->point - c.center;
    side->s = c.radius * std::atan2(r.y, r.x);
  }
  return h;
}

// Scans the residual on a 64-cell grid and bisects each bracketed sign
// change. Returns the rising root (hidden -> visible) as lower and the
// falling one as upper.
HorizonData arc_horizons(Vec2 vantage, const ConvexArc& arc) {
  if (obstacle_signed_distance(vantage, Obstacle{arc}) <= 0.0)
    throw std::invalid_argument("horizons: vantage inside the obstacle");
  const int cells = 64;
  const double L = arc.L;
  auto f = [&](double s) { return tangency_residual(s, vantage, arc); };
  auto bisect = [&](double lo, double hi) {
    for (int i = 0; i < 100 && hi - lo > 1e-12 * L; ++i) {
      const double m = 0.5 * (lo + hi);
      if ((f(lo) <= 0.0) == (f(m) <= 0.0)) lo = m; else hi = m;
    }
    return 0.5 * (lo + hi);
  };
  HorizonData h;
  h.lower.on_arc = false;
  h.upper.on_arc = false;
  double prev_s = -L, prev_f = f(-L);
  for (int i = 1; i <= cells; ++i) {
    const double s = -L + 2.0 * L * i / cells;
    const double fi = f(s);
    if (prev_f <= 0.0 && fi > 0.0 && !h.lower.on_arc) {
      h.lower.on_arc = true;
      h.lower.s = bisect(prev_s, s);
    }
    if (prev_f > 0.0 && fi <= 0.0 && !h.upper.on_arc) {
      h.upper.on_arc = true;
      h.upper.s = bisect(prev_s, s);
    }
    prev_s = s;
    prev_f = fi;
  }
  if (!h.lower.on_arc && !h.upper.on_arc)
    throw std::domain_error("horizons: no tangency found inside the arc window");
  for (HorizonSide* side : {&h.lower, &h.upper}) {
    if (!side->on_arc) continue;
    const ArcSample r = arc.at(side->s);
    side->point = r.point;
    side->kappa = r.kappa;
    side->dist = norm(vantage - r.point);
  }
  return h;
}

HorizonData polygon_horizons(Vec2 vantage, const ConvexPolygon& poly) {
  if (obstacle_signed_distance(vantage, Obstacle{poly}) <= 0.0)
    throw std::invalid_argument("horizons: vantage inside the polygon");
  const std::size_t n = poly.size();
  // Faced edges form one contiguous CCW run; its endpoints are the horizons.
  std::vector<bool> faced(n);
  for (std::size_t i = 0; i < n; ++i)
    faced[i] = dot(vantage - poly.vertex(i), poly.edge_normal(i)) > 0.0;
  std::size_t start = n, end = n;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t prev = (i + n - 1) % n;
    if (faced[i] && !faced[prev]) start = i;
    if (!faced[i] && faced[prev]) end = i;
  }
  if (start == n || end == n)
    throw std::domain_error("horizons: degenerate polygon visibility");
  HorizonData h;
  h.lower.corner = static_cast<int>(start);
  h.upper.corner = static_cast<int>(end);
  for (HorizonSide* side : {&h.lower, &h.upper}) {
    side->point = poly.vertex(side->corner);
    side->dist = norm(vantage - side->point);
    side->s = std::numeric_limits<double>::quiet_NaN();
    side->kappa = std::numeric_limits<double>::quiet_NaN();
  }
  return h;
}

}  // namespace

HorizonData horizons(Vec2 vantage, const Obstacle& obs) {
  return std::visit(
      [&](const auto& o) -> HorizonData {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return circle_horizons(vantage, o);
        } else if constexpr (std::is_same_v<T, ConvexArc>) {
          return arc_horizons(vantage, o);
        } else {
          return polygon_horizons(vantage, o);
        }
      },
      obs);
}

}  // namespace sev
