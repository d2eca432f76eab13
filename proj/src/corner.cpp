#include "sev/corner.hpp"

#include <algorithm>
#include <cmath>

namespace sev {

void CornerSpec::validate() const {
  if (!(theta1 >= -M_PI / 2.0) || !(theta1 < theta2) || !(theta2 < M_PI / 2.0))
    throw std::invalid_argument("CornerSpec: need -pi/2 <= theta1 < theta2 < pi/2");
  if (!(r > 0.0)) throw std::invalid_argument("CornerSpec: r > 0");
}

double PolarState::gap() const { return std::abs(wrap_angle(theta_E - theta_P)); }

namespace {

bool angles_in_ranges(double th_E, double th_P, double th1, double th2) {
  auto inside = [](double a, double lo, double hi) {
    // Interval test on the circle.
    const double w = wrap_angle(a - lo);
    const double len = hi - lo;
    return w > 0.0 && w < len;
  };
  return inside(th_E, th1 - M_PI / 2.0, th2 - M_PI / 2.0) &&
         inside(th_P, th2 - M_PI / 2.0, th2 + M_PI / 2.0);
}

bool horizon_at_corner(Vec2 vantage, const ConvexPolygon& obs, Vec2 corner,
                       double tol) {
  const HorizonData h = horizons(vantage, Obstacle{obs});
  return norm(h.lower.point - corner) <= tol || norm(h.upper.point - corner) <= tol;
}

bool corner_visible(Vec2 vantage, const ConvexPolygon& obs, Vec2 corner) {
  return !segment_blocked(vantage, corner, Obstacle{obs});
}

// The corner pins the visibility of a vantage pair when the evader-side
// point keeps the corner as a silhouette vertex within its angular range and
// the pursuer-side point stays in its range with the corner in sight. The
// angular ranges are the normative form of the horizon condition.
bool corner_pinned(Vec2 E, Vec2 P, const CornerSpec& spec,
                   const ConvexPolygon& obs, bool mirrored, double tol) {
  const Vec2 re = E - spec.corner, rp = P - spec.corner;
  if (norm(re) <= tol || norm(rp) <= tol) return false;
  double thE = std::atan2(re.y, re.x), thP = std::atan2(rp.y, rp.x);
  double th1 = spec.theta1, th2 = spec.theta2;
  if (mirrored) {
    thE = -thE;
    thP = -thP;
    const double t1 = -th2;
    th2 = -th1;
    th1 = t1;
  }
  if (!angles_in_ranges(thE, thP, th1, th2)) return false;
  return horizon_at_corner(E, obs, spec.corner, tol) &&
         corner_visible(E, obs, spec.corner) &&
         corner_visible(P, obs, spec.corner);
}

}  // namespace

PolarState to_polar(const GameState& state, const CornerSpec& spec,
                    const ConvexPolygon& obs) {
  spec.validate();
  obs.validate();
  const double scale = obstacle_extent(Obstacle{obs}) + norm(state.E - state.P);
  const double tol = 1e-9 * scale;

  PolarState ps;
  const Vec2 re = state.E - spec.corner;
  const Vec2 rp = state.P - spec.corner;
  ps.d_E = norm(re);
  ps.d_P = norm(rp);
  if (ps.d_E <= tol || ps.d_P <= tol)
    throw std::invalid_argument("to_polar: player at the corner");
  ps.theta_E = std::atan2(re.y, re.x);
  ps.theta_P = std::atan2(rp.y, rp.x);
  ps.d_underbar = std::min(ps.d_E, ps.d_P);

  const double sep = std::abs(wrap_angle(ps.theta_E - ps.theta_P));
  const double ang_tol = 1e-9;
  if (sep > M_PI - ang_tol && sep <= M_PI + ang_tol) {
    ps.on_boundary = true;
  } else if (sep > M_PI) {
    throw std::invalid_argument("to_polar: state already occluded");
  }

  if (angles_in_ranges(ps.theta_E, ps.theta_P, spec.theta1, spec.theta2)) {
    ps.mirrored = false;
  } else if (angles_in_ranges(-ps.theta_E, -ps.theta_P, -spec.theta2,
                              -spec.theta1)) {
    ps.mirrored = true;
  } else {
    throw std::invalid_argument("to_polar: angular constraints violated");
  }
  if (!corner_pinned(state.E, state.P, spec, obs, ps.mirrored, tol))
    throw std::invalid_argument("to_polar: horizon is not the corner");
  return ps;
}

double t0_corner(const PolarState& ps, const GameState& state,
                 const CornerSpec& spec, const ConvexPolygon& obs,
                 const Speeds& sp) {
  const Obstacle o{obs};
  const double dist_E = obstacle_signed_distance(state.E, o);
  const double dist_P = obstacle_signed_distance(state.P, o);
  if (dist_E <= 0.0 || dist_P <= 0.0)
    throw std::invalid_argument("t0_corner: player on or inside the obstacle");
  const double t_dist =
      std::min(dist_E / (2.0 * sp.gamma_e), dist_P / (2.0 * sp.gamma_p));
  const double tol = 1e-9 * (obstacle_extent(o) + norm(state.E - state.P));
  auto pinned = [&](double t) {
    constexpr int kDirs = 256;
    for (int k = 0; k < kDirs; ++k) {
      const double a = 2.0 * M_PI * k / kDirs;
      const Vec2 v{std::cos(a), std::sin(a)};
      if (!corner_pinned(state.E + sp.gamma_e * t * v,
                         state.P + sp.gamma_p * t * v, spec, obs, ps.mirrored,
                         tol))
        return false;
    }
    return true;
  };
  if (pinned(t_dist)) return t_dist;
  double lo = 0.0, hi = t_dist;
  for (int it = 0; it < 60; ++it) {
    const double m = 0.5 * (lo + hi);
    if (pinned(m)) lo = m; else hi = m;
  }
  return lo;
}

double S_corner(double t, const PolarState& ps, const Speeds& sp) {
  if (t < 0.0) throw std::invalid_argument("S_corner: t < 0");
  const double ae = sp.gamma_e * t / ps.d_E;
  const double ap = sp.gamma_p * t / ps.d_P;
  if (ae > 1.0 || ap > 1.0)
    throw std::domain_error("S_corner: arcsin argument above 1");
  return ps.gap() + std::asin(ae) - std::asin(ap);
}

std::optional<double> value_corner(const PolarState& ps, const Speeds& sp,
                                   double t0) {
  if (!(t0 > 0.0)) throw std::invalid_argument("value_corner: t0 > 0");
  if (ps.gap() >= M_PI - 1e-12) return 0.0;
  // Stay inside the arcsin domain; t0 already keeps gamma t below d/2.
  const double t_max = std::min(
      t0, 0.999999 * std::min(ps.d_E / sp.gamma_e, ps.d_P / sp.gamma_p));
  constexpr int kCells = 1024;
  double prev_t = 0.0, prev_S = S_corner(0.0, ps, sp);
  for (int i = 1; i <= kCells; ++i) {
    const double t = t_max * i / kCells;
    const double S = S_corner(t, ps, sp);
    if (prev_S < M_PI && S >= M_PI) {
      double lo = prev_t, hi = t;
      for (int it = 0; it < 200 && hi - lo > 1e-12 * t_max; ++it) {
        const double m = 0.5 * (lo + hi);
        if (S_corner(m, ps, sp) < M_PI) lo = m; else hi = m;
      }
      return 0.5 * (lo + hi);
    }
    prev_t = t;
    prev_S = S;
  }
  return std::nullopt;
}

CornerBounds corner_bounds(const PolarState& ps, const Speeds& sp, double t0) {
  CornerBounds cb;
  cb.evader_side = sp.gamma_e * ps.d_P > sp.gamma_p * ps.d_E;
  if (!cb.evader_side) {
    cb.lower = t0;
    cb.upper = std::numeric_limits<double>::infinity();
    cb.upper_valid = false;
    return cb;
  }
  const double rate = sp.gamma_e / ps.d_E - sp.gamma_p / ps.d_P;
  cb.lower = 0.0;
  cb.upper = (M_PI - ps.gap()) / rate;
  cb.upper_valid = ps.gap() >= M_PI - t0 * rate;
  return cb;
}

bool barrier_membership(const PolarState& ps, const Speeds& sp, double tol) {
  const double a = sp.gamma_e * ps.d_P;
  const double b = sp.gamma_p * ps.d_E;
  if (std::abs(a - b) > tol * std::max(a, b)) return false;
  return ps.gap() < M_PI;  // angular validity already enforced by to_polar
}

BarrierSimResult barrier_mimic_simulate(
    const PolarState& ps, const Speeds& sp, const CornerSpec& spec,
    const std::function<PolarControl(double)>& opponent, BarrierDefender defender,
    double dt, double T, double barrier_tol) {
  if (!(dt > 0.0) || !(T > 0.0) || T < dt)
    throw std::invalid_argument("barrier_mimic_simulate: bad dt/T");
  if (!barrier_membership(ps, sp, barrier_tol))
    throw std::invalid_argument("barrier_mimic_simulate: state not on the barrier");

  const bool evader_defends = defender == BarrierDefender::Evader;
  const double mirror = ps.mirrored ? -1.0 : 1.0;
  double dE = ps.d_E, thE = ps.theta_E * mirror;
  double dP = ps.d_P, thP = ps.theta_P * mirror;
  const double th1 = ps.mirrored ? -spec.theta2 : spec.theta1;
  const double th2 = ps.mirrored ? -spec.theta1 : spec.theta2;

  BarrierSimResult out;
  const int n = static_cast<int>(std::llround(T / dt));
  out.trajectory.reserve(n + 1);
  auto drift = [&] { return sp.gamma_e * dP - sp.gamma_p * dE; };
  out.trajectory.push_back({0.0, dE, thE * mirror, dP, thP * mirror, drift()});
  const double d_floor = 1e-6 * ps.d_underbar;
  double delayed_radial = 0.0;  // opponent's previous radial component

  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    const PolarControl b = opponent(t);
    if (b.radial * b.radial + b.angular * b.angular > 1.0 + 1e-12)
      throw std::invalid_argument("barrier_mimic_simulate: opponent control above 1");
    const double a_r = delayed_radial;
    const double a_th = std::sqrt(std::max(0.0, 1.0 - a_r * a_r));

    double dE_dot, thE_dot, dP_dot, thP_dot;
    if (evader_defends) {
      dE_dot = sp.gamma_e * a_r;
      thE_dot = -sp.gamma_e * a_th / dE;  // widen the gap
      dP_dot = sp.gamma_p * b.radial;
      thP_dot = sp.gamma_p * b.angular / dP;
    } else {
      dP_dot = sp.gamma_p * a_r;
      thP_dot = sp.gamma_p * a_th / dP;  // close the gap
      dE_dot = sp.gamma_e * b.radial;
      thE_dot = sp.gamma_e * b.angular / dE;
    }
    double dE_new = dE + dt * dE_dot;
    double dP_new = dP + dt * dP_dot;
    if (dE_new < d_floor || dP_new < d_floor) {
      out.clamped = true;
      dE_new = std::max(dE_new, d_floor);
      dP_new = std::max(dP_new, d_floor);
    }
    dE = dE_new;
    dP = dP_new;
    thE += dt * thE_dot;
    thP += dt * thP_dot;
    delayed_radial = b.radial;

    if (!angles_in_ranges(thE, thP, th1, th2) ||
        std::abs(wrap_angle(thE - thP)) >= M_PI)
      throw std::domain_error(
          "barrier_mimic_simulate: trajectory left the corner-pinned region");

    out.trajectory.push_back({t + dt, dE, thE * mirror, dP, thP * mirror, drift()});
    out.max_drift = std::max(out.max_drift, std::abs(drift()));
  }
  return out;
}

}  // namespace sev
