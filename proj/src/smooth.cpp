#include "sev/smooth.hpp"

#include <algorithm>
#include <cmath>

namespace sev {

// ---------------------------------------------------------------------------
// SmoothCurve
// ---------------------------------------------------------------------------

SmoothCurve SmoothCurve::circle_window(const Circle& c, double phi0, double L,
                                       int orientation) {
  if (!(c.radius > 0.0)) throw std::invalid_argument("circle_window: radius");
  if (!(L > 0.0) || L >= M_PI * c.radius)
    throw std::invalid_argument("circle_window: L out of range");
  if (orientation != 1 && orientation != -1)
    throw std::invalid_argument("circle_window: orientation must be +-1");
  SmoothCurve sc;
  sc.circ_ = CircleFrame{c, phi0, orientation, L};
  return sc;
}

SmoothCurve SmoothCurve::table(ConvexArc arc) {
  arc.validate();
  SmoothCurve sc;
  sc.arc_ = std::make_shared<const ConvexArc>(std::move(arc));
  return sc;
}

double SmoothCurve::L() const { return circ_ ? circ_->L : arc_->L; }
double SmoothCurve::kappa0() const {
  return circ_ ? 1.0 / circ_->c.radius : arc_->kappa0;
}
double SmoothCurve::C_L() const { return circ_ ? 0.0 : arc_->C_L; }
double SmoothCurve::kappa_max() const {
  return circ_ ? 1.0 / circ_->c.radius : arc_->kappa_max();
}

Vec2 SmoothCurve::point(double s) const {
  if (circ_) {
    const double th = circ_->phi0 + circ_->orient * s / circ_->c.radius;
    return circ_->c.center + circ_->c.radius * Vec2{std::cos(th), std::sin(th)};
  }
  return arc_->at(s).point;
}

Vec2 SmoothCurve::outward_normal(double s) const {
  if (circ_) {
    const double th = circ_->phi0 + circ_->orient * s / circ_->c.radius;
    return {std::cos(th), std::sin(th)};
  }
  return arc_->at(s).normal;
}

Vec2 SmoothCurve::tangent(double s) const {
  if (circ_) {
    const double th = circ_->phi0 + circ_->orient * s / circ_->c.radius;
    return circ_->orient * Vec2{-std::sin(th), std::cos(th)};
  }
  return arc_->at(s).tangent;
}

double SmoothCurve::kappa(double s) const {
  return circ_ ? 1.0 / circ_->c.radius : arc_->at(s).kappa;
}

double SmoothCurve::residual(double s, Vec2 x) const {
  return dot(x - point(s), outward_normal(s));
}

std::optional<double> SmoothCurve::horizon_root(HorizonSideSel side,
                                                double shift, Vec2 x) const {
  if (circ_) {
    const Vec2 dv = x - circ_->c.center;
    const double D = norm(dv);
    const double arg = (circ_->c.radius + shift) / D;
    if (arg > 1.0 || arg < -1.0) return std::nullopt;
    const double alpha = std::acos(arg);
    const double theta_x = std::atan2(dv.y, dv.x);
    // Rising branch at theta_x - alpha for positive orientation, mirrored
    // otherwise.
    const double sgn = (side == HorizonSideSel::Lower) ? 1.0 : -1.0;
    const double theta = theta_x - circ_->orient * sgn * alpha;
    const double s = circ_->orient * circ_->c.radius * wrap_angle(theta - circ_->phi0);
    if (std::abs(s) > circ_->L) return std::nullopt;
    return s;
  }
  // Table arc: the residual is unimodal in s for a vantage outside a convex
  // arc, so each level has at most one rising and one falling crossing.
  const auto& rows = arc_->samples;
  auto val = [&](std::size_t i) {
    return dot(x - rows[i].point, rows[i].normal) - shift;
  };
  std::optional<std::size_t> cell;
  double prev = val(0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double cur = val(i);
    const bool rising = prev <= 0.0 && cur > 0.0;
    const bool falling = prev > 0.0 && cur <= 0.0;
    if ((side == HorizonSideSel::Lower && rising) ||
        (side == HorizonSideSel::Upper && falling)) {
      cell = i;
      break;
    }
    prev = cur;
  }
  if (!cell) return std::nullopt;
  double lo = rows[*cell - 1].s, hi = rows[*cell].s;
  auto g = [&](double s) { return residual(s, x) - shift; };
  const double glo = g(lo);
  for (int it = 0; it < 100 && hi - lo > 1e-12 * arc_->L; ++it) {
    const double m = 0.5 * (lo + hi);
    if ((g(m) <= 0.0) == (glo <= 0.0)) lo = m; else hi = m;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// build_setup
// ---------------------------------------------------------------------------

namespace {

// Containment part of the smallness condition: every vantage reachable by
// time t keeps its relevant horizon strictly inside the window. Checked on
// 256 sampled directions.
bool horizons_contained(const SmoothCurve& curve, const GameState& st,
                        const Speeds& sp, double t) {
  // Exact extremes first: the optimal vantage sits on the common tangent, so
  // the extremal horizon parameters solve the shifted tangency condition.
  const double shifts_e[2] = {sp.gamma_e * t, -sp.gamma_e * t};
  const double shifts_p[2] = {-sp.gamma_p * t, sp.gamma_p * t};
  for (double sh : shifts_e) {
    const auto s = curve.horizon_root(HorizonSideSel::Lower, sh, st.E);
    if (!s || std::abs(*s) >= curve.L()) return false;
  }
  for (double sh : shifts_p) {
    const auto s = curve.horizon_root(HorizonSideSel::Upper, sh, st.P);
    if (!s || std::abs(*s) >= curve.L()) return false;
  }
  constexpr int kDirs = 256;
  for (int k = 0; k < kDirs; ++k) {
    const double a = 2.0 * M_PI * k / kDirs;
    const Vec2 v{std::cos(a), std::sin(a)};
    const auto se = curve.horizon_root(HorizonSideSel::Lower, 0.0,
                                       st.E + sp.gamma_e * t * v);
    if (!se || std::abs(*se) >= curve.L()) return false;
    const auto sps = curve.horizon_root(HorizonSideSel::Upper, 0.0,
                                        st.P + sp.gamma_p * t * v);
    if (!sps || std::abs(*sps) >= curve.L()) return false;
  }
  return true;
}

double compute_t0(const SmoothCurve& curve, const GameState& st,
                  const Speeds& sp, double dist_E, double dist_P) {
  double t = std::min(dist_E / (2.0 * sp.gamma_e), dist_P / (2.0 * sp.gamma_p));
  if (horizons_contained(curve, st, sp, t)) return t;
  double lo = 0.0, hi = t;
  for (int it = 0; it < 60; ++it) {
    const double m = 0.5 * (lo + hi);
    if (horizons_contained(curve, st, sp, m)) lo = m; else hi = m;
  }
  return lo;
}

double compute_t0_bar(const SmoothCurve& curve, double t0) {
  const double k0 = curve.kappa0();
  const double km = curve.kappa_max();
  const double cl = curve.C_L();
  double tb = t0;
  if (cl > 0.0) tb = std::min(tb, k0 * k0 * k0 * t0 / (cl * km));
  tb = std::min(tb, k0 * t0 / std::sqrt(cl + km * km));
  return tb;
}

}  // namespace

SmoothSetup build_setup(const GameState& state, const Obstacle& obs,
                        const Speeds& sp) {
  if (std::holds_alternative<ConvexPolygon>(obs))
    throw std::invalid_argument("build_setup: smooth analysis needs a circle or arc");
  if (in_target(state, obs))
    throw std::invalid_argument("build_setup: state already occluded");

  SmoothSetup su;
  su.state = state;
  su.sp = sp;

  if (const Circle* c = std::get_if<Circle>(&obs)) {
    // Pick the parametrisation orientation: the evader's bounding tangent
    // point must sit at or below the pursuer's in the parameter. The valid
    // pairing is the one whose angular gap is small and nonnegative; the
    // wrong pairing lands on the far side of the circle.
    const HorizonData he = horizons(state.E, obs);
    const HorizonData hp = horizons(state.P, obs);
    auto ang = [&](Vec2 p) {
      return std::atan2(p.y - c->center.y, p.x - c->center.x);
    };
    const double gap_plus = wrap_angle(ang(hp.upper.point) - ang(he.lower.point));
    const double gap_minus = wrap_angle(ang(he.upper.point) - ang(hp.lower.point));
    const double tol = 1e-9;
    int orient;
    double th_E, th_P;
    if (gap_plus >= -tol && (gap_minus < -tol || gap_plus <= gap_minus)) {
      orient = 1;
      th_E = ang(he.lower.point);
      th_P = ang(hp.upper.point);
    } else if (gap_minus >= -tol) {
      orient = -1;
      th_E = ang(he.upper.point);
      th_P = ang(hp.lower.point);
    } else {
      throw std::domain_error("build_setup: s_E > s_P (occluded or mis-oriented)");
    }
    const double phi0 = th_E + 0.5 * wrap_angle(th_P - th_E);
    su.curve = SmoothCurve::circle_window(*c, phi0, 0.9 * M_PI * c->radius, orient);
  } else {
    su.curve = SmoothCurve::table(std::get<ConvexArc>(obs));
  }

  const auto se = su.curve.horizon_root(HorizonSideSel::Lower, 0.0, state.E);
  const auto sp_root = su.curve.horizon_root(HorizonSideSel::Upper, 0.0, state.P);
  if (!se || std::abs(*se) >= su.curve.L())
    throw std::domain_error("build_setup: evader horizon off the arc window");
  if (!sp_root || std::abs(*sp_root) >= su.curve.L())
    throw std::domain_error("build_setup: pursuer horizon off the arc window");
  su.s_E = *se;
  su.s_P = *sp_root;
  const double s_tol = 1e-9 * su.curve.L();
  if (su.s_E > su.s_P + s_tol)
    throw std::domain_error("build_setup: s_E > s_P (occluded or mis-oriented)");
  su.S0 = std::max(0.0, su.s_P - su.s_E);
  su.d_E = norm(state.E - su.curve.point(su.s_E));
  su.d_P = norm(state.P - su.curve.point(su.s_P));
  su.kappa_E = su.curve.kappa(su.s_E);
  su.kappa_P = su.curve.kappa(su.s_P);

  const double dist_E = obstacle_signed_distance(state.E, obs);
  const double dist_P = obstacle_signed_distance(state.P, obs);
  if (dist_E <= 0.0 || dist_P <= 0.0)
    throw std::invalid_argument("build_setup: player on or inside the obstacle");
  su.t0 = compute_t0(su.curve, state, sp, dist_E, dist_P);
  su.t0_bar = compute_t0_bar(su.curve, su.t0);
  return su;
}

// ---------------------------------------------------------------------------
// Horizon dynamics
// ---------------------------------------------------------------------------

double max_horizon_param(Vec2 vantage, double speed, double t,
                         HorizonSideSel side, const SmoothSetup& setup) {
  const double shift = (side == HorizonSideSel::Lower) ? speed * t : -speed * t;
  const auto s = setup.curve.horizon_root(side, shift, vantage);
  if (!s || std::abs(*s) >= setup.curve.L())
    throw std::domain_error("max_horizon_param: horizon left the arc window");
  return *s;
}

double S_of_t(double t, const SmoothSetup& setup) {
  const double sp_max = max_horizon_param(setup.state.P, setup.sp.gamma_p, t,
                                          HorizonSideSel::Upper, setup);
  const double se_max = max_horizon_param(setup.state.E, setup.sp.gamma_e, t,
                                          HorizonSideSel::Lower, setup);
  return sp_max - se_max;
}

namespace {

std::optional<double> bisect_root_of_S(const SmoothSetup& setup, double lo,
                                       double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-10 * setup.t0; ++it) {
    const double m = 0.5 * (lo + hi);
    if (S_of_t(m, setup) > 0.0) lo = m; else hi = m;
  }
  return 0.5 * (lo + hi);
}

std::optional<double> first_root_of_S(const SmoothSetup& setup, bool skip_t0) {
  const double eps_s = 1e-12 * std::max(setup.curve.L(), 1.0);
  const double t0 = setup.t0;
  if (!skip_t0) {
    if (setup.S0 <= eps_s) return 0.0;
    constexpr int kCells = 2048;
    double prev_t = 0.0, prev_S = setup.S0;
    for (int i = 1; i <= kCells; ++i) {
      const double t = t0 * i / kCells;
      const double S = S_of_t(t, setup);
      if (prev_S > 0.0 && S <= 0.0) return bisect_root_of_S(setup, prev_t, t);
      prev_t = t;
      prev_S = S;
    }
    return std::nullopt;
  }
  // Profile variant: the root can sit arbitrarily close to t = 0 when d* is
  // small, so scan log-spaced times and arm once S has visibly risen.
  constexpr int kCells = 4096;
  const double t_min = 1e-12 * t0;
  bool armed = false;
  double prev_t = 0.0, prev_S = setup.S0;
  for (int i = 0; i <= kCells; ++i) {
    const double t = t_min * std::pow(t0 / t_min, double(i) / kCells);
    const double S = S_of_t(t, setup);
    if (!armed && S > eps_s) armed = true;
    if (armed && prev_S > 0.0 && S <= 0.0) return bisect_root_of_S(setup, prev_t, t);
    prev_t = t;
    prev_S = S;
  }
  // Never rose: the state approaches the usable part, where the limit is 0.
  if (!armed) return 0.0;
  return std::nullopt;
}

}  // namespace

std::optional<double> value_by_representation(const SmoothSetup& setup) {
  return first_root_of_S(setup, false);
}

std::optional<double> profile_value(const SmoothSetup& setup) {
  return first_root_of_S(setup, true);
}

HorizonPaths integrate_horizons(const SmoothSetup& setup, Vec2 v_E, Vec2 v_P,
                                double t_end, int n_steps) {
  if (t_end < 0.0 || t_end > setup.t0)
    throw std::invalid_argument("integrate_horizons: t_end outside [0, t0]");
  if (n_steps < 1) throw std::invalid_argument("integrate_horizons: n_steps");
  const double h = t_end / n_steps;
  HorizonPaths out;
  out.tau.reserve(n_steps + 1);
  out.s_E.reserve(n_steps + 1);
  out.s_P.reserve(n_steps + 1);

  // sign = -1 for the lower horizon, +1 for the upper one.
  auto rhs = [&](double s, Vec2 x, Vec2 xdot, double sign) {
    const Vec2 n = setup.curve.outward_normal(s);
    const double d = norm(setup.curve.point(s) - x);
    return sign * dot(xdot, n) / (setup.curve.kappa(s) * d);
  };
  double sE = setup.s_E, sP = setup.s_P;
  const Vec2 Edot = setup.sp.gamma_e * v_E;
  const Vec2 Pdot = setup.sp.gamma_p * v_P;
  out.tau.push_back(0.0);
  out.s_E.push_back(sE);
  out.s_P.push_back(sP);
  for (int i = 0; i < n_steps; ++i) {
    const double tau = i * h;
    auto rk4 = [&](double s, Vec2 x0, Vec2 xdot, double sign) {
      const auto pos = [&](double dt) { return x0 + (tau + dt) * xdot; };
      const double k1 = rhs(s, pos(0.0), xdot, sign);
      const double k2 = rhs(s + 0.5 * h * k1, pos(0.5 * h), xdot, sign);
      const double k3 = rhs(s + 0.5 * h * k2, pos(0.5 * h), xdot, sign);
      const double k4 = rhs(s + h * k3, pos(h), xdot, sign);
      return s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    sE = rk4(sE, setup.state.E, Edot, -1.0);
    sP = rk4(sP, setup.state.P, Pdot, +1.0);
    if (std::abs(sE) >= setup.curve.L() || std::abs(sP) >= setup.curve.L())
      throw std::domain_error("integrate_horizons: horizon left the arc window");
    out.tau.push_back(tau + h);
    out.s_E.push_back(sE);
    out.s_P.push_back(sP);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

ValueBounds value_bounds_smooth(const SmoothSetup& su, double delta,
                                double epsilon) {
  if (epsilon < 0.0 || epsilon >= 1.0)
    throw std::invalid_argument("value_bounds_smooth: epsilon in [0, 1)");
  if (delta <= 0.0 || delta >= 1.0 - epsilon)
    throw std::invalid_argument("value_bounds_smooth: delta in (0, 1 - epsilon)");
  const double ge = su.sp.gamma_e, gp = su.sp.gamma_p;
  const double kE = su.kappa_E, kP = su.kappa_P;
  const double k0 = su.curve.kappa0();
  ValueBounds vb;
  vb.delta = delta;
  vb.epsilon = epsilon;
  vb.S0 = su.S0;
  vb.d_star = std::max(0.0, gp / (kP * su.d_P) - ge / (kE * su.d_E));
  vb.C_star_or_C = gp * gp / (2.0 * kP * kP * su.d_P * su.d_P * su.d_P) +
                   ge * ge / (2.0 * kE * kE * su.d_E * su.d_E * su.d_E);
  const double cl_cap =
      0.5 * epsilon * k0 * k0 * k0 * su.t0 *
      std::min(ge / (kE * kE * su.d_E * su.d_E), gp / (kP * kP * su.d_P * su.d_P));
  const bool hyp_ok = su.curve.C_L() <= cl_cap;
  vb.lower = std::min(vb.d_star / ((1.0 + delta + epsilon) * vb.C_star_or_C),
                      delta * su.t0_bar);
  vb.lower_valid = hyp_ok;
  const double t_star =
      (std::sqrt(su.S0) + vb.d_star) / ((1.0 - epsilon - delta) * vb.C_star_or_C);
  vb.upper = t_star;
  vb.upper_valid =
      hyp_ok && t_star <= delta * su.t0_bar && std::sqrt(su.S0) <= t_star;
  return vb;
}

ValueBounds value_bounds_kconst(const SmoothSetup& su, double delta) {
  if (delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("value_bounds_kconst: delta in (0, 1)");
  const double ge = su.sp.gamma_e, gp = su.sp.gamma_p;
  const double k0 = su.curve.kappa0();
  const double kL = k0 + su.curve.L() * su.curve.C_L();
  ValueBounds vb;
  vb.delta = delta;
  vb.epsilon = 0.0;
  vb.S0 = su.S0;
  vb.d_star = std::max(0.0, gp / su.d_P - ge / su.d_E);
  const double dE3 = su.d_E * su.d_E * su.d_E;
  const double dP3 = su.d_P * su.d_P * su.d_P;
  vb.C_star_or_C = 2.0 * dP3 * dE3 / (dE3 * gp * gp + dP3 * ge * ge);
  vb.lower = std::min(k0 / (1.0 + delta) * vb.C_star_or_C * vb.d_star,
                      delta * su.t0_bar);
  vb.lower_valid = true;
  const double t_star = kL / (1.0 - delta) * vb.C_star_or_C *
                        (kL * std::sqrt(su.S0) + vb.d_star);
  vb.upper = t_star;
  const double delta_min = 1.0 - kL * kL * vb.C_star_or_C;
  vb.upper_valid = delta >= delta_min && t_star <= delta * su.t0_bar;
  return vb;
}

ProfileSlopes boundary_profile(const SmoothSetup& su, double delta,
                               double d_star_max) {
  if (delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("boundary_profile: delta in (0, 1)");
  const double ge = su.sp.gamma_e, gp = su.sp.gamma_p;
  const double k0 = su.curve.kappa0();
  const double kL = k0 + su.curve.L() * su.curve.C_L();
  const double dE3 = su.d_E * su.d_E * su.d_E;
  const double dP3 = su.d_P * su.d_P * su.d_P;
  const double C_star = 2.0 * dP3 * dE3 / (dE3 * gp * gp + dP3 * ge * ge);
  ProfileSlopes ps;
  ps.d0 = (1.0 - delta) * delta * su.t0_bar / (kL * C_star);
  if (d_star_max >= ps.d0)
    throw std::domain_error("boundary_profile: d* above the validity threshold");
  if (k0 * k0 >= 1.0 / C_star) {
    ps.sharp = true;
    ps.slope_low = k0 * C_star;
    ps.slope_high = kL * C_star;
  } else {
    ps.slope_low = k0 * C_star / (1.0 + delta);
    ps.slope_high = kL * C_star / (1.0 - delta);
  }
  return ps;
}

}  // namespace sev
