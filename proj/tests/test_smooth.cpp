#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "sev/smooth.hpp"

using namespace sev;

namespace {

std::mt19937_64 rng_for(const char* tag) {
  std::seed_seq seq(tag, tag + std::strlen(tag));
  return std::mt19937_64(seq);
}
double uni(std::mt19937_64& g) { return (g() >> 11) * 0x1.0p-53; }

const Obstacle kUnit{Circle{{0, 0}, 1.0}};

// On-boundary circle configuration: tangency at angle phi, players on the
// tangent line at distances dE (behind, counter-clockwise) and dP (ahead),
// optionally lifted off the line by eta along the outward normal.
GameState tangent_state(double phi, double dE, double dP, double eta_E = 0.0,
                        double eta_P = 0.0, double R = 1.0) {
  const Vec2 n{std::cos(phi), std::sin(phi)};
  const Vec2 tang{-n.y, n.x};
  const Vec2 x = R * n;
  return {x - dE * tang + eta_E * n, x + dP * tang + eta_P * n};
}

}  // namespace

TEST_CASE("build_setup on a circle") {
  const GameState st{{-2, 1.2}, {2, 1.2}};
  const Speeds sp{1, 1};
  const SmoothSetup su = build_setup(st, kUnit, sp);
  CHECK(su.s_E < su.s_P);
  CHECK(su.S0 == doctest::Approx(su.s_P - su.s_E));
  // Distance condition binds: both horizons stay well inside the window.
  const double dist_E = norm(st.E) - 1.0;
  CHECK(su.t0 == doctest::Approx(dist_E / 2).epsilon(1e-9));
  CHECK(su.t0_bar == doctest::Approx(su.t0));
  CHECK(su.kappa_E == doctest::Approx(1.0));
  // Containment really holds at t0: sampled displaced vantages keep their
  // horizons inside the window (independent check through the public API).
  for (int k = 0; k < 32; ++k) {
    const double a = 2 * M_PI * k / 32;
    const Vec2 v{std::cos(a), std::sin(a)};
    CHECK_NOTHROW(max_horizon_param(st.E + sp.gamma_e * su.t0 * v, 0.0, 0.0,
                                    HorizonSideSel::Lower, su));
  }
}

TEST_CASE("build_setup accepts tangent states and mirrored orientation") {
  const GameState tangent = tangent_state(M_PI / 2, 2.0, 2.0);
  const SmoothSetup su = build_setup(tangent, kUnit, {1, 1});
  CHECK(su.S0 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(su.s_E == doctest::Approx(su.s_P).epsilon(1e-9));

  // Swapped sides: the circle lift flips the parametrisation sign.
  const GameState mirrored{{2, 1.2}, {-2, 1.2}};
  const SmoothSetup sm = build_setup(mirrored, kUnit, {1, 1});
  CHECK(sm.s_E < sm.s_P);
  CHECK(sm.S0 > 0.0);
}

TEST_CASE("build_setup rejects bad inputs") {
  CHECK_THROWS_AS(build_setup({{-2, 0.5}, {2, 0.5}}, kUnit, {1, 1}),
                  std::invalid_argument);
  // Mis-oriented table arc: the evader's lower horizon is off the window.
  const ConvexArc arc = arc_from_circle(Circle{{0, 0}, 1.0}, M_PI / 2, 1.2, 2401);
  CHECK_THROWS(build_setup({{2, 1.2}, {-2, 1.2}}, Obstacle{arc}, {1, 1}));
  CHECK_THROWS_AS(
      build_setup({{-2, 1.2}, {2, 1.2}}, Obstacle{ConvexPolygon{{{0, 0}, {1, 0}, {0, 1}}}},
                  {1, 1}),
      std::invalid_argument);
}

TEST_CASE("max_horizon_param reduces to the static horizon at t = 0") {
  const SmoothSetup su = build_setup({{-2, 1.2}, {2, 1.2}}, kUnit, {1, 1});
  CHECK(max_horizon_param(su.state.E, 1.0, 0.0, HorizonSideSel::Lower, su) ==
        doctest::Approx(su.s_E).epsilon(1e-12));
  CHECK(max_horizon_param(su.state.P, 1.0, 0.0, HorizonSideSel::Upper, su) ==
        doctest::Approx(su.s_P).epsilon(1e-12));
}

TEST_CASE("max horizon growth rate matches the leading term") {
  // Vantage (2, 0): d = sqrt(3), kappa = 1, rate gamma/(kappa d) = 1/sqrt(3).
  const SmoothSetup su = build_setup({{-2, 1.2}, {2, 1.2}}, kUnit, {1, 1});
  const Vec2 vantage{2, 0};
  const double t = 1e-5;
  const double s0 = max_horizon_param(vantage, 1.0, 0.0, HorizonSideSel::Upper, su);
  const double ds = max_horizon_param(vantage, 1.0, t, HorizonSideSel::Upper, su) - s0;
  CHECK(ds / t == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-4));
}

TEST_CASE("max horizon parameter is monotone in t") {
  const SmoothSetup su = build_setup({{-2, 1.2}, {2, 1.2}}, kUnit, {1, 0.7});
  double prevE = su.s_E, prevP = su.s_P;
  for (int i = 1; i <= 32; ++i) {
    const double t = su.t0 * i / 32;
    const double sE = max_horizon_param(su.state.E, su.sp.gamma_e, t,
                                        HorizonSideSel::Lower, su);
    const double sP = max_horizon_param(su.state.P, su.sp.gamma_p, t,
                                        HorizonSideSel::Upper, su);
    CHECK(sE >= prevE - 1e-12);
    CHECK(sP >= prevP - 1e-12);
    prevE = sE;
    prevP = sP;
  }
}

TEST_CASE("S_of_t starts at S0 and moves with the speed advantage") {
  const SmoothSetup fast_evader =
      build_setup({{-2, 1.2}, {2, 1.2}}, kUnit, {1.5, 0.5});
  CHECK(S_of_t(0.0, fast_evader) == doctest::Approx(fast_evader.S0).epsilon(1e-12));
  double prev = fast_evader.S0;
  for (int i = 1; i <= 16; ++i) {
    const double S = S_of_t(fast_evader.t0 * i / 16, fast_evader);
    CHECK(S < prev + 1e-12);
    prev = S;
  }

  // On-boundary non-usable state: the pursuer wins the first order and S
  // becomes positive immediately.
  const GameState st = tangent_state(M_PI / 2, 2.0, 1.0);
  const SmoothSetup nonusable = build_setup(st, kUnit, {1, 1});
  CHECK(nonusable.S0 == doctest::Approx(0.0).epsilon(1e-9));
  for (double t : {1e-4, 1e-3, 1e-2}) CHECK(S_of_t(t, nonusable) > 0.0);
}

TEST_CASE("value_by_representation") {
  // Boundary state: value zero.
  const SmoothSetup boundary = build_setup(tangent_state(1.0, 2.0, 1.5), kUnit, {1, 1});
  const auto v0 = value_by_representation(boundary);
  REQUIRE(v0.has_value());
  CHECK(*v0 == doctest::Approx(0.0).epsilon(1e-12));

  // Clearly escapable configuration.
  const SmoothSetup su = build_setup({{-2, 1.05}, {2, 1.05}}, kUnit, {1.0, 0.4});
  const auto v = value_by_representation(su);
  REQUIRE(v.has_value());
  CHECK(*v > 0.0);
  CHECK(*v <= su.t0);
  CHECK(std::abs(S_of_t(*v, su)) < 1e-7);
  const ValueBounds kb = value_bounds_kconst(su, 0.5);
  CHECK(kb.lower_valid);
  CHECK(*v >= kb.lower - 1e-9);
  if (kb.upper_valid) CHECK(*v <= kb.upper + 1e-9);

  // Mildly non-usable boundary state: the t = 0 root is the boundary itself,
  // the profile root is positive and above the theorem's lower bound.
  const SmoothSetup non = build_setup(tangent_state(M_PI / 2, 1.0, 0.95), kUnit, {1, 1});
  const auto vn = value_by_representation(non);
  CHECK(*vn == doctest::Approx(0.0));
  const auto vp = profile_value(non);
  REQUIRE(vp.has_value());
  CHECK(*vp > 0.0);
  const ValueBounds nb = value_bounds_kconst(non, 0.5);
  CHECK(*vp >= nb.lower - 1e-9);

  // Deep in the non-usable region the separation never returns to zero
  // inside the window: the value exceeds t0.
  const SmoothSetup deep = build_setup(tangent_state(M_PI / 2, 1.0, 0.5), kUnit, {1, 1});
  CHECK_FALSE(profile_value(deep).has_value());
}

TEST_CASE("horizon ODE freezes under tangent motion") {
  const SmoothSetup su = build_setup({{-2, 1.2}, {2, 1.2}}, kUnit, {1, 1});
  const Vec2 away_E = normalized(su.state.E - su.curve.point(su.s_E));
  const Vec2 away_P = normalized(su.state.P - su.curve.point(su.s_P));
  const HorizonPaths hp = integrate_horizons(su, away_E, away_P, su.t0, 64);
  for (double s : hp.s_E) CHECK(s == doctest::Approx(su.s_E).epsilon(1e-10));
  for (double s : hp.s_P) CHECK(s == doctest::Approx(su.s_P).epsilon(1e-10));
}

TEST_CASE("horizon ODE endpoint matches the geometric maximiser") {
  const SmoothSetup su = build_setup({{-2, 1.2}, {2, 1.2}}, kUnit, {1.0, 0.8});
  const double t = 0.5 * su.t0;
  const double sE_star =
      max_horizon_param(su.state.E, su.sp.gamma_e, t, HorizonSideSel::Lower, su);
  const double sP_star =
      max_horizon_param(su.state.P, su.sp.gamma_p, t, HorizonSideSel::Upper, su);
  const Vec2 vE = -1.0 * su.curve.outward_normal(sE_star);
  const Vec2 vP = su.curve.outward_normal(sP_star);
  const int n = 200;
  const HorizonPaths hp = integrate_horizons(su, vE, vP, t, n);
  const double tol = std::max(1e-8, std::pow(t / n, 4.0));
  CHECK(std::abs(hp.s_E.back() - sE_star) < tol);
  CHECK(std::abs(hp.s_P.back() - sP_star) < tol);
}

TEST_CASE("initial horizon speed is gamma/(kappa d) for the optimal direction") {
  const SmoothSetup su = build_setup({{-2, 1.2}, {2, 1.2}}, kUnit, {1, 1});
  const Vec2 vE = -1.0 * su.curve.outward_normal(su.s_E);
  const Vec2 vP = su.curve.outward_normal(su.s_P);
  const double t = 1e-4;
  const HorizonPaths hp = integrate_horizons(su, vE, vP, t, 8);
  CHECK((hp.s_E.back() - su.s_E) / t ==
        doctest::Approx(1.0 / (su.kappa_E * su.d_E)).epsilon(1e-3));
  CHECK((hp.s_P.back() - su.s_P) / t ==
        doctest::Approx(1.0 / (su.kappa_P * su.d_P)).epsilon(1e-3));
}

TEST_CASE("kconst quantities match hand evaluation") {
  // d_E = d_P = 1, gamma_e = 1, gamma_p = 2 -> d* = 1, C* = 0.4.
  const GameState st = tangent_state(M_PI / 2, 1.0, 1.0);
  const SmoothSetup su = build_setup(st, kUnit, {1, 2});
  const ValueBounds kb = value_bounds_kconst(su, 0.5);
  CHECK(kb.d_star == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(kb.C_star_or_C == doctest::Approx(0.4).epsilon(1e-9));

  // Interface: d* = 0 and the lower bound collapses to zero.
  const SmoothSetup iface = build_setup(tangent_state(M_PI / 2, 1.0, 1.0), kUnit, {1, 1});
  const ValueBounds ib = value_bounds_kconst(iface, 0.5);
  CHECK(ib.d_star == doctest::Approx(0.0));
  CHECK(ib.lower == doctest::Approx(0.0));
}

TEST_CASE("smooth bounds reduce to the kconst ones on a circle") {
  const GameState st = tangent_state(0.3, 1.4, 1.1, 1e-4, 1e-4);
  const SmoothSetup su = build_setup(st, kUnit, {1.0, 1.2});
  const ValueBounds sb = value_bounds_smooth(su, 0.4, 0.0);
  const ValueBounds kb = value_bounds_kconst(su, 0.4);
  CHECK(sb.lower == doctest::Approx(kb.lower).epsilon(1e-9));
  CHECK(sb.upper == doctest::Approx(kb.upper).epsilon(1e-9));
  CHECK(sb.lower_valid);  // C_L = 0 passes the hypothesis even at epsilon = 0

  // d*_kappa = 0 -> zero lower bound.
  const SmoothSetup usable = build_setup(tangent_state(0.3, 1.0, 2.0), kUnit, {1, 1});
  CHECK(value_bounds_smooth(usable, 0.4, 0.0).lower == doctest::Approx(0.0));
}

TEST_CASE("sandwich holds over random circle configurations") {
  auto g = rng_for("sandwich");
  int kept = 0;
  for (int i = 0; i < 600 && kept < 100; ++i) {
    const double phi = 2 * M_PI * uni(g);
    const double dE = 1.0 + uni(g);
    const Speeds sp{1.0, 1.0};
    // Keep t* = 2 C* (sqrt(S0) + d*) below delta t0_bar so the upper flag
    // has a chance; d* is drawn inside that budget.
    const double t0_est = 0.5 * (std::sqrt(dE * dE + 1.0) - 1.0);
    const double dmax = 0.1 * t0_est / (2.0 * dE * dE * dE);
    const double dstar = dmax * uni(g);
    const double dP = sp.gamma_p / (dstar + sp.gamma_e / dE);
    const double eta = 1e-8 * uni(g);
    const GameState st = tangent_state(phi, dE, dP, eta, eta);
    SmoothSetup su;
    try {
      su = build_setup(st, kUnit, sp);
    } catch (const std::exception&) {
      continue;
    }
    const ValueBounds kb = value_bounds_kconst(su, 0.5);
    const auto v = profile_value(su);
    if (!v || !kb.lower_valid || !kb.upper_valid) continue;
    ++kept;
    CHECK(*v >= kb.lower - 1e-9);
    CHECK(*v <= kb.upper + 1e-9);
  }
  CHECK(kept >= 100);
}

TEST_CASE("boundary profile slopes") {
  // Circle with kappa0^2 >= 1/C*: sharp regime, equal slopes kappa0 C*.
  // d_E = d_P = 1.2 gives C* = 1.2^3 > 1.
  const SmoothSetup su = build_setup(tangent_state(M_PI / 2, 1.2, 1.199), kUnit, {1, 1});
  const ProfileSlopes ps = boundary_profile(su, 0.5, 1e-4);
  CHECK(ps.sharp);
  CHECK(ps.slope_low == doctest::Approx(ps.slope_high));
  const double C_star = value_bounds_kconst(su, 0.5).C_star_or_C;
  CHECK(ps.slope_low == doctest::Approx(C_star).epsilon(1e-9));

  // Large circle: kappa0^2 < 1/C*, generic bracket with delta = 1/2.
  const Obstacle big{Circle{{0, 0}, 4.0}};
  const GameState st{{-1.0, 4.5}, {0.9, 4.5}};
  const SmoothSetup sb = build_setup(st, big, {1, 1});
  const ValueBounds kb = value_bounds_kconst(sb, 0.5);
  if (0.25 * 0.25 < 1.0 / kb.C_star_or_C) {
    const ProfileSlopes pb = boundary_profile(sb, 0.5, 1e-6);
    CHECK_FALSE(pb.sharp);
    CHECK(pb.slope_low == doctest::Approx(0.25 * kb.C_star_or_C / 1.5).epsilon(1e-9));
    CHECK(pb.slope_high == doctest::Approx(0.25 * kb.C_star_or_C / 0.5).epsilon(1e-9));
  }
  CHECK_THROWS_AS(boundary_profile(su, 0.5, 1e9), std::domain_error);
}

TEST_CASE("profile value tends to kappa0 C* d* on the non-usable side") {
  const Speeds sp{1, 1};
  for (double dstar : {1e-3, 1e-2}) {
    const double dE = 1.5;
    const double dP = sp.gamma_p / (dstar + sp.gamma_e / dE);
    const SmoothSetup su = build_setup(tangent_state(M_PI / 2, dE, dP), kUnit, sp);
    const auto v = profile_value(su);
    REQUIRE(v.has_value());
    const double C_star = value_bounds_kconst(su, 0.5).C_star_or_C;
    CHECK(*v == doctest::Approx(C_star * dstar).epsilon(0.05));
  }
}

TEST_CASE("scale covariance and rotation invariance of the value") {
  const GameState st{{-2, 1.1}, {2, 1.1}};
  const Speeds sp{1.0, 0.5};
  const SmoothSetup base = build_setup(st, kUnit, sp);
  const auto v = value_by_representation(base);
  REQUIRE(v.has_value());

  // Lengths and speeds scaled together: value unchanged.
  const double lam = 2.7;
  const Obstacle scaled{Circle{{0, 0}, lam}};
  const SmoothSetup s1 = build_setup({lam * st.E, lam * st.P}, scaled,
                                     {lam * sp.gamma_e, lam * sp.gamma_p});
  const auto v1 = value_by_representation(s1);
  REQUIRE(v1.has_value());
  CHECK(*v1 == doctest::Approx(*v).epsilon(1e-7));

  // Speeds only: value scales as 1/lambda.
  const SmoothSetup s2 =
      build_setup(st, kUnit, {lam * sp.gamma_e, lam * sp.gamma_p});
  const auto v2 = value_by_representation(s2);
  REQUIRE(v2.has_value());
  CHECK(*v2 == doctest::Approx(*v / lam).epsilon(1e-7));

  // Rigid motion.
  const double rot = 1.234;
  const Vec2 shift{0.7, -0.3};
  const Obstacle moved{Circle{shift, 1.0}};
  const SmoothSetup s3 = build_setup(
      {rotate(st.E, rot) + shift, rotate(st.P, rot) + shift}, moved, sp);
  const auto v3 = value_by_representation(s3);
  REQUIRE(v3.has_value());
  CHECK(std::abs(*v3 - *v) < 1e-9);
}

TEST_CASE("appendix distance envelopes along optimal trajectories") {
  const SmoothSetup su = build_setup({{-2, 1.2}, {2, 1.2}}, kUnit, {1, 1});
  const Circle c{{0, 0}, 1.0};
  double fittedC_E[3], fittedC_P[3];
  int slot = 0;
  for (double t : {su.t0_bar, su.t0_bar / 2, su.t0_bar / 4}) {
    const double sE_star =
        max_horizon_param(su.state.E, su.sp.gamma_e, t, HorizonSideSel::Lower, su);
    const double sP_star =
        max_horizon_param(su.state.P, su.sp.gamma_p, t, HorizonSideSel::Upper, su);
    const Vec2 vE = -1.0 * su.curve.outward_normal(sE_star);
    const Vec2 vP = su.curve.outward_normal(sP_star);
    double worstE = 0.0, worstP = 0.0;
    for (int k = 1; k <= 32; ++k) {
      const double tau = t * k / 32;
      const Vec2 E = su.state.E + tau * su.sp.gamma_e * vE;
      const Vec2 P = su.state.P + tau * su.sp.gamma_p * vP;
      const HorizonData hE = horizons(E, Obstacle{c});
      const HorizonData hP = horizons(P, Obstacle{c});
      const double dE2 = hE.lower.dist * hE.lower.dist;
      const double dP2 = hP.upper.dist * hP.upper.dist;
      const double residE =
          dE2 - (su.d_E * su.d_E - 2.0 * su.sp.gamma_e / su.kappa_E * tau);
      const double residP =
          dP2 - (su.d_P * su.d_P + 2.0 * su.sp.gamma_p / su.kappa_P * tau);
      worstE = std::max(worstE, std::abs(residE) / (t * tau));
      worstP = std::max(worstP, std::abs(residP) / (t * tau));
      // First-order signs: the evader closes in, the pursuer backs off.
      CHECK(dE2 < su.d_E * su.d_E + 1e-12);
      CHECK(dP2 > su.d_P * su.d_P - 1e-12);
    }
    fittedC_E[slot] = worstE;
    fittedC_P[slot] = worstP;
    ++slot;
  }
  // The fitted constants stay bounded as t shrinks: the correction really is
  // O(t tau), not a lower order.
  CHECK(fittedC_E[2] < 4.0 * fittedC_E[0] + 1e-9);
  CHECK(fittedC_P[2] < 4.0 * fittedC_P[0] + 1e-9);
}

TEST_CASE("appendix arclength envelopes with opposite second-order terms") {
  const SmoothSetup su = build_setup({{-2, 1.2}, {2, 1.2}}, kUnit, {1, 1});
  // Fit the quadratic coefficient of max s(t) on a small-t grid.
  auto fit_quadratic = [&](HorizonSideSel side, Vec2 vant, double speed,
                           double s0, double linear) {
    double num = 0.0, den = 0.0;
    for (int k = 1; k <= 16; ++k) {
      const double t = su.t0_bar / 64 * k / 16;
      const double s = max_horizon_param(vant, speed, t, side, su);
      const double resid = s - s0 - linear * t;
      num += resid * t * t;
      den += t * t * t * t;
    }
    return num / den;
  };
  const double qE = fit_quadratic(HorizonSideSel::Lower, su.state.E,
                                  su.sp.gamma_e, su.s_E,
                                  su.sp.gamma_e / (su.kappa_E * su.d_E));
  const double qP = fit_quadratic(HorizonSideSel::Upper, su.state.P,
                                  su.sp.gamma_p, su.s_P,
                                  su.sp.gamma_p / (su.kappa_P * su.d_P));
  const double qE_theory =
      su.sp.gamma_e * su.sp.gamma_e /
      (2.0 * su.kappa_E * su.kappa_E * su.d_E * su.d_E * su.d_E);
  const double qP_theory =
      -su.sp.gamma_p * su.sp.gamma_p /
      (2.0 * su.kappa_P * su.kappa_P * su.d_P * su.d_P * su.d_P);
  CHECK(qE > 0.0);
  CHECK(qP < 0.0);
  CHECK(qE == doctest::Approx(qE_theory).epsilon(0.05));
  CHECK(qP == doctest::Approx(qP_theory).epsilon(0.05));
}
