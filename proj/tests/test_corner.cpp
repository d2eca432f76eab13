#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "sev/corner.hpp"

using namespace sev;

namespace {

// Diamond with a right-angle corner at the origin; wedge wall normals at
// angles -pi/4 and +pi/4, so the free region spans (-3pi/4, 3pi/4).
const ConvexPolygon kDiamond{{{0.0, 0.0}, {-1.0, 1.0}, {-2.0, 0.0}, {-1.0, -1.0}}};
const CornerSpec kSpec{{0.0, 0.0}, -M_PI / 4, M_PI / 4, 1.0};

Vec2 polar(double d, double th) { return {d * std::cos(th), d * std::sin(th)}; }

// Symmetric state with the requested radii and angular gap, centred so both
// players stay away from the walls.
GameState gap_state(double dE, double dP, double gap) {
  return {polar(dE, -gap / 2), polar(dP, gap / 2)};
}

std::mt19937_64 rng_for(const char* tag) {
  std::seed_seq seq(tag, tag + std::strlen(tag));
  return std::mt19937_64(seq);
}
double uni(std::mt19937_64& g) { return (g() >> 11) * 0x1.0p-53; }

}  // namespace

TEST_CASE("to_polar basics") {
  const PolarState ps = to_polar({{0, -2}, {2, 0}}, kSpec, kDiamond);
  CHECK(ps.d_E == doctest::Approx(2.0));
  CHECK(ps.theta_E == doctest::Approx(-M_PI / 2));
  CHECK(ps.d_P == doctest::Approx(2.0));
  CHECK(ps.theta_P == doctest::Approx(0.0));
  CHECK(ps.gap() == doctest::Approx(M_PI / 2));
  CHECK_FALSE(ps.on_boundary);

  // Aligned through the corner: boundary state flagged.
  const double thE = -3 * M_PI / 4 + 0.1;
  const PolarState pb =
      to_polar({polar(2.0, thE), polar(2.0, thE + M_PI)}, kSpec, kDiamond);
  CHECK(pb.on_boundary);

  // Both players on the pursuer side: angular constraints violated.
  CHECK_THROWS_AS(to_polar({{2, 0.1}, {2, 1.0}}, kSpec, kDiamond),
                  std::invalid_argument);
}

TEST_CASE("t0_corner conditions") {
  // Far-from-wall configuration: the distance condition binds.
  const GameState far{{0, -2}, {2, 0}};
  const PolarState ps = to_polar(far, kSpec, kDiamond);
  const double t0 = t0_corner(ps, far, kSpec, kDiamond, {1, 1});
  const double dist_E = obstacle_signed_distance(far.E, Obstacle{kDiamond});
  const double dist_P = obstacle_signed_distance(far.P, Obstacle{kDiamond});
  CHECK(t0 == doctest::Approx(std::min(dist_E, dist_P) / 2).epsilon(1e-9));

  // Evader close to the wall direction: the pinning condition binds.
  const GameState near_wall{polar(2.0, -3 * M_PI / 4 + 0.2), {2, 0}};
  const PolarState pw = to_polar(near_wall, kSpec, kDiamond);
  const double tw = t0_corner(pw, near_wall, kSpec, kDiamond, {1, 1});
  const double dw = obstacle_signed_distance(near_wall.E, Obstacle{kDiamond});
  CHECK(tw < std::min(dw, obstacle_signed_distance(near_wall.P, Obstacle{kDiamond})) / 2);
  CHECK(tw > 0.0);
}

TEST_CASE("S_corner closed form") {
  const GameState st = gap_state(1.0, 2.0, M_PI - 0.1);
  const PolarState ps = to_polar(st, kSpec, kDiamond);
  const Speeds sp{1, 1};
  CHECK(S_corner(0.0, ps, sp) == doctest::Approx(M_PI - 0.1).epsilon(1e-12));

  // Equal arcsin arguments: S stays at the initial gap.
  const PolarState eq = to_polar(gap_state(1.0, 2.0, 2.0), kSpec, kDiamond);
  const Speeds sp2{1, 2};
  for (double t : {0.1, 0.3, 0.45})
    CHECK(S_corner(t, eq, sp2) == doctest::Approx(eq.gap()).epsilon(1e-12));

  // Direct arcsin evaluation, series cross-check frozen to 1e-7:
  // S(0.19) = pi - 0.1 + asin(0.19) - asin(0.095) = pi - 0.00398134.
  CHECK(S_corner(0.19, ps, sp) == doctest::Approx(M_PI - 0.00398134).epsilon(1e-7));

  CHECK_THROWS_AS(S_corner(3.0, ps, sp), std::domain_error);
}

TEST_CASE("S_corner is convex when the evader is faster around the corner") {
  const PolarState ps = to_polar(gap_state(1.0, 2.0, M_PI - 0.1), kSpec, kDiamond);
  const Speeds sp{1, 1};  // gamma_e/d_E = 1 > gamma_p/d_P = 0.5
  const double h = 1e-3;
  for (int i = 1; i < 160; ++i) {
    const double t = i * h;
    const double dd = S_corner(t + h, ps, sp) - 2 * S_corner(t, ps, sp) +
                      S_corner(t - h, ps, sp);
    CHECK(dd >= -1e-12);
  }
}

TEST_CASE("value_corner representation") {
  const Speeds sp{1, 1};

  // gamma_e d_P <= gamma_p d_E: the corner is useless, value >= t0.
  const GameState slow = gap_state(2.0, 1.0, M_PI - 0.1);
  const PolarState ps_slow = to_polar(slow, kSpec, kDiamond);
  const double t0s = t0_corner(ps_slow, slow, kSpec, kDiamond, sp);
  CHECK_FALSE(value_corner(ps_slow, sp, t0s).has_value());

  // The 0.1977 bisection root with its 0.2 upper bound.
  const GameState fast = gap_state(1.0, 2.0, M_PI - 0.1);
  const PolarState ps_fast = to_polar(fast, kSpec, kDiamond);
  const double t0f = t0_corner(ps_fast, fast, kSpec, kDiamond, sp);
  REQUIRE(t0f > 0.2);
  const auto v = value_corner(ps_fast, sp, t0f);
  REQUIRE(v.has_value());
  // Independent bisection on the closed form, frozen: t* = 0.197741.
  CHECK(*v == doctest::Approx(0.197741).epsilon(1e-4));
  CHECK(*v <= 0.1 / (1.0 - 0.5) + 1e-12);
  CHECK(S_corner(*v, ps_fast, sp) == doctest::Approx(M_PI).epsilon(1e-9));

  // Boundary state on the winning side: value zero.
  const double thE = -3 * M_PI / 4 + 0.1;
  const PolarState pb =
      to_polar({polar(1.0, thE), polar(2.0, thE + M_PI)}, kSpec, kDiamond);
  const auto vb = value_corner(pb, sp, 0.1);
  REQUIRE(vb.has_value());
  CHECK(*vb == doctest::Approx(0.0));
}

TEST_CASE("corner_bounds") {
  const Speeds sp{1, 1};
  const GameState slow = gap_state(2.0, 1.0, M_PI - 0.1);
  const PolarState ps_slow = to_polar(slow, kSpec, kDiamond);
  const CornerBounds cbs = corner_bounds(ps_slow, sp, 0.3);
  CHECK_FALSE(cbs.evader_side);
  CHECK(cbs.lower == doctest::Approx(0.3));
  CHECK(std::isinf(cbs.upper));

  const GameState fast = gap_state(1.0, 2.0, M_PI - 0.1);
  const PolarState ps_fast = to_polar(fast, kSpec, kDiamond);
  const CornerBounds cbf = corner_bounds(ps_fast, sp, 0.3);
  CHECK(cbf.evader_side);
  CHECK(cbf.upper == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(cbf.upper_valid);  // gap = pi - 0.1 >= pi - 0.3 * 0.5

  const PolarState wide = to_polar(gap_state(1.0, 2.0, M_PI - 0.5), kSpec, kDiamond);
  CHECK_FALSE(corner_bounds(wide, sp, 0.3).upper_valid);
}

TEST_CASE("value_corner approaches zero at the theorem rate") {
  const Speeds sp{1, 1};
  for (double eps : {0.05, 0.01, 0.002}) {
    const GameState st = gap_state(1.0, 2.0, M_PI - eps);
    const PolarState ps = to_polar(st, kSpec, kDiamond);
    const double t0 = t0_corner(ps, st, kSpec, kDiamond, sp);
    const auto v = value_corner(ps, sp, t0);
    REQUIRE(v.has_value());
    CHECK(*v <= eps / 0.5 + 1e-12);
    CHECK(*v > 0.0);
  }
}

TEST_CASE("jump dichotomy across the barrier") {
  const Speeds sp{1, 1};
  const double gap = M_PI - 1e-4;
  // Fixed angles, radius sweep of the pursuer across gamma_e d_P = gamma_p d_E.
  for (double dP : {1.02, 1.05, 1.2}) {
    const GameState st = gap_state(1.0, dP, gap);
    const PolarState ps = to_polar(st, kSpec, kDiamond);
    const double t0 = t0_corner(ps, st, kSpec, kDiamond, sp);
    const auto v = value_corner(ps, sp, t0);
    REQUIRE(v.has_value());
    CHECK(*v <= 1e-4 / (sp.gamma_e / 1.0 - sp.gamma_p / dP) + 1e-12);
  }
  for (double dP : {0.98, 0.9, 0.8}) {
    const GameState st = gap_state(1.0, dP, gap);
    const PolarState ps = to_polar(st, kSpec, kDiamond);
    const double t0 = t0_corner(ps, st, kSpec, kDiamond, sp);
    CHECK(t0 > 0.05);
    CHECK_FALSE(value_corner(ps, sp, t0).has_value());
  }
}

TEST_CASE("value_corner invariance under rotation and radius-speed scaling") {
  PolarState ps;
  ps.d_E = 1.0;
  ps.theta_E = -1.4;
  ps.d_P = 2.0;
  ps.theta_P = M_PI - 1.5;
  ps.d_underbar = 1.0;
  const Speeds sp{1.0, 0.6};
  const auto v = value_corner(ps, sp, 0.5);
  REQUIRE(v.has_value());

  // Rotation about the corner shifts both angles, the gap is unchanged.
  PolarState rot = ps;
  rot.theta_E += 0.2;
  rot.theta_P += 0.2;
  const auto vr = value_corner(rot, sp, 0.5);
  REQUIRE(vr.has_value());
  CHECK(*vr == doctest::Approx(*v).epsilon(1e-12));

  // Radii and speeds scaled together leave the value alone.
  const double lam = 3.1;
  PolarState sc = ps;
  sc.d_E *= lam;
  sc.d_P *= lam;
  sc.d_underbar *= lam;
  const auto vs = value_corner(sc, {lam * sp.gamma_e, lam * sp.gamma_p}, 0.5);
  REQUIRE(vs.has_value());
  CHECK(*vs == doctest::Approx(*v).epsilon(1e-10));
}

TEST_CASE("barrier membership") {
  const PolarState on = to_polar(gap_state(1.0, 2.0, 2.5), kSpec, kDiamond);
  CHECK(barrier_membership(on, {1, 2}, 1e-9));
  CHECK_FALSE(barrier_membership(on, {1, 1}, 1e-9));

  PolarState out;  // angles out of the validity region: never on the barrier
  out.d_E = 1.0;
  out.d_P = 2.0;
  out.theta_E = 0.0;
  out.theta_P = M_PI;  // gap pi: boundary, outside the open region
  CHECK_FALSE(barrier_membership(out, {1, 2}, 1e-9));
}

TEST_CASE("barrier mimic conserves the relation") {
  const PolarState ps = to_polar(gap_state(1.0, 2.0, 2.6), kSpec, kDiamond);
  const Speeds sp{1, 2};
  REQUIRE(barrier_membership(ps, sp, 1e-9));

  // Radially passive opponent: both radii frozen, zero drift exactly.
  const auto ang = barrier_mimic_simulate(
      ps, sp, kSpec, [](double) { return PolarControl{0.0, 1.0}; },
      BarrierDefender::Evader, 1e-3, 0.05);
  CHECK(ang.max_drift == 0.0);
  CHECK(ang.trajectory.back().d_E == doctest::Approx(ps.d_E));
  CHECK(ang.trajectory.back().d_P == doctest::Approx(ps.d_P));

  // Pure radial opponent: radii grow in ratio, one-step mimic lag only.
  const double dt = 1e-3;
  const auto rad = barrier_mimic_simulate(
      ps, sp, kSpec, [](double) { return PolarControl{1.0, 0.0}; },
      BarrierDefender::Evader, dt, 0.05);
  CHECK(rad.max_drift <= sp.gamma_e * sp.gamma_p * dt * (1 + 1e-9));
  const auto& last = rad.trajectory.back();
  CHECK(sp.gamma_e * last.d_P ==
        doctest::Approx(sp.gamma_p * last.d_E).epsilon(1e-2));

  CHECK_THROWS_AS(barrier_mimic_simulate(
                      ps, sp, kSpec, [](double) { return PolarControl{1.0, 1.0}; },
                      BarrierDefender::Evader, 1e-3, 0.05),
                  std::invalid_argument);
}

TEST_CASE("barrier drift halves with dt") {
  const PolarState ps = to_polar(gap_state(1.0, 2.0, 2.6), kSpec, kDiamond);
  const Speeds sp{1, 2};
  auto g = rng_for("barrier-dt");
  for (int trial = 0; trial < 20; ++trial) {
    const int pieces = 100;
    std::vector<PolarControl> plan(pieces);
    for (auto& pc : plan) {
      const double mag = uni(g);
      const double dir = 2 * M_PI * uni(g);
      pc = {mag * std::cos(dir), mag * std::sin(dir)};
    }
    const double T = 0.04;
    auto opp = [&](double t) {
      return plan[std::min<int>(pieces - 1, int(t / T * pieces))];
    };
    const double dt = 2e-4;
    const auto coarse = barrier_mimic_simulate(ps, sp, kSpec, opp,
                                               BarrierDefender::Pursuer, dt, T);
    const auto fine = barrier_mimic_simulate(ps, sp, kSpec, opp,
                                             BarrierDefender::Pursuer, dt / 2, T);
    if (coarse.max_drift < 1e-12) continue;  // radially quiet draw
    const double ratio = coarse.max_drift / fine.max_drift;
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.3);
    CHECK(coarse.max_drift <= sp.gamma_e * sp.gamma_p * dt * (1 + 1e-9));
  }
}

TEST_CASE("barrier clamp on inward radial push") {
  const PolarState ps = to_polar(gap_state(1.0, 2.0, 2.6), kSpec, kDiamond);
  const Speeds sp{1, 2};
  const auto res = barrier_mimic_simulate(
      ps, sp, kSpec, [](double) { return PolarControl{-1.0, 0.0}; },
      BarrierDefender::Evader, 1e-3, 1.2);
  CHECK(res.clamped);
}
