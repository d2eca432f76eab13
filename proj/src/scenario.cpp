#include "sev/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sev/smooth.hpp"

namespace sev {

using nlohmann::json;

double Scenario::boundary_tol() const {
  if (params.boundary_tol > 0.0) return params.boundary_tol;
  return 1e-6 * obstacle_extent(obstacle);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int worker_count() {
  if (const char* env = std::getenv("SEV_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hc, 1u, 8u));
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

Vec2 parse_vec(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2)
    throw std::runtime_error(std::string("schema: ") + what + " must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Obstacle parse_obstacle(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "circle") {
    Circle c;
    c.center = parse_vec(j.at("center"), "circle.center");
    c.radius = j.at("radius").get<double>();
    if (!(c.radius > 0.0)) throw std::runtime_error("schema: circle.radius must be > 0");
    return c;
  }
  if (type == "polygon") {
    ConvexPolygon p;
    for (const auto& v : j.at("vertices")) p.vertices.push_back(parse_vec(v, "vertex"));
    p.validate();
    return p;
  }
  if (type == "arc") {
    const std::string mode = j.value("mode", "circle");
    if (mode == "circle") {
      Circle c;
      c.center = parse_vec(j.at("center"), "arc.center");
      c.radius = j.at("radius").get<double>();
      const double phi = j.value("phi_center", 0.0);
      const double hl = j.at("half_len").get<double>();
      const int n = j.value("n_samples", 4001);
      return arc_from_circle(c, phi, hl, n);
    }
    if (mode == "kappa_table") {
      const double L = j.at("L").get<double>();
      const int n = j.value("n_samples", 4001);
      const Vec2 p0 = parse_vec(j.at("p0"), "arc.p0");
      const double phi0 = j.at("phi0").get<double>();
      const double kappa0 = j.at("kappa0").get<double>();
      const double C_L = j.at("C_L").get<double>();
      std::vector<std::pair<double, double>> tab;
      for (const auto& row : j.at("table"))
        tab.emplace_back(row[0].get<double>(), row[1].get<double>());
      if (tab.size() < 2) throw std::runtime_error("schema: arc.table needs >= 2 rows");
      auto kappa = [tab](double s) {
        if (s <= tab.front().first) return tab.front().second;
        if (s >= tab.back().first) return tab.back().second;
        for (std::size_t i = 1; i < tab.size(); ++i)
          if (s <= tab[i].first) {
            const double w =
                (s - tab[i - 1].first) / (tab[i].first - tab[i - 1].first);
            return (1.0 - w) * tab[i - 1].second + w * tab[i].second;
          }
        return tab.back().second;
      };
      ConvexArc arc = arc_from_curvature(kappa, L, n | 1, p0, phi0, kappa0, C_L);
      arc.validate();
      return arc;
    }
    throw std::runtime_error("schema: unknown arc.mode: " + mode);
  }
  throw std::runtime_error("schema: unknown obstacle.type: " + type);
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("schema: ") + e.what());
  }
  try {
    Scenario sc;
    sc.version = j.at("version").get<int>();
    if (sc.version != 1) throw std::runtime_error("schema: unsupported version");
    sc.id = j.value("id", "scenario");
    sc.seed = j.value("seed", 0ull);
    sc.obstacle = parse_obstacle(j.at("obstacle"));
    sc.speeds.gamma_e = j.at("speeds").at("gamma_e").get<double>();
    sc.speeds.gamma_p = j.at("speeds").at("gamma_p").get<double>();
    if (!(sc.speeds.gamma_e > 0.0) || !(sc.speeds.gamma_p > 0.0))
      throw std::runtime_error("schema: speeds must be positive");
    for (const auto& s : j.at("states")) {
      GameState st;
      st.E = parse_vec(s.at("E"), "state.E");
      st.P = parse_vec(s.at("P"), "state.P");
      if (obstacle_signed_distance(st.E, sc.obstacle) < 0.0 ||
          obstacle_signed_distance(st.P, sc.obstacle) < 0.0)
        throw std::runtime_error("schema: state inside the obstacle");
      sc.states.push_back(st);
    }
    if (j.contains("params")) {
      const json& p = j["params"];
      auto& ap = sc.params;
      ap.delta = p.value("delta", ap.delta);
      ap.epsilon = p.value("epsilon", ap.epsilon);
      ap.boundary_tol = p.value("boundary_tol", ap.boundary_tol);
      ap.interface_tol = p.value("interface_tol", ap.interface_tol);
      ap.barrier_tol = p.value("barrier_tol", ap.barrier_tol);
      if (p.contains("oracle")) {
        const json& o = p["oracle"];
        ap.oracle.dt = o.value("dt", ap.oracle.dt);
        ap.oracle.depth = o.value("depth", ap.oracle.depth);
        ap.oracle.n_dirs_e = o.value("n_dirs_e", ap.oracle.n_dirs_e);
        ap.oracle.n_dirs_p = o.value("n_dirs_p", ap.oracle.n_dirs_p);
      }
      if (p.contains("grid")) {
        const json& g = p["grid"];
        for (int a = 0; a < 4; ++a) {
          ap.grid.lo[a] = g.at("lo")[a].get<double>();
          ap.grid.hi[a] = g.at("hi")[a].get<double>();
          ap.grid.n[a] = g.at("n")[a].get<int>();
        }
        ap.has_grid = true;
        ap.grid_tol = g.value("tol", ap.grid_tol);
        ap.max_sweeps = g.value("max_sweeps", ap.max_sweeps);
      }
      if (p.contains("corner")) {
        const json& c = p["corner"];
        CornerSpec cs;
        cs.corner = parse_vec(c.at("corner"), "corner.corner");
        cs.theta1 = c.at("theta1").get<double>();
        cs.theta2 = c.at("theta2").get<double>();
        cs.r = c.value("r", 1.0);
        cs.validate();
        ap.corner = cs;
      }
    }
    return sc;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("schema: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("schema: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

namespace {

const char* label_name(BoundaryLabel l) {
  switch (l) {
    case BoundaryLabel::Usable: return "usable";
    case BoundaryLabel::NonUsable: return "non_usable";
    case BoundaryLabel::Interface: return "interface";
    default: return "not_on_boundary";
  }
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

}  // namespace

int run_classify(const Scenario& sc, std::ostream& csv) {
  csv << "scenario_id,state_id,label,margin,d_E,d_P,tangency_x,tangency_y,note\n";
  for (std::size_t i = 0; i < sc.states.size(); ++i) {
    csv << sc.id << ',' << i << ',';
    try {
      const Classification c =
          classify_boundary(sc.states[i], sc.obstacle, sc.speeds,
                            sc.boundary_tol(), sc.params.interface_tol);
      csv << label_name(c.label) << ',' << fmt(c.margin) << ',' << fmt(c.d_E)
          << ',' << fmt(c.d_P) << ',' << fmt(c.tangency.x) << ','
          << fmt(c.tangency.y) << ",\n";
    } catch (const std::exception& e) {
      csv << "error,nan,nan,nan,nan,nan," << sanitize(e.what()) << "\n";
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// value
// ---------------------------------------------------------------------------

namespace {

struct ValueRow {
  std::string cells;
  int violations = 0;
};

ValueRow value_row(const Scenario& sc, std::size_t i, const std::string& method,
                   const SweepField* field) {
  const GameState& st = sc.states[i];
  const bool is_polygon = std::holds_alternative<ConvexPolygon>(sc.obstacle);
  const bool want_rep = method == "rep" || method == "all";
  const bool want_bounds = method == "bounds" || method == "all";
  const bool want_corner = method == "corner" || method == "all";
  const bool want_oracle = method == "oracle" || method == "all";

  const double nan = std::numeric_limits<double>::quiet_NaN();
  double S0 = nan, d_E = nan, d_P = nan, d_star = nan, d_star_kappa = nan;
  double C_star = nan, C_EP = nan, t0 = nan, t0_bar = nan, V_rep = nan;
  double lower = nan, upper = nan, oracle_v = nan, sweep_v = nan;
  bool lower_valid = false, upper_valid = false;
  int barrier_member = -1;
  std::string cls = "";
  std::string note;
  int violations = 0;

  try {
    const Classification c = classify_boundary(
        st, sc.obstacle, sc.speeds, sc.boundary_tol(), sc.params.interface_tol);
    cls = label_name(c.label);
  } catch (const std::exception&) {
    cls = "ambiguous";
  }

  try {
    if (!is_polygon && (want_rep || want_bounds)) {
      const SmoothSetup su = build_setup(st, sc.obstacle, sc.speeds);
      S0 = su.S0;
      d_E = su.d_E;
      d_P = su.d_P;
      t0 = su.t0;
      t0_bar = su.t0_bar;
      if (want_rep) {
        const auto v = value_by_representation(su);
        V_rep = v ? *v : nan;
      }
      if (want_bounds) {
        const ValueBounds kb = value_bounds_kconst(su, sc.params.delta);
        const ValueBounds sb = value_bounds_smooth(
            su, std::min(sc.params.delta, 0.5 * (1.0 - sc.params.epsilon)),
            sc.params.epsilon);
        d_star = kb.d_star;
        C_star = kb.C_star_or_C;
        d_star_kappa = sb.d_star;
        C_EP = sb.C_star_or_C;
        lower = kb.lower;
        upper = kb.upper;
        lower_valid = kb.lower_valid;
        upper_valid = kb.upper_valid;
        if (want_rep && !std::isnan(V_rep)) {
          if (lower_valid && V_rep < lower - 1e-9) ++violations;
          if (upper_valid && V_rep > upper + 1e-9) ++violations;
        }
      }
    } else if (is_polygon && want_corner) {
      if (!sc.params.corner)
        throw std::runtime_error("corner analysis needs params.corner");
      const auto& poly = std::get<ConvexPolygon>(sc.obstacle);
      const PolarState ps = to_polar(st, *sc.params.corner, poly);
      d_E = ps.d_E;
      d_P = ps.d_P;
      S0 = ps.gap();
      t0 = t0_corner(ps, st, *sc.params.corner, poly, sc.speeds);
      const auto v = value_corner(ps, sc.speeds, t0);
      V_rep = v ? *v : nan;
      const CornerBounds cb = corner_bounds(ps, sc.speeds, t0);
      lower = cb.lower;
      upper = cb.upper;
      lower_valid = true;
      upper_valid = cb.upper_valid;
      d_star = std::max(0.0, sc.speeds.gamma_e / ps.d_E - sc.speeds.gamma_p / ps.d_P);
      barrier_member = barrier_membership(ps, sc.speeds, sc.params.barrier_tol);
      if (!std::isnan(V_rep)) {
        if (V_rep < lower - 1e-9) ++violations;
        if (upper_valid && V_rep > upper + 1e-9) ++violations;
      }
    }
  } catch (const std::exception& e) {
    note = sanitize(e.what());
  }

  if (want_oracle && note.empty()) {
    try {
      DiscreteGameConfig cfg = sc.params.oracle;
      if (!std::isnan(t0))
        cfg.depth = std::min<int>(cfg.depth,
                                  std::max(1, int(std::floor(t0 / cfg.dt))));
      const auto v = discrete_value(st, sc.obstacle, sc.speeds, cfg);
      oracle_v = v ? *v : nan;
    } catch (const std::exception& e) {
      note = sanitize(e.what());
    }
  }
  if (field) sweep_v = field->sample(st);

  double cross = nan;
  if (!std::isnan(V_rep) && !std::isnan(oracle_v))
    cross = std::abs(V_rep - oracle_v) / std::max(V_rep, sc.params.oracle.dt);

  std::ostringstream os;
  os << sc.id << ',' << i << ',' << cls << ',' << fmt(S0) << ',' << fmt(d_E)
     << ',' << fmt(d_P) << ',' << fmt(d_star) << ',' << fmt(d_star_kappa) << ','
     << fmt(C_star) << ',' << fmt(C_EP) << ',' << fmt(t0) << ',' << fmt(t0_bar)
     << ',' << fmt(V_rep) << ',' << fmt(lower) << ',' << fmt(upper) << ','
     << (lower_valid ? 1 : 0) << ',' << (upper_valid ? 1 : 0) << ','
     << fmt(oracle_v) << ',' << fmt(sweep_v) << ',' << barrier_member << ','
     << fmt(cross) << ',' << violations << ',' << note << '\n';
  return {os.str(), violations};
}

}  // namespace

int run_value(const Scenario& sc, const ValueOptions& opt, std::ostream& csv) {
  static const char* kMethods[] = {"rep", "bounds", "corner", "oracle", "sweep", "all"};
  if (std::find_if(std::begin(kMethods), std::end(kMethods), [&](const char* m) {
        return opt.method == m;
      }) == std::end(kMethods))
    throw std::runtime_error("schema: unknown method " + opt.method);

  std::optional<SweepField> field;
  if (opt.method == "sweep" || opt.method == "all") {
    if (!sc.params.has_grid)
      throw std::runtime_error("schema: sweep method needs params.grid");
    SweepParams sp;
    sp.tol = sc.params.grid_tol;
    sp.max_sweeps = sc.params.max_sweeps;
    sp.interface_tol = sc.params.interface_tol;
    field = sweep_solve(sc.obstacle, sc.speeds, sc.params.grid, sp);
  }

  csv << "scenario_id,state_id,classification,S0,d_E,d_P,d_star,d_star_kappa,"
         "C_star,C_EP,t0,t0_bar,V_rep,lower,upper,lower_valid,upper_valid,"
         "oracle_value,sweep_value,barrier_member,cross_oracle_rel,"
         "sandwich_violations,note\n";

  const int workers = std::min<int>(worker_count(), std::max<std::size_t>(sc.states.size(), 1));
  std::vector<ValueRow> rows(sc.states.size());
  if (workers <= 1 || sc.states.size() <= 1) {
    for (std::size_t i = 0; i < sc.states.size(); ++i)
      rows[i] = value_row(sc, i, opt.method, field ? &*field : nullptr);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= sc.states.size()) return;
          rows[i] = value_row(sc, i, opt.method, field ? &*field : nullptr);
        }
      });
    for (auto& th : pool) th.join();
  }
  int violations = 0;
  for (const auto& r : rows) {
    csv << r.cells;
    violations += r.violations;
  }
  return violations > 0 ? kExitInvariant : kExitOk;
}

// ---------------------------------------------------------------------------
// scurve
// ---------------------------------------------------------------------------

int run_scurve(const Scenario& sc, int t_samples, std::ostream& csv) {
  if (sc.states.empty()) {
    csv << "t,S\n";
    return kExitOk;
  }
  if (t_samples < 2) throw std::runtime_error("schema: t_samples >= 2");
  const GameState& st = sc.states.front();
  csv << "t,S\n";
  if (std::holds_alternative<ConvexPolygon>(sc.obstacle)) {
    if (!sc.params.corner)
      throw std::runtime_error("schema: corner scurve needs params.corner");
    const auto& poly = std::get<ConvexPolygon>(sc.obstacle);
    const PolarState ps = to_polar(st, *sc.params.corner, poly);
    const double t0 = t0_corner(ps, st, *sc.params.corner, poly, sc.speeds);
    for (int i = 0; i < t_samples; ++i) {
      const double t = t0 * i / (t_samples - 1);
      csv << fmt(t) << ',' << fmt(S_corner(t, ps, sc.speeds)) << '\n';
    }
  } else {
    const SmoothSetup su = build_setup(st, sc.obstacle, sc.speeds);
    for (int i = 0; i < t_samples; ++i) {
      const double t = su.t0 * i / (t_samples - 1);
      csv << fmt(t) << ',' << fmt(S_of_t(t, su)) << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// profile
// ---------------------------------------------------------------------------

int run_profile(const Scenario& sc, const ProfileGrid& grid, std::ostream& csv) {
  if (grid.count < 1 || !(grid.lo > 0.0) || !(grid.hi > grid.lo))
    throw std::runtime_error("schema: bad profile grid");
  csv << "param,V,lower,upper\n";
  auto param_at = [&](int i) {
    if (grid.count == 1) return grid.lo;
    const double w = double(i) / (grid.count - 1);
    return grid.log_spaced ? grid.lo * std::pow(grid.hi / grid.lo, w)
                           : grid.lo + w * (grid.hi - grid.lo);
  };

  if (const Circle* c = std::get_if<Circle>(&sc.obstacle)) {
    // States on the tangent line at the top of the circle, d_E fixed from the
    // first scenario state (or 2R), d_P chosen to hit the requested d*.
    const double ge = sc.speeds.gamma_e, gp = sc.speeds.gamma_p;
    double dE_ref = 2.0 * c->radius;
    if (!sc.states.empty()) {
      const auto h = horizons(sc.states.front().E, sc.obstacle);
      dE_ref = h.lower.dist;
    }
    const Vec2 top = c->center + Vec2{0.0, c->radius};
    for (int i = 0; i < grid.count; ++i) {
      const double d_star = param_at(i);
      const double d_P = gp / (d_star + ge / dE_ref);
      const GameState st{top + Vec2{-dE_ref, 0.0}, top + Vec2{d_P, 0.0}};
      const SmoothSetup su = build_setup(st, sc.obstacle, sc.speeds);
      const auto v = profile_value(su);
      const ProfileSlopes slopes =
          boundary_profile(su, sc.params.delta, d_star * 1.0000001);
      csv << fmt(d_star) << ','
          << fmt(v ? *v : std::numeric_limits<double>::quiet_NaN()) << ','
          << fmt(slopes.slope_low * d_star) << ','
          << fmt(slopes.slope_high * d_star) << '\n';
    }
    return kExitOk;
  }
  if (const ConvexPolygon* poly = std::get_if<ConvexPolygon>(&sc.obstacle)) {
    if (!sc.params.corner)
      throw std::runtime_error("schema: corner profile needs params.corner");
    if (sc.states.empty()) throw std::runtime_error("schema: profile needs a state");
    // Radius sweep across the barrier at the gap of the first state: the
    // param is gamma_e d_P - gamma_p d_E.
    const PolarState base = to_polar(sc.states.front(), *sc.params.corner, *poly);
    const double ge = sc.speeds.gamma_e, gp = sc.speeds.gamma_p;
    for (int i = 0; i < grid.count; ++i) {
      const double w = grid.count == 1 ? 0.0 : -1.0 + 2.0 * i / (grid.count - 1);
      const double x = w * grid.hi;  // signed crossing parameter
      PolarState ps = base;
      ps.d_P = (gp * ps.d_E + x) / ge;
      const Vec2 dir{std::cos(ps.theta_P), std::sin(ps.theta_P)};
      const GameState st{sc.states.front().E,
                         sc.params.corner->corner + ps.d_P * dir};
      const double t0 =
          t0_corner(ps, st, *sc.params.corner, *poly, sc.speeds);
      const auto v = value_corner(ps, sc.speeds, t0);
      const CornerBounds cb = corner_bounds(ps, sc.speeds, t0);
      csv << fmt(x) << ','
          << fmt(v ? *v : std::numeric_limits<double>::quiet_NaN()) << ','
          << fmt(cb.lower) << ',' << fmt(cb.upper) << '\n';
    }
    return kExitOk;
  }
  throw std::runtime_error("schema: profile supports circle or polygon obstacles");
}

// ---------------------------------------------------------------------------
// barrier
// ---------------------------------------------------------------------------

namespace {

std::function<PolarControl(double)> make_opponent(const std::string& spec,
                                                  double T) {
  if (spec == "radial") return [](double) { return PolarControl{1.0, 0.0}; };
  if (spec == "angular") return [](double) { return PolarControl{0.0, 1.0}; };
  if (spec.rfind("random:", 0) == 0) {
    const auto rest = spec.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("schema: opponent random:<seed>:<pieces>");
    const std::uint64_t seed = std::strtoull(rest.substr(0, colon).c_str(), nullptr, 10);
    const int pieces = std::atoi(rest.substr(colon + 1).c_str());
    if (pieces < 1) throw std::runtime_error("schema: opponent pieces >= 1");
    std::mt19937_64 rng(seed);
    auto uni = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
    std::vector<PolarControl> plan(pieces);
    for (auto& pc : plan) {
      const double mag = uni();
      const double ang = 2.0 * M_PI * uni();
      pc = {mag * std::cos(ang), mag * std::sin(ang)};
    }
    return [plan, pieces, T](double t) {
      const int k = std::min<int>(pieces - 1, int(t / T * pieces));
      return plan[k];
    };
  }
  throw std::runtime_error("schema: unknown opponent spec " + spec);
}

}  // namespace

int run_barrier(const Scenario& sc, const BarrierOptions& opt,
                std::ostream& csv, std::ostream& summary) {
  const auto* poly = std::get_if<ConvexPolygon>(&sc.obstacle);
  if (!poly || !sc.params.corner)
    throw std::runtime_error("schema: barrier needs a polygon obstacle and params.corner");
  if (sc.states.empty()) throw std::runtime_error("schema: barrier needs a state");
  const PolarState ps = to_polar(sc.states.front(), *sc.params.corner, *poly);
  const auto opponent = make_opponent(opt.opponent, opt.T);
  const BarrierSimResult res =
      barrier_mimic_simulate(ps, sc.speeds, *sc.params.corner, opponent,
                             opt.defender, opt.dt, opt.T, sc.params.barrier_tol);
  csv << "t,d_E,theta_E,d_P,theta_P,drift\n";
  for (const auto& r : res.trajectory)
    csv << fmt(r.t) << ',' << fmt(r.d_E) << ',' << fmt(r.theta_E) << ','
        << fmt(r.d_P) << ',' << fmt(r.theta_P) << ',' << fmt(r.drift) << '\n';
  summary << "max_drift=" << fmt(res.max_drift)
          << " clamped=" << (res.clamped ? 1 : 0) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int run_sweep(const Scenario& sc, const SweepOptions& opt, std::ostream& csv,
              std::ostream& summary) {
  if (!sc.params.has_grid) throw std::runtime_error("schema: sweep needs params.grid");
  GridSpec grid = sc.params.grid;
  if (opt.n_override > 0)
    for (int a = 0; a < 4; ++a)
      if (grid.n[a] > 1) grid.n[a] = opt.n_override;
  SweepParams sp;
  sp.tol = opt.tol > 0.0 ? opt.tol : sc.params.grid_tol;
  sp.max_sweeps = sc.params.max_sweeps;
  sp.interface_tol = sc.params.interface_tol;

  SweepField field;
  try {
    field = sweep_solve(sc.obstacle, sc.speeds, grid, sp);
  } catch (const std::runtime_error& e) {
    summary << "converged=0 error=" << e.what() << '\n';
    return kExitNoConvergence;
  }

  csv << "scenario_id,state_id,V_rep,sweep_value,rel_diff\n";
  for (std::size_t i = 0; i < sc.states.size(); ++i) {
    double vrep = std::numeric_limits<double>::quiet_NaN();
    try {
      if (std::holds_alternative<ConvexPolygon>(sc.obstacle)) {
        if (sc.params.corner) {
          const auto& poly = std::get<ConvexPolygon>(sc.obstacle);
          const PolarState ps = to_polar(sc.states[i], *sc.params.corner, poly);
          const double t0 =
              t0_corner(ps, sc.states[i], *sc.params.corner, poly, sc.speeds);
          const auto v = value_corner(ps, sc.speeds, t0);
          if (v) vrep = *v;
        }
      } else {
        const SmoothSetup su = build_setup(sc.states[i], sc.obstacle, sc.speeds);
        const auto v = value_by_representation(su);
        if (v) vrep = *v;
      }
    } catch (const std::exception&) {
    }
    const double sv = field.sample(sc.states[i]);
    const double rel = (!std::isnan(vrep) && !std::isnan(sv) && vrep > 0.0)
                           ? std::abs(sv - vrep) / vrep
                           : std::numeric_limits<double>::quiet_NaN();
    csv << sc.id << ',' << i << ',' << fmt(vrep) << ',' << fmt(sv) << ','
        << fmt(rel) << '\n';
  }
  summary << "converged=1 sweeps=" << field.sweeps
          << " residual=" << fmt(field.residual) << '\n';
  if (!opt.dump_path.empty()) {
    std::ofstream out(opt.dump_path, std::ios::binary);
    if (!out) throw std::runtime_error("schema: cannot open dump path");
    dump_field(field, out);
  }
  return kExitOk;
}

}  // namespace sev
