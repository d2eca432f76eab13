#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sev/oracle.hpp"

namespace sev {

namespace {

constexpr double kBig = 1e9;

// Closest point on the segment [c, d] to the segment [a, b].
Vec2 seg_seg_closest_on_second(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const Vec2 u = b - a, v = d - c, w = a - c;
  const double A = dot(u, u), B = dot(u, v), C = dot(v, v);
  const double D = dot(u, w), E = dot(v, w);
  const double den = A * C - B * B;
  double s = 0.0, t = 0.0;
  if (den > 1e-300) s = std::clamp((B * E - C * D) / den, 0.0, 1.0);
  t = C > 1e-300 ? std::clamp((B * s + E) / C, 0.0, 1.0) : 0.0;
  // One clamp may invalidate the other; re-project once.
  if (A > 1e-300) {
    s = std::clamp((B * t - D) / A, 0.0, 1.0);
    t = C > 1e-300 ? std::clamp((B * s + E) / C, 0.0, 1.0) : 0.0;
  }
  return c + t * v;
}

Vec2 nearest_obstacle_point_to_segment(Vec2 a, Vec2 b, const Obstacle& obs) {
  return std::visit(
      [&](const auto& o) -> Vec2 {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Circle>) {
          const Vec2 cp = closest_point_on_segment(o.center, a, b);
          const double d = norm(cp - o.center);
          if (d < 1e-300) return o.center + Vec2{o.radius, 0.0};
          return o.center + o.radius / d * (cp - o.center);
        } else if constexpr (std::is_same_v<T, ConvexArc>) {
          double best = std::numeric_limits<double>::max();
          Vec2 bp = o.samples.front().point;
          for (const auto& r : o.samples) {
            const double d = point_segment_distance(r.point, a, b);
            if (d < best) { best = d; bp = r.point; }
          }
          return bp;
        } else {
          double best = std::numeric_limits<double>::max();
          Vec2 bp = o.vertices.front();
          for (std::size_t i = 0; i < o.size(); ++i) {
            const Vec2 q =
                seg_seg_closest_on_second(a, b, o.vertex(i), o.vertex(i + 1));
            const double d = point_segment_distance(q, a, b);
            if (d < best) { best = d; bp = q; }
          }
          return bp;
        }
      },
      obs);
}

}  // namespace

double SweepField::effective_value(std::size_t idx) const {
  switch (mask[idx]) {
    case CellKind::Free: return values[idx];
    case CellKind::UsableFixed: return 0.0;
    case CellKind::NonUsableBoundary:
      return std::numeric_limits<double>::infinity();
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

double SweepField::sample(const GameState& state) const {
  const double q[4] = {state.E.x, state.E.y, state.P.x, state.P.y};
  int base[4];
  double w[4];
  for (int a = 0; a < 4; ++a) {
    if (grid.n[a] == 1) { base[a] = 0; w[a] = 0.0; continue; }
    const double f = (q[a] - grid.lo[a]) / grid.h(a);
    base[a] = std::clamp(static_cast<int>(std::floor(f)), 0, grid.n[a] - 2);
    w[a] = std::clamp(f - base[a], 0.0, 1.0);
  }
  double acc = 0.0, wacc = 0.0;
  for (int m = 0; m < 16; ++m) {
    int idx4[4];
    double weight = 1.0;
    bool skip = false;
    for (int a = 0; a < 4; ++a) {
      const int bit = (m >> a) & 1;
      if (grid.n[a] == 1 && bit == 1) { skip = true; break; }
      idx4[a] = base[a] + bit;
      weight *= bit ? w[a] : 1.0 - w[a];
    }
    if (skip || weight == 0.0) continue;
    const std::size_t idx = index(idx4[0], idx4[1], idx4[2], idx4[3]);
    if (mask[idx] == CellKind::Free || mask[idx] == CellKind::UsableFixed) {
      acc += weight * effective_value(idx);
      wacc += weight;
    }
  }
  if (wacc == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return acc / wacc;
}

SweepField sweep_solve(const Obstacle& obs, const Speeds& sp,
                       const GridSpec& grid, const SweepParams& params) {
  for (int a = 0; a < 4; ++a) {
    if (grid.n[a] < 1) throw std::invalid_argument("sweep_solve: n >= 1 per axis");
    if (grid.n[a] > 1 && !(grid.hi[a] > grid.lo[a]))
      throw std::invalid_argument("sweep_solve: empty axis range");
  }
  const double sigma_e = params.sigma_e < 0.0 ? sp.gamma_e : params.sigma_e;
  const double sigma_p = params.sigma_p < 0.0 ? sp.gamma_p : params.sigma_p;
  if (sigma_e < sp.gamma_e || sigma_p < sp.gamma_p)
    throw std::invalid_argument("sweep_solve: dissipation below characteristic speed");

  SweepField f;
  f.grid = grid;
  const std::size_t total = grid.size();
  f.values.assign(total, kBig);
  f.mask.assign(total, CellKind::Free);

  const double itol = params.interface_tol;

  // Pass 1: obstacle / target cells.
  std::vector<std::uint8_t> blocked(total, 0);
  {
    // Player-inside flags per 2D node to avoid recomputing per 4D cell.
    std::vector<std::uint8_t> e_in(std::size_t(grid.n[0]) * grid.n[1]);
    std::vector<std::uint8_t> p_in(std::size_t(grid.n[2]) * grid.n[3]);
    for (int i = 0; i < grid.n[0]; ++i)
      for (int j = 0; j < grid.n[1]; ++j)
        e_in[std::size_t(i) * grid.n[1] + j] =
            obstacle_signed_distance({grid.coord(0, i), grid.coord(1, j)}, obs) < 0.0;
    for (int k = 0; k < grid.n[2]; ++k)
      for (int l = 0; l < grid.n[3]; ++l)
        p_in[std::size_t(k) * grid.n[3] + l] =
            obstacle_signed_distance({grid.coord(2, k), grid.coord(3, l)}, obs) < 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < grid.n[0]; ++i)
      for (int j = 0; j < grid.n[1]; ++j)
        for (int k = 0; k < grid.n[2]; ++k)
          for (int l = 0; l < grid.n[3]; ++l, ++idx) {
            if (e_in[std::size_t(i) * grid.n[1] + j] ||
                p_in[std::size_t(k) * grid.n[3] + l]) {
              f.mask[idx] = CellKind::Obstacle;
              continue;
            }
            const GameState st{{grid.coord(0, i), grid.coord(1, j)},
                               {grid.coord(2, k), grid.coord(3, l)}};
            if (in_target(st, obs)) blocked[idx] = 1;
          }
  }

  // Pass 2: split target cells into boundary layer and interior, classify
  // the boundary layer by the margin criterion.
  {
    std::size_t idx = 0;
    for (int i = 0; i < grid.n[0]; ++i)
      for (int j = 0; j < grid.n[1]; ++j)
        for (int k = 0; k < grid.n[2]; ++k)
          for (int l = 0; l < grid.n[3]; ++l, ++idx) {
            if (f.mask[idx] == CellKind::Obstacle || !blocked[idx]) continue;
            bool has_free_neighbor = false;
            const int c4[4] = {i, j, k, l};
            for (int a = 0; a < 4 && !has_free_neighbor; ++a)
              for (int d = -1; d <= 1 && !has_free_neighbor; d += 2) {
                int nb[4] = {c4[0], c4[1], c4[2], c4[3]};
                nb[a] += d;
                if (nb[a] < 0 || nb[a] >= grid.n[a]) continue;
                const std::size_t nidx = f.index(nb[0], nb[1], nb[2], nb[3]);
                if (f.mask[nidx] != CellKind::Obstacle && !blocked[nidx]) has_free_neighbor = true;
              }
            if (!has_free_neighbor) {
              f.mask[idx] = CellKind::TargetInterior;
              continue;
            }
            const GameState st{{grid.coord(0, i), grid.coord(1, j)},
                               {grid.coord(2, k), grid.coord(3, l)}};
            const Vec2 xs = nearest_obstacle_point_to_segment(st.E, st.P, obs);
            const double dE = norm(st.E - xs), dP = norm(st.P - xs);
            const double margin =
                (dE > 0.0 && dP > 0.0)
                    ? sp.gamma_e / dE - sp.gamma_p / dP
                    : -1.0;
            if (margin >= -itol) {
              f.mask[idx] = CellKind::UsableFixed;
              f.values[idx] = 0.0;
            } else {
              f.mask[idx] = CellKind::NonUsableBoundary;
            }
          }
  }

  // Gauss-Seidel Lax-Friedrichs sweeps over the 16 axis orderings.
  const double sigma[4] = {sigma_e, sigma_e, sigma_p, sigma_p};
  const std::size_t stride[4] = {
      std::size_t(grid.n[1]) * grid.n[2] * grid.n[3],
      std::size_t(grid.n[2]) * grid.n[3], std::size_t(grid.n[3]), 1};

  double csum = 0.0;
  for (int a = 0; a < 4; ++a)
    if (grid.n[a] > 1 && sigma[a] > 0.0) csum += sigma[a] / grid.h(a);
  if (csum <= 0.0)
    throw std::invalid_argument("sweep_solve: no active axis (all speeds zero?)");

  auto neighbor_value = [&](std::size_t idx, int a, int pos, int d,
                            double vc) -> double {
    const int q = pos + d;
    if (q < 0 || q >= grid.n[a]) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t nidx = d > 0 ? idx + stride[a] : idx - stride[a];
    switch (f.mask[nidx]) {
      case CellKind::Free: return f.values[nidx];
      case CellKind::UsableFixed: return 0.0;
      default: return vc;  // sealed wall: zero gradient
    }
  };

  auto lf_update = [&](std::size_t idx, const int c4[4]) -> double {
    const double vc = f.values[idx];
    double pE2 = 0.0, pP2 = 0.0, diss = 0.0;
    for (int a = 0; a < 4; ++a) {
      if (grid.n[a] == 1) continue;
      const double h = grid.h(a);
      double vm = neighbor_value(idx, a, c4[a], -1, vc);
      double vp = neighbor_value(idx, a, c4[a], +1, vc);
      if (std::isnan(vm)) vm = 2.0 * vc - vp;  // box edge: linear extrapolation
      if (std::isnan(vp)) vp = 2.0 * vc - vm;
      const double grad = (vp - vm) / (2.0 * h);
      if (a < 2) pE2 += grad * grad; else pP2 += grad * grad;
      diss += sigma[a] * (vp + vm) / (2.0 * h);
    }
    const double H = sp.gamma_e * std::sqrt(pE2) - sp.gamma_p * std::sqrt(pP2);
    return (1.0 - H + diss) / csum;
  };

  const double tol = params.tol;
  bool converged = false;
  int sweeps = 0;
  while (sweeps < params.max_sweeps && !converged) {
    double cycle_change = 0.0;
    for (int ord = 0; ord < 16 && sweeps < params.max_sweeps; ++ord, ++sweeps) {
      const int dir[4] = {(ord & 1) ? -1 : 1, (ord & 2) ? -1 : 1,
                          (ord & 4) ? -1 : 1, (ord & 8) ? -1 : 1};
      int c4[4];
      for (int a = 0; a < 4; ++a) c4[a] = dir[a] > 0 ? 0 : grid.n[a] - 1;
      // Odometer loop over the grid in the requested ordering.
      for (;;) {
        const std::size_t idx = f.index(c4[0], c4[1], c4[2], c4[3]);
        if (f.mask[idx] == CellKind::Free) {
          const double vnew = std::max(lf_update(idx, c4), 0.0);
          if (vnew < f.values[idx]) {
            cycle_change = std::max(cycle_change, f.values[idx] - vnew);
            f.values[idx] = vnew;
          }
        }
        int a = 3;
        for (; a >= 0; --a) {
          c4[a] += dir[a];
          if (dir[a] > 0 ? c4[a] < grid.n[a] : c4[a] >= 0) break;
          c4[a] = dir[a] > 0 ? 0 : grid.n[a] - 1;
        }
        if (a < 0) break;
      }
      if (sweeps % 16 == 15) {
        converged = cycle_change < tol;
        if (converged) break;
        cycle_change = 0.0;
      }
    }
  }
  f.sweeps = sweeps;
  f.converged = converged;

  // LF fixed-point defect |H_LF - 1| on free cells.
  double res = 0.0;
  {
    int c4[4] = {0, 0, 0, 0};
    for (;;) {
      const std::size_t idx = f.index(c4[0], c4[1], c4[2], c4[3]);
      if (f.mask[idx] == CellKind::Free && f.values[idx] < kBig * 0.5)
        res = std::max(res, std::abs(lf_update(idx, c4) - f.values[idx]) * csum);
      int a = 3;
      for (; a >= 0; --a) {
        if (++c4[a] < grid.n[a]) break;
        c4[a] = 0;
      }
      if (a < 0) break;
    }
  }
  f.residual = res;
  if (!converged) {
    std::ostringstream msg;
    msg << "sweep_solve: no convergence after " << sweeps
        << " sweeps, residual " << res;
    throw std::runtime_error(msg.str());
  }
  return f;
}

FrontSlice extract_front(const SweepField& f, double t) {
  FrontSlice out;
  out.t = t;
  const auto& g = f.grid;
  if (t <= 0.0) {
    for (std::size_t idx = 0; idx < f.mask.size(); ++idx)
      if (f.mask[idx] == CellKind::UsableFixed ||
          f.mask[idx] == CellKind::NonUsableBoundary)
        out.cells.insert(idx);
    return out;
  }
  int c4[4] = {0, 0, 0, 0};
  const std::size_t stride[4] = {
      std::size_t(g.n[1]) * g.n[2] * g.n[3], std::size_t(g.n[2]) * g.n[3],
      std::size_t(g.n[3]), 1};
  for (;;) {
    const std::size_t idx = f.index(c4[0], c4[1], c4[2], c4[3]);
    const CellKind k = f.mask[idx];
    if ((k == CellKind::Free || k == CellKind::UsableFixed) &&
        f.effective_value(idx) >= t) {
      bool on_front = false;
      for (int a = 0; a < 4 && !on_front; ++a)
        for (int d = -1; d <= 1 && !on_front; d += 2) {
          const int q = c4[a] + d;
          if (q < 0 || q >= g.n[a]) continue;
          const std::size_t nidx = d > 0 ? idx + stride[a] : idx - stride[a];
          const CellKind nk = f.mask[nidx];
          if ((nk == CellKind::Free || nk == CellKind::UsableFixed) &&
              f.effective_value(nidx) < t)
            on_front = true;
        }
      if (on_front) out.cells.insert(idx);
    }
    int a = 3;
    for (; a >= 0; --a) {
      if (++c4[a] < g.n[a]) break;
      c4[a] = 0;
    }
    if (a < 0) break;
  }
  return out;
}

std::set<std::size_t> stationarity_map(const SweepField& f, double t1,
                                       double t2) {
  if (!(t1 < t2)) throw std::invalid_argument("stationarity_map: need t1 < t2");
  const FrontSlice g1 = extract_front(f, t1);
  const FrontSlice g2 = extract_front(f, t2);
  const auto& g = f.grid;
  auto decode = [&](std::size_t idx, int c4[4]) {
    c4[3] = idx % g.n[3]; idx /= g.n[3];
    c4[2] = idx % g.n[2]; idx /= g.n[2];
    c4[1] = idx % g.n[1]; idx /= g.n[1];
    c4[0] = static_cast<int>(idx);
  };
  std::set<std::size_t> out;
  for (std::size_t idx : g1.cells) {
    int a4[4];
    decode(idx, a4);
    bool near = false;
    for (std::size_t jdx : g2.cells) {
      int b4[4];
      decode(jdx, b4);
      int cheb = 0;
      for (int a = 0; a < 4; ++a) cheb = std::max(cheb, std::abs(a4[a] - b4[a]));
      if (cheb <= 1) { near = true; break; }
    }
    if (near) out.insert(idx);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary field dump
// ---------------------------------------------------------------------------

namespace {
template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
}  // namespace

void dump_field(const SweepField& f, std::ostream& os) {
  os.write("SEVF", 4);
  put<std::uint32_t>(os, 1);
  for (int a = 0; a < 4; ++a) put<std::uint32_t>(os, f.grid.n[a]);
  for (int a = 0; a < 4; ++a) {
    put<double>(os, f.grid.lo[a]);
    put<double>(os, f.grid.hi[a]);
  }
  for (int a = 0; a < 4; ++a) put<double>(os, f.grid.h(a));
  os.write(reinterpret_cast<const char*>(f.values.data()),
           f.values.size() * sizeof(double));
  os.write(reinterpret_cast<const char*>(f.mask.data()), f.mask.size());
}

SweepField load_field(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, "SEVF", 4) != 0)
    throw std::runtime_error("load_field: bad magic");
  if (get<std::uint32_t>(is) != 1)
    throw std::runtime_error("load_field: unsupported version");
  SweepField f;
  for (int a = 0; a < 4; ++a) f.grid.n[a] = static_cast<int>(get<std::uint32_t>(is));
  for (int a = 0; a < 4; ++a) {
    f.grid.lo[a] = get<double>(is);
    f.grid.hi[a] = get<double>(is);
  }
  for (int a = 0; a < 4; ++a) get<double>(is);  // spacings are derivable
  const std::size_t total = f.grid.size();
  f.values.resize(total);
  is.read(reinterpret_cast<char*>(f.values.data()), total * sizeof(double));
  f.mask.resize(total);
  is.read(reinterpret_cast<char*>(f.mask.data()), total);
  if (!is) throw std::runtime_error("load_field: truncated stream");
  return f;
}

}  // namespace sev
