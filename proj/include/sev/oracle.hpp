#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <vector>

#include "sev/game.hpp"
#include "sev/geometry.hpp"

namespace sev {

// ---------------------------------------------------------------------------
// Discrete minimax game oracle
// ---------------------------------------------------------------------------

/// Discretisation of the lower game value. The evader commits a direction
/// from n_dirs_e uniform samples, the pursuer best-responds from n_dirs_p
/// samples with full knowledge of the evader's choice, and occlusion is
/// tested every dt along the straight trajectories. Within the t0 window the
/// paper's optimal trajectories are straight, so the committed game converges
/// to the lower value from above as the samplings refine. Direction samplings
/// with a common phase nest when n doubles, which makes the oracle monotone
/// in n_dirs_e (down) and n_dirs_p (up).
struct DiscreteGameConfig {
  double dt = 2e-3;
  int depth = 100;        // depth * dt must not exceed the scenario's t0
  int n_dirs_e = 32;
  int n_dirs_p = 32;
  double occlusion_tol = 0.0;  // reserved; segment_blocked carries its own
};

/// Earliest guaranteed occlusion time of the discrete game, or nullopt when
/// the pursuer can keep visibility past depth * dt ("exceeds horizon").
/// Throws when the initial state is already occluded.
std::optional<double> discrete_value(const GameState& state, const Obstacle& obs,
                                     const Speeds& sp,
                                     const DiscreteGameConfig& cfg);

// ---------------------------------------------------------------------------
// 4D Lax-Friedrichs fast sweeping solver
// ---------------------------------------------------------------------------

/// Axis-aligned grid over (Ex, Ey, Px, Py).
struct GridSpec {
  std::array<double, 4> lo{};
  std::array<double, 4> hi{};
  std::array<int, 4> n{};

  double h(int axis) const {
    return n[axis] > 1 ? (hi[axis] - lo[axis]) / (n[axis] - 1) : 0.0;
  }
  double coord(int axis, int i) const { return lo[axis] + i * h(axis); }
  std::size_t size() const {
    return std::size_t(n[0]) * n[1] * n[2] * n[3];
  }
};

enum class CellKind : std::uint8_t {
  Free = 0,            // updated by the sweeps
  UsableFixed = 1,     // first occluded layer on the usable part, V = 0
  NonUsableBoundary = 2,  // first occluded layer on the non-usable part
  TargetInterior = 3,
  Obstacle = 4,
};

/// Grid solution of H(X, grad V) = 1 with V = 0 on the usable part of the
/// target boundary. Cells are excluded (masked) inside the obstacle and the
/// target; the non-usable first occluded layer is kept visible to the front
/// extraction with an effective value of +infinity.
struct SweepField {
  GridSpec grid;
  std::vector<double> values;
  std::vector<CellKind> mask;
  double residual = 0.0;  // max LF fixed-point defect over free cells
  int sweeps = 0;         // single-ordering passes executed
  bool converged = false;

  std::size_t index(int i0, int i1, int i2, int i3) const {
    return ((std::size_t(i0) * grid.n[1] + i1) * grid.n[2] + i2) * grid.n[3] + i3;
  }
  /// Value with the mask semantics used by the level sets: 0 on the usable
  /// layer, +infinity on the non-usable layer, NaN on excluded cells.
  double effective_value(std::size_t idx) const;

  /// Multilinear interpolation of V at a state; nearest-node fallback when a
  /// corner of the interpolation cube is excluded.
  double sample(const GameState& state) const;
};

struct SweepParams {
  double sigma_e = -1.0;  // < 0 means "use gamma_e"
  double sigma_p = -1.0;
  int max_sweeps = 2000;      // single-ordering passes
  double tol = 1e-8;          // max update per 16-ordering cycle
  double boundary_tol = -1.0;     // < 0: derived from the obstacle extent
  double interface_tol = 1e-9;
};

/// Lax-Friedrichs fast sweeping over the 2^4 Gauss-Seidel orderings.
/// Throws std::runtime_error on non-convergence, with the residual in the
/// message; the partially converged field is lost in that case, so callers
/// wanting it should raise max_sweeps instead.
SweepField sweep_solve(const Obstacle& obs, const Speeds& sp,
                       const GridSpec& grid, const SweepParams& params);

/// Cells of the front Gamma(t), the boundary of the superlevel set
/// Omega(t) = {V >= t}. Gamma(0) is the target-boundary layer itself.
struct FrontSlice {
  double t = 0.0;
  std::set<std::size_t> cells;
};
FrontSlice extract_front(const SweepField& field, double t);

/// Discontinuity candidates: cells present in both Gamma(t1) and Gamma(t2)
/// up to one-cell dilation. Stationary front segments mark places where the
/// value jumps.
std::set<std::size_t> stationarity_map(const SweepField& field, double t1,
                                       double t2);

/// Binary dump: "SEVF" magic, u32 version, 4 x u32 dims, 4 x (f64 lo, f64 hi),
/// 4 x f64 spacing, then row-major f64 values and one mask byte per cell.
/// Little-endian throughout.
void dump_field(const SweepField& field, std::ostream& os);
SweepField load_field(std::istream& is);

}  // namespace sev
