#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sev/corner.hpp"
#include "sev/game.hpp"
#include "sev/geometry.hpp"
#include "sev/oracle.hpp"

namespace sev {

/// Process exit codes shared by every subcommand.
enum ExitCode {
  kExitOk = 0,
  kExitSchema = 2,
  kExitNoConvergence = 3,
  kExitInvariant = 4,
};

struct AnalysisParams {
  double delta = 0.5;
  double epsilon = 0.0;
  double boundary_tol = -1.0;  // < 0: 1e-6 * obstacle extent
  double interface_tol = 1e-9;
  double barrier_tol = 1e-9;
  DiscreteGameConfig oracle;
  GridSpec grid;
  bool has_grid = false;
  double grid_tol = 1e-8;
  int max_sweeps = 4000;
  std::optional<CornerSpec> corner;
};

/// One scenario file: a single obstacle, speeds, a batch of initial states
/// and the analysis parameters. Deterministic given `seed`.
struct Scenario {
  int version = 1;
  std::string id;
  std::uint64_t seed = 0;
  Obstacle obstacle{Circle{}};
  Speeds speeds;
  std::vector<GameState> states;
  AnalysisParams params;

  double boundary_tol() const;
};

/// Parses the UTF-8 JSON scenario schema; throws std::runtime_error with a
/// line-oriented message on malformed input.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

/// 17-significant-digit formatting used by every CSV writer.
std::string fmt(double v);

struct ValueOptions {
  std::string method = "all";  // rep | bounds | corner | oracle | sweep | all
};

/// value subcommand: per-state quantities, analytic bounds, cross checks.
/// Returns kExitInvariant when a valid-flag sandwich violation is detected.
int run_value(const Scenario& sc, const ValueOptions& opt, std::ostream& csv);

/// classify subcommand.
int run_classify(const Scenario& sc, std::ostream& csv);

/// scurve subcommand: (t, S(t)) rows for the first state.
int run_scurve(const Scenario& sc, int t_samples, std::ostream& csv);

struct ProfileGrid {
  double lo = 1e-4;
  double hi = 1e-2;
  int count = 25;
  bool log_spaced = true;
};

/// profile subcommand: boundary-profile family (param, V, lower, upper).
int run_profile(const Scenario& sc, const ProfileGrid& grid, std::ostream& csv);

struct BarrierOptions {
  double dt = 1e-3;
  double T = 0.1;
  std::string opponent = "radial";  // radial | angular | random:<seed>:<pieces>
  BarrierDefender defender = BarrierDefender::Evader;
};

/// barrier subcommand: trajectory CSV; the drift summary goes to `summary`.
int run_barrier(const Scenario& sc, const BarrierOptions& opt,
                std::ostream& csv, std::ostream& summary);

struct SweepOptions {
  int n_override = 0;  // > 0 replaces every axis count
  double tol = -1.0;   // > 0 replaces the scenario tolerance
  std::string dump_path;
};

/// sweep subcommand: solves the grid problem, emits per-state comparison
/// rows and a convergence summary. Returns kExitNoConvergence on failure.
int run_sweep(const Scenario& sc, const SweepOptions& opt, std::ostream& csv,
              std::ostream& summary);

/// Worker count: SEV_WORKERS when set, otherwise the hardware concurrency
/// clamped to 8. Output ordering never depends on it.
int worker_count();

}  // namespace sev
