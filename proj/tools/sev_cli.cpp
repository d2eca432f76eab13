// Command-line front end: loads a scenario JSON file, runs the requested
// analysis and writes CSV to stdout or --out.

#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "sev/scenario.hpp"

namespace {

struct OutputSink {
  std::ofstream file;
  std::ostream* os = &std::cout;

  int open(const std::string& path) {
    if (path.empty()) return 0;
    file.open(path);
    if (!file) {
      std::cerr << "cannot open output file: " << path << "\n";
      return sev::kExitSchema;
    }
    os = &file;
    return 0;
  }
};

sev::ProfileGrid parse_dstar_grid(const std::string& spec) {
  sev::ProfileGrid g;
  if (spec.empty()) return g;
  double lo, hi;
  int n;
  char mode[8] = "log";
  const int got =
      std::sscanf(spec.c_str(), "%lf:%lf:%d:%7s", &lo, &hi, &n, mode);
  if (got < 3) throw std::runtime_error("schema: --dstar-grid lo:hi:n[:log|lin]");
  g.lo = lo;
  g.hi = hi;
  g.count = n;
  g.log_spaced = std::string(mode) != "lin";
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surveillance-evasion visibility game analysis"};
  app.require_subcommand(1);

  std::string scenario_path, out_path;
  app.add_option("scenario", scenario_path, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "output CSV path (default stdout)");

  auto* cmd_classify = app.add_subcommand("classify", "usable-part labels per state");

  std::string method = "all";
  auto* cmd_value = app.add_subcommand("value", "value estimates and cross checks");
  cmd_value->add_option("--method", method,
                        "rep | bounds | corner | oracle | sweep | all");

  int t_samples = 101;
  auto* cmd_scurve = app.add_subcommand("scurve", "horizon separation curve S(t)");
  cmd_scurve->add_option("--t-samples", t_samples, "number of samples");

  std::string dstar_grid;
  auto* cmd_profile = app.add_subcommand("profile", "boundary profile family");
  cmd_profile->add_option("--dstar-grid", dstar_grid, "lo:hi:n[:log|lin]");

  sev::BarrierOptions bopt;
  std::string defender = "evader";
  auto* cmd_barrier = app.add_subcommand("barrier", "radial-mimic barrier run");
  cmd_barrier->add_option("--dt", bopt.dt, "integration step");
  cmd_barrier->add_option("--T", bopt.T, "simulated horizon");
  cmd_barrier->add_option("--opponent", bopt.opponent,
                          "radial | angular | random:<seed>:<pieces>");
  cmd_barrier->add_option("--defender", defender, "evader | pursuer");

  sev::SweepOptions sopt;
  auto* cmd_sweep = app.add_subcommand("sweep", "grid HJI cross check");
  cmd_sweep->add_option("--n", sopt.n_override, "points per non-degenerate axis");
  cmd_sweep->add_option("--tol", sopt.tol, "convergence tolerance");
  cmd_sweep->add_option("--dump", sopt.dump_path, "binary field dump path");

  CLI11_PARSE(app, argc, argv);

  try {
    const sev::Scenario sc = sev::load_scenario(scenario_path);
    OutputSink sink;
    if (int rc = sink.open(out_path)) return rc;

    if (cmd_classify->parsed()) return sev::run_classify(sc, *sink.os);
    if (cmd_value->parsed()) return sev::run_value(sc, {method}, *sink.os);
    if (cmd_scurve->parsed()) return sev::run_scurve(sc, t_samples, *sink.os);
    if (cmd_profile->parsed())
      return sev::run_profile(sc, parse_dstar_grid(dstar_grid), *sink.os);
    if (cmd_barrier->parsed()) {
      bopt.defender = defender == "pursuer" ? sev::BarrierDefender::Pursuer
                                            : sev::BarrierDefender::Evader;
      return sev::run_barrier(sc, bopt, *sink.os, std::cout);
    }
    if (cmd_sweep->parsed()) return sev::run_sweep(sc, sopt, *sink.os, std::cout);
  } catch (const std::runtime_error& e) {
    std::cerr << e.what() << "\n";
    const std::string what = e.what();
    if (what.rfind("schema:", 0) == 0) return sev::kExitSchema;
    if (what.find("no convergence") != std::string::npos)
      return sev::kExitNoConvergence;
    return sev::kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return sev::kExitInvariant;
  }
  return sev::kExitOk;
}
