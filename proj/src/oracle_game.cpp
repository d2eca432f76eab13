#include <cmath>

#include "sev/oracle.hpp"

namespace sev {

namespace {

std::vector<Vec2> direction_fan(int n) {
  std::vector<Vec2> dirs(n);
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * k / n;  // phase 0 so doubled fans nest
    dirs[k] = {std::cos(a), std::sin(a)};
  }
  return dirs;
}

}  // namespace

std::optional<double> discrete_value(const GameState& state, const Obstacle& obs,
                                     const Speeds& sp,
                                     const DiscreteGameConfig& cfg) {
  if (!(cfg.dt > 0.0) || cfg.depth < 1 || cfg.n_dirs_e < 8 || cfg.n_dirs_p < 8)
    throw std::invalid_argument("discrete_value: bad config");
  if (in_target(state, obs))
    throw std::invalid_argument("discrete_value: state already occluded");

  const auto dirs_e = direction_fan(cfg.n_dirs_e);
  const auto dirs_p = direction_fan(cfg.n_dirs_p);

  // First occlusion step along committed straight trajectories, 0 if never.
  auto occlusion_step = [&](Vec2 vE, Vec2 vP) -> int {
    for (int k = 1; k <= cfg.depth; ++k) {
      const double t = k * cfg.dt;
      const GameState st{state.E + sp.gamma_e * t * vE,
                         state.P + sp.gamma_p * t * vP};
      if (in_target(st, obs)) return k;
    }
    return 0;
  };

  int best_e = 0;  // evader's best guaranteed step, 0 = none
  for (const Vec2& vE : dirs_e) {
    int worst_p = -1;  // pursuer's best response: latest occlusion
    for (const Vec2& vP : dirs_p) {
      const int k = occlusion_step(vE, vP);
      if (k == 0) { worst_p = 0; break; }  // pursuer survives, drop this vE
      worst_p = std::max(worst_p, k);
      if (best_e != 0 && worst_p >= best_e) break;  // already no better
    }
    if (worst_p > 0 && (best_e == 0 || worst_p < best_e)) best_e = worst_p;
  }
  if (best_e == 0) return std::nullopt;
  return best_e * cfg.dt;
}

}  // namespace sev
