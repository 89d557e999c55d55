#pragma once

#include <string>

#include "merging/belief.hpp"
#include "merging/env.hpp"
#include "merging/eval.hpp"
#include "merging/mcts.hpp"
#include "merging/rl/dqn.hpp"
#include "merging/scenario.hpp"

namespace merging {

/// Everything tunable in one place. Loaded from an INI file with one section
/// per module; missing keys keep their defaults, unknown keys are rejected.
struct RunConfig {
  EnvConfig env{};
  ScenarioConfig scenario{};
  BeliefConfig belief{};
  rl::TrainConfig train{};
  mcts::DpwParams mcts{};
  mcts::RolloutConfig rollout{};
  EvalConfig eval{};
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

}  // namespace merging
