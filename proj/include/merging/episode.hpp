#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "merging/belief.hpp"
#include "merging/env.hpp"

namespace merging {

/// An action source driven through an episode. The environment reports each
/// transition through observe() before the next act() call.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual void reset(const SceneState& initial, std::uint64_t episode_seed) = 0;
  virtual EgoAction act(const SceneState& scene) = 0;
  virtual void observe(const SceneState& /*prev*/, const SceneState& /*next*/) {}
  virtual const CooperationBelief* belief() const { return nullptr; }
  virtual std::vector<std::pair<std::string, double>> decision_stats() const { return {}; }
};

/// Always issues the same command.
class ConstantAgent final : public Agent {
 public:
  explicit ConstantAgent(EgoAction action) : action_(action) {}
  void reset(const SceneState&, std::uint64_t) override {}
  EgoAction act(const SceneState&) override { return action_; }

 private:
  EgoAction action_;
};

struct TraceStep {
  int step = 0;
  double time = 0.0;
  SceneState scene;
  std::optional<EgoAction> action;  // action that led into `scene`
  double reward = 0.0;
  Status status = Status::Running;
  std::optional<std::map<VehicleId, double>> belief;
  std::vector<std::pair<std::string, double>> search;
};

struct EpisodeRecord {
  Status status = Status::Running;
  int steps = 0;
  double reward_sum = 0.0;
  double discounted_return = 0.0;
  std::vector<TraceStep> trace;
};

struct EpisodeOptions {
  bool record_trace = false;
  bool record_belief = false;
};

/// Rolls the environment forward from `initial` until a terminal status.
EpisodeRecord run_episode(Agent& agent, const SceneState& initial, const EnvConfig& env,
                          std::uint64_t episode_seed, const EpisodeOptions& options = {});

}  // namespace merging
