#pragma once

#include <optional>

#include "merging/belief.hpp"
#include "merging/episode.hpp"
#include "merging/rl/policy.hpp"

namespace merging::rl {

/// Greedy Q-network agent. Belief-mode policies run the cooperation filter
/// on every transition before choosing the next action.
class QAgent final : public Agent {
 public:
  QAgent(const QPolicy& policy, EnvConfig env, BeliefConfig belief_cfg = {})
      : policy_(policy), env_(std::move(env)), belief_(belief_cfg) {}

  void reset(const SceneState&, std::uint64_t) override { belief_ = CooperationBelief(belief_.config()); }
  EgoAction act(const SceneState& scene) override { return greedy_action(policy_, observe_scene(scene)); }
  void observe(const SceneState& prev, const SceneState& next) override {
    if (policy_.mode == ObservationMode::Belief) belief_ = update_belief(belief_, prev, next, env_);
  }
  const CooperationBelief* belief() const override {
    return policy_.mode == ObservationMode::Belief ? &belief_ : nullptr;
  }

  Observation observe_scene(const SceneState& scene) const {
    if (policy_.mode == ObservationMode::Belief) return belief_observation(scene, belief_, env_);
    return build_observation(scene, env_, policy_.mode);
  }

 private:
  const QPolicy& policy_;
  EnvConfig env_;
  CooperationBelief belief_;
};

}  // namespace merging::rl
