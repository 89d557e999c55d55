#include "merging/episode.hpp"

#include <cmath>

namespace merging {

EpisodeRecord run_episode(Agent& agent, const SceneState& initial, const EnvConfig& env,
                          std::uint64_t episode_seed, const EpisodeOptions& options) {
  EpisodeRecord record;
  agent.reset(initial, episode_seed);

  const auto snapshot = [&](const SceneState& scene, std::optional<EgoAction> action,
                            double r, Status status) {
    TraceStep t;
    t.step = scene.step_index;
    t.time = scene.time;
    t.scene = scene;
    t.action = action;
    t.reward = r;
    t.status = status;
    if (options.record_belief && agent.belief() != nullptr) t.belief = agent.belief()->entries();
    t.search = agent.decision_stats();
    record.trace.push_back(std::move(t));
  };

  SceneState scene = initial;
  Status status = evaluate_status(scene, env);
  if (options.record_trace) snapshot(scene, std::nullopt, 0.0, status);

  double discount = 1.0;
  while (status == Status::Running) {
    const EgoAction action = agent.act(scene);
    SceneState next = scene;
    status = step_scene(next, action, env);
    const double r = reward(scene, next, status);
    agent.observe(scene, next);
    record.reward_sum += r;
    record.discounted_return += discount * r;
    discount *= env.discount;
    scene = std::move(next);
    if (options.record_trace) snapshot(scene, action, r, status);
  }
  record.status = status;
  record.steps = scene.step_index;
  return record;
}

}  // namespace merging
