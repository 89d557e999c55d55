#include "merging/mcts.hpp"

#include <algorithm>
#include <stdexcept>

namespace merging::mcts {

SceneState determinize(const SceneState& scene, const CooperationAssumption& assumption) {
  SceneState out = scene;
  if (assumption.full_observation) return out;
  for (auto& car : out.traffic) {
    if (car.driver) car.driver->cooperation = assumption.value;
  }
  return out;
}

Transition<SceneState> MergeModel::step(const SceneState& s, int action, Rng&) const {
  Transition<SceneState> t{s, 0.0, false};
  const Status status = step_scene(t.next, action_from_index(action), env_);
  t.reward = reward(s, t.next, status);
  t.terminal = status != Status::Running;
  return t;
}

const char* rollout_name(RolloutPolicy p) {
  switch (p) {
    case RolloutPolicy::Release: return "release";
    case RolloutPolicy::Idm: return "idm";
    case RolloutPolicy::Random: return "random";
  }
  return "?";
}

RolloutPolicy parse_rollout(const std::string& name) {
  if (name == "release") return RolloutPolicy::Release;
  if (name == "idm") return RolloutPolicy::Idm;
  if (name == "random") return RolloutPolicy::Random;
  throw std::invalid_argument("unknown rollout policy: " + name);
}

double rollout_ego_accel(const SceneState& scene, const EnvConfig& env, double desired_speed) {
  const VehicleState& ego = scene.ego;
  double gap = kNoLeaderGap;
  double closing = 0.0;
  for (const auto& car : scene.traffic) {
    if (car.phys.s >= ego.phys.s) {
      gap = car.rear() - ego.phys.s;
      closing = ego.phys.v - car.phys.v;
      break;
    }
  }
  DriverParams p = env.driver.defaults;
  p.desired_speed = desired_speed;
  const double a = idm_accel(ego.phys.v, gap, closing, p, -env.ego_min_accel);
  return std::clamp(a, env.ego_min_accel, env.ego_max_accel);
}

double rollout(const SceneState& scene, int depth, const EnvConfig& env, Rng& rng,
               const RolloutConfig& cfg) {
  thread_local SceneState scratch;
  scratch = scene;
  double ret = 0.0;
  double discount = 1.0;
  for (int d = 0; d < depth; ++d) {
    if (evaluate_status(scratch, env) != Status::Running) break;
    EgoAction act = EgoAction::Release;
    if (cfg.policy == RolloutPolicy::Idm) {
      // Hold keeps the commanded acceleration, so set it directly.
      scratch.ego.phys.a = rollout_ego_accel(scratch, env, cfg.desired_speed);
      act = EgoAction::Hold;
    } else if (cfg.policy == RolloutPolicy::Random) {
      act = action_from_index(std::uniform_int_distribution<int>(0, kNumActions - 1)(rng));
    }
    const Status status = step_scene(scratch, act, env);
    ret += discount * reward(scene, scratch, status);
    discount *= env.discount;
    if (status != Status::Running) break;
  }
  return ret;
}

double MergeModel::rollout(const SceneState& s, int depth, Rng& rng) const {
  return mcts::rollout(s, depth, env_, rng, rollout_);
}

PlanResult plan(const SceneState& scene, const MctsParams& params, const EnvConfig& env, Rng& rng) {
  const MergeModel model(env, params.rollout);
  DpwPlanner<MergeModel> planner(model, params.dpw);
  PlanResult out;
  out.search = planner.search(determinize(scene, params.assumption), rng);
  out.action = action_from_index(out.search.action);
  return out;
}

EgoAction MctsAgent::act(const SceneState& scene) {
  const PlanResult result = plan(scene, params_, env_, rng_);
  stats_ = {{"iterations", static_cast<double>(result.search.iterations)},
            {"state_nodes", static_cast<double>(result.search.state_nodes)},
            {"best_q", result.search.best_q()},
            {"best_visits",
             static_cast<double>(result.search.root_visits[static_cast<std::size_t>(result.search.action)])}};
  return result.action;
}

}  // namespace merging::mcts
