#include "merging/env.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace merging {

std::string_view action_name(EgoAction a) {
  switch (a) {
    case EgoAction::DecelLarge: return "decel_1.0";
    case EgoAction::DecelSmall: return "decel_0.5";
    case EgoAction::Hold: return "hold";
    case EgoAction::AccelSmall: return "accel_0.5";
    case EgoAction::AccelLarge: return "accel_1.0";
    case EgoAction::HardBrake: return "hard_brake";
    case EgoAction::Release: return "release";
  }
  return "unknown";
}

int observation_width(ObservationMode mode) {
  return mode == ObservationMode::Base ? kBaseObsWidth : kAugmentedObsWidth;
}

std::string_view mode_name(ObservationMode mode) {
  switch (mode) {
    case ObservationMode::Base: return "base";
    case ObservationMode::FullObs: return "fullobs";
    case ObservationMode::Belief: return "belief";
  }
  return "unknown";
}

ObservationMode parse_mode(std::string_view name) {
  if (name == "base") return ObservationMode::Base;
  if (name == "fullobs") return ObservationMode::FullObs;
  if (name == "belief") return ObservationMode::Belief;
  throw std::invalid_argument("unknown observation mode: " + std::string(name));
}

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Running: return "running";
    case Status::Collision: return "collision";
    case Status::GoalReached: return "goal";
    case Status::TimeOut: return "timeout";
  }
  return "unknown";
}

Eigen::VectorXd observation_scale(ObservationMode mode, const ObservationScaling& scaling) {
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(observation_width(mode));
  scale(0) = scaling.position;
  scale(1) = scaling.velocity;
  scale(2) = scaling.accel;
  for (int slot = 0; slot < 4; ++slot) {
    scale(3 + 2 * slot) = scaling.position;
    scale(4 + 2 * slot) = scaling.velocity;
  }
  return scale;
}

double apply_action(const VehicleState& ego, EgoAction act, const EnvConfig& cfg) {
  static constexpr std::array<double, 5> kIncrements{-1.0, -0.5, 0.0, 0.5, 1.0};
  switch (act) {
    case EgoAction::HardBrake: return cfg.hard_brake_accel;
    case EgoAction::Release: return 0.0;
    default:
      return std::clamp(ego.phys.a + kIncrements[static_cast<std::size_t>(act)],
                        cfg.ego_min_accel, cfg.ego_max_accel);
  }
}

Observation build_observation(const SceneState& scene, const EnvConfig& cfg,
                              ObservationMode mode) {
  Observation obs(observation_width(mode));
  const auto& ego = scene.ego.phys;
  obs(0) = ego.s;
  obs(1) = ego.v;
  obs(2) = ego.a;

  const Neighbors n = find_neighbors(scene, cfg.geom);
  const std::array<std::optional<VehicleId>, 4> slots{n.ego_front, n.behind_merge_point,
                                                       n.projection_rear, n.projection_front};
  // Fillers sit at the sensor boundary in the slot's direction, at ego speed.
  static constexpr std::array<double, 4> kFillerSide{1.0, -1.0, -1.0, 1.0};
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const int base = 3 + 2 * static_cast<int>(k);
    const VehicleState* car = slots[k] ? scene.find(*slots[k]) : nullptr;
    if (car != nullptr) {
      obs(base) = car->phys.s - ego.s;
      obs(base + 1) = car->phys.v;
    } else {
      obs(base) = kFillerSide[k] * cfg.geom.sensor_range;
      obs(base + 1) = ego.v;
    }
    if (mode != ObservationMode::Base) {
      double c = cfg.neutral_cooperation;
      if (mode == ObservationMode::FullObs && car != nullptr && car->driver) {
        c = car->driver->cooperation;
      }
      obs(kBaseObsWidth + static_cast<int>(k)) = c;
    }
  }
  return obs;
}

double reward(const SceneState&, const SceneState&, Status status) {
  switch (status) {
    case Status::Collision: return -1.0;
    case Status::GoalReached: return 1.0;
    default: return 0.0;
  }
}

Status evaluate_status(const SceneState& scene, const EnvConfig& cfg) {
  if (ego_collides(scene)) return Status::Collision;
  if (scene.ego.phys.s >= cfg.geom.goal_s()) return Status::GoalReached;
  if (scene.step_index >= cfg.max_steps) return Status::TimeOut;
  return Status::Running;
}

namespace {

void integrate_traffic(SceneState& scene, const EnvConfig& cfg, double dt) {
  thread_local std::vector<double> accels;
  const std::size_t n = scene.traffic.size();
  accels.resize(n);
  // Every driver reads the same pre-step scene.
  for (std::size_t i = 0; i < n; ++i) {
    accels[i] = cidm_accel_at(scene, i, cfg.geom, cfg.driver);
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& phys = scene.traffic[i].phys;
    phys.a = accels[i];
    phys = step_kinematics(phys, dt);
  }
}

void finish_traffic(SceneState& scene, const EnvConfig& cfg) {
  wrap_respawn_inplace(scene, cfg.geom);
  sort_traffic(scene.traffic);
}

}  // namespace

void advance_traffic(SceneState& scene, const EnvConfig& cfg, double dt) {
  if (dt <= 0.0) return;
  integrate_traffic(scene, cfg, dt);
  finish_traffic(scene, cfg);
}

Status step_scene(SceneState& scene, EgoAction act, const EnvConfig& cfg) {
  const double ego_accel = apply_action(scene.ego, act, cfg);
  integrate_traffic(scene, cfg, cfg.dt);
  scene.ego.phys.a = ego_accel;
  scene.ego.phys = step_kinematics(scene.ego.phys, cfg.dt);
  finish_traffic(scene, cfg);
  scene.time = (scene.step_index + 1) * cfg.dt;
  ++scene.step_index;
  return evaluate_status(scene, cfg);
}

StepOutcome env_step(const SceneState& scene, EgoAction act, const EnvConfig& cfg,
                     ObservationMode mode) {
  if (evaluate_status(scene, cfg) != Status::Running) {
    throw std::logic_error("env_step: scene is already terminal");
  }
  StepOutcome out;
  out.next_scene = scene;
  out.status = step_scene(out.next_scene, act, cfg);
  out.reward = reward(scene, out.next_scene, out.status);
  out.observation = build_observation(out.next_scene, cfg, mode);
  return out;
}

}  // namespace merging
