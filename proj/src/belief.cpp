#include "merging/belief.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace merging {

double CooperationBelief::theta(VehicleId id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? cfg_.prior : it->second;
}

double cooperation_posterior(double theta, double log_lik_coop, double log_lik_noncoop) {
  if (theta <= 0.0 || theta >= 1.0) return theta;
  const double log_ratio = log_lik_coop - log_lik_noncoop;
  if (log_ratio == 0.0 || std::isnan(log_ratio)) return theta;
  if (log_ratio > 0.0) {
    const double r = std::exp(-log_ratio);
    return theta / (theta + (1.0 - theta) * r);
  }
  const double r = std::exp(log_ratio);
  return theta * r / (theta * r + (1.0 - theta));
}

PhysicalState predict_vehicle(const SceneState& scene, VehicleId id, double hypothesis,
                              const EnvConfig& env, double dt) {
  for (std::size_t i = 0; i < scene.traffic.size(); ++i) {
    const auto& car = scene.traffic[i];
    if (car.id != id) continue;
    if (dt <= 0.0) return car.phys;
    PhysicalState next = car.phys;
    next.a = cidm_accel_with(scene, i, hypothesis, env.geom, env.driver);
    return step_kinematics(next, dt);
  }
  throw std::invalid_argument("predict_vehicle: unknown vehicle id " + std::to_string(id));
}

double transition_log_likelihood(const PhysicalState& observed, const PhysicalState& predicted,
                                 const BeliefConfig& cfg) {
  const double ds = (observed.s - predicted.s) / cfg.sigma_pos;
  const double dv = (observed.v - predicted.v) / cfg.sigma_vel;
  return -0.5 * (ds * ds + dv * dv);
}

CooperationBelief update_belief(const CooperationBelief& belief, const SceneState& prev,
                                const SceneState& next, const EnvConfig& env) {
  CooperationBelief out = belief;
  const double dt = next.time - prev.time;
  const double ego_s = next.ego.phys.s;
  for (const auto& car : next.traffic) {
    if (std::abs(car.phys.s - ego_s) > env.geom.sensor_range) continue;
    const VehicleState* before = prev.find(car.id);
    // Positions never decrease except through a respawn at the lane start.
    if (!belief.tracks(car.id) || before == nullptr || car.phys.s < before->phys.s) {
      out.set(car.id, belief.config().prior);
      continue;
    }
    const PhysicalState coop = predict_vehicle(prev, car.id, 1.0, env, dt);
    const PhysicalState blind = predict_vehicle(prev, car.id, 0.0, env, dt);
    if (coop.s == blind.s && coop.v == blind.v) continue;
    const double theta = belief.theta(car.id);
    out.set(car.id, cooperation_posterior(theta,
                                          transition_log_likelihood(car.phys, coop, belief.config()),
                                          transition_log_likelihood(car.phys, blind, belief.config())));
  }
  return out;
}

Observation belief_observation(const SceneState& scene, const CooperationBelief& belief,
                               const EnvConfig& env) {
  Observation obs = build_observation(scene, env, ObservationMode::Belief);
  const Neighbors n = find_neighbors(scene, env.geom);
  const std::array<std::optional<VehicleId>, 4> slots{n.ego_front, n.behind_merge_point,
                                                       n.projection_rear, n.projection_front};
  for (std::size_t k = 0; k < slots.size(); ++k) {
    obs(kBaseObsWidth + static_cast<int>(k)) =
        slots[k] ? belief.theta(*slots[k]) : belief.config().prior;
  }
  return obs;
}

}  // namespace merging
