#include "merging/driver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace merging {
namespace {

double power(double x, double exponent) {
  if (exponent == 4.0) {
    const double x2 = x * x;
    return x2 * x2;
  }
  return std::pow(x, exponent);
}

}  // namespace

double idm_accel(double v, double gap, double closing_speed, const DriverParams& p,
                 double hard_decel) {
  double accel = 1.0 - power(v / p.desired_speed, p.accel_exponent);
  if (gap != kNoLeaderGap) {
    if (!(gap > 0.0)) return -hard_decel;
    const double dynamic = v * p.time_headway +
                           v * closing_speed / (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
    const double desired_gap = p.min_gap + std::max(0.0, dynamic);
    const double ratio = desired_gap / gap;
    accel -= ratio * ratio;
  }
  accel *= p.max_accel;
  if (!std::isfinite(accel)) return -hard_decel;
  return std::clamp(accel, -hard_decel, p.max_accel);
}

double time_to_merge(double distance_to_merge, double v, double min_speed) {
  if (distance_to_merge <= 0.0) return 0.0;
  if (v <= min_speed) return std::numeric_limits<double>::infinity();
  return distance_to_merge / v;
}

double equilibrium_gap(double v, const DriverParams& p) {
  const double free_term = std::min(power(v / p.desired_speed, p.accel_exponent), 0.75);
  return (p.min_gap + v * p.time_headway) / std::sqrt(1.0 - free_term);
}

bool yield_gate_open(const SceneState& scene, std::size_t index, double cooperation,
                     const LaneGeometry& geom, const DriverModelConfig& cfg) {
  const auto& ego = scene.ego.phys;
  if (ego.s >= 0.0 || -ego.s > geom.sensor_range) return false;
  const auto& traffic = scene.traffic;
  const auto& subject = traffic[index].phys;
  if (subject.s >= ego.s) return false;
  if (index + 1 < traffic.size() && traffic[index + 1].phys.s < ego.s) return false;
  if (ego.s - subject.s > geom.sensor_range) return false;

  const double ttm_ego = time_to_merge(-ego.s, ego.v, cfg.ttm_min_speed);
  const double ttm_self = time_to_merge(-subject.s, subject.v, cfg.ttm_min_speed);
  if (!std::isfinite(ttm_ego) || !std::isfinite(ttm_self)) return false;
  return ttm_ego < cooperation * ttm_self;
}

LeaderChoice cidm_leader(const SceneState& scene, std::size_t index, double cooperation,
                         const LaneGeometry& geom, const DriverModelConfig& cfg) {
  const auto& traffic = scene.traffic;
  const auto& subject = traffic[index];
  const auto& ego = scene.ego;
  LeaderChoice choice;

  if (yield_gate_open(scene, index, cooperation, geom, cfg)) {
    choice.gap = ego.rear() - subject.phys.s;
    choice.closing_speed = subject.phys.v - ego.phys.v;
    choice.yielding = true;
    return choice;
  }

  const VehicleState* leader = index + 1 < traffic.size() ? &traffic[index + 1] : nullptr;
  // Once past the merge point the ego is part of the main-lane ordering.
  if (ego.phys.s >= 0.0 && ego.phys.s > subject.phys.s &&
      (leader == nullptr || ego.phys.s < leader->phys.s)) {
    leader = &ego;
  }
  if (leader != nullptr) {
    choice.gap = leader->rear() - subject.phys.s;
    choice.closing_speed = subject.phys.v - leader->phys.v;
  }
  return choice;
}

double cidm_accel_with(const SceneState& scene, std::size_t index, double cooperation,
                       const LaneGeometry& geom, const DriverModelConfig& cfg) {
  const auto& subject = scene.traffic[index];
  const DriverParams& params = subject.driver ? *subject.driver : cfg.defaults;
  const LeaderChoice leader = cidm_leader(scene, index, cooperation, geom, cfg);
  return idm_accel(subject.phys.v, leader.gap, leader.closing_speed, params, cfg.hard_decel);
}

double cidm_accel_at(const SceneState& scene, std::size_t index, const LaneGeometry& geom,
                     const DriverModelConfig& cfg) {
  const auto& subject = scene.traffic[index];
  const double c = subject.driver ? subject.driver->cooperation : 0.0;
  return cidm_accel_with(scene, index, c, geom, cfg);
}

double cidm_accel(const VehicleState& subject, const SceneState& scene,
                  const LaneGeometry& geom, const DriverModelConfig& cfg) {
  for (std::size_t i = 0; i < scene.traffic.size(); ++i) {
    if (scene.traffic[i].id == subject.id) return cidm_accel_at(scene, i, geom, cfg);
  }
  throw std::invalid_argument("cidm_accel: subject is not a main-lane vehicle of the scene");
}

}  // namespace merging
