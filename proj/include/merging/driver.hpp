#pragma once

#include <limits>

#include "merging/types.hpp"

namespace merging {

/// Constants shared by every main-lane driver. Per-driver IDM values live in
/// DriverParams; `defaults` seeds the scenario generator.
struct DriverModelConfig {
  DriverParams defaults{};
  double hard_decel = 4.0;      // emergency braking magnitude
  double ttm_min_speed = 0.1;   // below this a vehicle never reaches the merge point
};

inline constexpr double kNoLeaderGap = std::numeric_limits<double>::infinity();

/// Intelligent Driver Model acceleration. Pass gap = kNoLeaderGap for free road.
/// Result is clamped to [-hard_decel, max_accel]; gap <= 0 yields -hard_decel.
double idm_accel(double v, double gap, double closing_speed, const DriverParams& p,
                 double hard_decel);

/// Constant-velocity time to reach the merge point.
double time_to_merge(double distance_to_merge, double v, double min_speed);

/// Bumper gap a follower settles at behind a leader moving at v. The free-road
/// factor is capped so the gap stays finite near the desired speed.
double equilibrium_gap(double v, const DriverParams& p);

/// Who a main-lane vehicle reacts to in the current scene.
struct LeaderChoice {
  double gap = kNoLeaderGap;
  double closing_speed = 0.0;
  bool yielding = false;  // reacting to the merging ego's projection
};

/// Leader the Cooperative IDM selects for traffic[index].
LeaderChoice cidm_leader(const SceneState& scene, std::size_t index, double cooperation,
                         const LaneGeometry& geom, const DriverModelConfig& cfg);

/// Cooperative IDM: a driver yields to the merging ego's projection when
/// TTM_ego < c * TTM_self, otherwise follows its real leader.
double cidm_accel(const VehicleState& subject, const SceneState& scene,
                  const LaneGeometry& geom, const DriverModelConfig& cfg);

/// C-IDM acceleration of traffic[index] with its cooperation replaced.
double cidm_accel_with(const SceneState& scene, std::size_t index, double cooperation,
                       const LaneGeometry& geom, const DriverModelConfig& cfg);

/// Same as cidm_accel for traffic[index], without the id lookup.
double cidm_accel_at(const SceneState& scene, std::size_t index, const LaneGeometry& geom,
                     const DriverModelConfig& cfg);

/// Whether the yield gate is open for traffic[index] with its cooperation
/// replaced by `cooperation`.
bool yield_gate_open(const SceneState& scene, std::size_t index, double cooperation,
                     const LaneGeometry& geom, const DriverModelConfig& cfg);

}  // namespace merging
