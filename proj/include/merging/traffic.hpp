#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "merging/driver.hpp"
#include "merging/types.hpp"

namespace merging {

/// Point-mass step under constant acceleration. A vehicle that would reverse
/// halts at the analytic stop time instead.
PhysicalState step_kinematics(const PhysicalState& p, double dt);

struct CollisionReport {
  bool ego_collision = false;
  std::vector<VehicleId> ego_involved;
  std::vector<std::pair<VehicleId, VehicleId>> traffic_overlaps;

  bool any() const { return ego_collision || !traffic_overlaps.empty(); }
};

/// Ego collisions only count once the ego body reaches the conflict zone
/// (s >= -length). Main-lane overlaps are reported separately.
CollisionReport detect_collision(const SceneState& scene);

/// Cheaper predicate used in the stepping hot path.
bool ego_collides(const SceneState& scene);

/// Moves vehicles beyond the end of the main lane back behind the rearmost car.
SceneState wrap_respawn(SceneState scene, const LaneGeometry& geom);
void wrap_respawn_inplace(SceneState& scene, const LaneGeometry& geom);

struct Neighbors {
  std::optional<VehicleId> ego_front;
  std::optional<VehicleId> behind_merge_point;
  std::optional<VehicleId> projection_rear;
  std::optional<VehicleId> projection_front;
};

/// The four observed neighbors, each within sensor range of the ego. The ego
/// projection shares the ego's coordinate, so no transform is applied. The
/// ego_front slot is only filled once the ego has reached the main lane.
Neighbors find_neighbors(const SceneState& scene, const LaneGeometry& geom);

/// Sorts traffic by ascending s (stable).
void sort_traffic(std::vector<VehicleState>& traffic);

bool traffic_sorted(const std::vector<VehicleState>& traffic);

}  // namespace merging
