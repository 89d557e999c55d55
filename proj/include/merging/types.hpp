#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace merging {

/// Road layout. All positions share one signed axis whose origin is the merge
/// point; the main lane spans [-merge_point_s, main_lane_length - merge_point_s]
/// and the merge lane approaches from -merge_lane_length.
struct LaneGeometry {
  double main_lane_length = 150.0;
  double merge_point_s = 100.0;
  double goal_offset = 50.0;
  double merge_lane_length = 50.0;
  double sensor_range = 60.0;

  double lane_start() const { return -merge_point_s; }
  double lane_end() const { return main_lane_length - merge_point_s; }
  double goal_s() const { return goal_offset; }
  double ego_start_s() const { return -merge_lane_length; }

  bool valid() const {
    return main_lane_length > 0 && merge_point_s > 0 && goal_offset > 0 &&
           merge_lane_length > 0 && sensor_range > 0 &&
           merge_point_s + goal_offset <= main_lane_length;
  }
};

struct PhysicalState {
  double s = 0.0;  // front bumper
  double v = 0.0;
  double a = 0.0;

  friend bool operator==(const PhysicalState&, const PhysicalState&) = default;
};

/// IDM parameters plus the cooperation level of a main-lane driver.
struct DriverParams {
  double cooperation = 0.0;
  double desired_speed = 5.0;
  double min_gap = 1.0;
  double time_headway = 1.0;
  double max_accel = 2.0;
  double comfort_decel = 2.0;
  double accel_exponent = 4.0;

  bool valid() const {
    return cooperation >= 0.0 && cooperation <= 1.0 && desired_speed > 0 &&
           min_gap > 0 && time_headway > 0 && max_accel > 0 && comfort_decel > 0;
  }

  friend bool operator==(const DriverParams&, const DriverParams&) = default;
};

enum class Lane : std::uint8_t { Main, Merge };

using VehicleId = std::int32_t;

struct VehicleState {
  VehicleId id = 0;
  PhysicalState phys;
  Lane lane = Lane::Main;
  double length = 4.0;
  std::optional<DriverParams> driver;  // empty for the ego

  double rear() const { return phys.s - length; }

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// The full environment state: the ego plus main-lane traffic sorted by
/// ascending s (traffic.front() is the rearmost car).
struct SceneState {
  VehicleState ego;
  std::vector<VehicleState> traffic;
  double time = 0.0;
  int step_index = 0;

  const VehicleState* find(VehicleId id) const;
  VehicleState* find(VehicleId id);

  friend bool operator==(const SceneState&, const SceneState&) = default;
};

inline constexpr VehicleId kEgoId = 0;

}  // namespace merging
