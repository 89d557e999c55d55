#pragma once

#include <vector>

#include "merging/env.hpp"
#include "merging/types.hpp"

namespace merging::testing {

inline VehicleState car(VehicleId id, double s, double v, double c = 0.0, double v0 = 5.0) {
  VehicleState out;
  out.id = id;
  out.lane = Lane::Main;
  out.length = 4.0;
  out.phys = {s, v, 0.0};
  DriverParams p;
  p.cooperation = c;
  p.desired_speed = v0;
  out.driver = p;
  return out;
}

inline VehicleState ego(double s, double v, double a = 0.0) {
  VehicleState out;
  out.id = kEgoId;
  out.lane = Lane::Merge;
  out.length = 4.0;
  out.phys = {s, v, a};
  return out;
}

inline SceneState scene(VehicleState e, std::vector<VehicleState> traffic) {
  SceneState s;
  s.ego = std::move(e);
  s.traffic = std::move(traffic);
  return s;
}

}  // namespace merging::testing
