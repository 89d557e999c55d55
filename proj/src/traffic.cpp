#include "merging/traffic.hpp"

#include <algorithm>
#include <cmath>

namespace merging {

const VehicleState* SceneState::find(VehicleId id) const {
  if (ego.id == id) return &ego;
  for (const auto& v : traffic) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

VehicleState* SceneState::find(VehicleId id) {
  return const_cast<VehicleState*>(std::as_const(*this).find(id));
}

PhysicalState step_kinematics(const PhysicalState& p, double dt) {
  PhysicalState next = p;
  const double v_end = p.v + p.a * dt;
  if (v_end < 0.0) {
    const double stop_time = p.v / -p.a;
    next.s = p.s + p.v * stop_time + 0.5 * p.a * stop_time * stop_time;
    next.v = 0.0;
    return next;
  }
  next.s = p.s + p.v * dt + 0.5 * p.a * dt * dt;
  next.v = v_end;
  return next;
}

namespace {

bool overlaps(const VehicleState& a, const VehicleState& b) {
  return a.rear() < b.phys.s && b.rear() < a.phys.s;
}

bool ego_in_conflict_zone(const VehicleState& ego) { return ego.phys.s >= -ego.length; }

}  // namespace

CollisionReport detect_collision(const SceneState& scene) {
  CollisionReport report;
  if (ego_in_conflict_zone(scene.ego)) {
    for (const auto& v : scene.traffic) {
      if (overlaps(scene.ego, v)) report.ego_involved.push_back(v.id);
    }
    report.ego_collision = !report.ego_involved.empty();
  }
  const auto& t = scene.traffic;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      if (overlaps(t[i], t[j])) report.traffic_overlaps.emplace_back(t[i].id, t[j].id);
    }
  }
  return report;
}

bool ego_collides(const SceneState& scene) {
  if (!ego_in_conflict_zone(scene.ego)) return false;
  return std::any_of(scene.traffic.begin(), scene.traffic.end(),
                     [&](const VehicleState& v) { return overlaps(scene.ego, v); });
}

void sort_traffic(std::vector<VehicleState>& traffic) {
  if (traffic_sorted(traffic)) return;
  std::stable_sort(traffic.begin(), traffic.end(),
                   [](const VehicleState& a, const VehicleState& b) { return a.phys.s < b.phys.s; });
}

bool traffic_sorted(const std::vector<VehicleState>& traffic) {
  for (std::size_t i = 1; i < traffic.size(); ++i) {
    if (!(traffic[i - 1].phys.s < traffic[i].phys.s)) return false;
  }
  return true;
}

void wrap_respawn_inplace(SceneState& scene, const LaneGeometry& geom) {
  auto& traffic = scene.traffic;
  const double lane_end = geom.lane_end();
  // Traffic is sorted, so vehicles past the end form a suffix. Respawning them
  // front-most first keeps their relative order at the back of the queue.
  while (!traffic.empty() && traffic.back().phys.s > lane_end) {
    VehicleState car = std::move(traffic.back());
    traffic.pop_back();
    double s = geom.lane_start();
    if (!traffic.empty()) {
      const auto& rearmost = traffic.front();
      const DriverParams params = car.driver.value_or(DriverParams{});
      s = std::min(s, rearmost.rear() - equilibrium_gap(car.phys.v, params));
    }
    car.phys.s = s;
    traffic.insert(traffic.begin(), std::move(car));
  }
}

SceneState wrap_respawn(SceneState scene, const LaneGeometry& geom) {
  wrap_respawn_inplace(scene, geom);
  return scene;
}

Neighbors find_neighbors(const SceneState& scene, const LaneGeometry& geom) {
  Neighbors out;
  const double ego_s = scene.ego.phys.s;
  const auto in_range = [&](const VehicleState& v) {
    return std::abs(v.phys.s - ego_s) <= geom.sensor_range;
  };
  const auto& t = scene.traffic;
  // Traffic is sorted ascending, so first/last matches are the nearest ones.
  for (auto it = t.rbegin(); it != t.rend(); ++it) {
    if (it->phys.s < ego_s) {
      if (in_range(*it)) out.projection_rear = it->id;
      break;
    }
  }
  for (const auto& v : t) {
    if (v.phys.s >= ego_s) {
      if (in_range(v)) out.projection_front = v.id;
      break;
    }
  }
  for (auto it = t.rbegin(); it != t.rend(); ++it) {
    if (it->phys.s <= 0.0) {
      if (in_range(*it)) out.behind_merge_point = it->id;
      break;
    }
  }
  if (ego_s >= 0.0) {
    for (const auto& v : t) {
      if (v.phys.s > ego_s) {
        if (in_range(v)) out.ego_front = v.id;
        break;
      }
    }
  }
  return out;
}

}  // namespace merging
