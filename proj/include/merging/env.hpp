#pragma once

#include <array>
#include <string_view>

#include <Eigen/Core>

#include "merging/driver.hpp"
#include "merging/traffic.hpp"
#include "merging/types.hpp"

namespace merging {

/// Seven discrete ego commands: five acceleration increments, hard brake, release.
enum class EgoAction : int {
  DecelLarge = 0,  // -1.0 m/s^2
  DecelSmall,      // -0.5
  Hold,            //  0
  AccelSmall,      // +0.5
  AccelLarge,      // +1.0
  HardBrake,
  Release,
};

inline constexpr int kNumActions = 7;

inline EgoAction action_from_index(int i) { return static_cast<EgoAction>(i); }
inline int action_index(EgoAction a) { return static_cast<int>(a); }
std::string_view action_name(EgoAction a);

enum class ObservationMode { Base, FullObs, Belief };

inline constexpr int kBaseObsWidth = 11;
inline constexpr int kAugmentedObsWidth = 15;

int observation_width(ObservationMode mode);
std::string_view mode_name(ObservationMode mode);
ObservationMode parse_mode(std::string_view name);

enum class Status { Running, Collision, GoalReached, TimeOut };
std::string_view status_name(Status s);

/// Raw observation values: ego (s, v, a) followed by four neighbor slots of
/// (relative s, v [, cooperation or belief]). Slot order is ego front,
/// behind merge point, projection rear, projection front.
using Observation = Eigen::VectorXd;

/// Divisors that bring observation entries to roughly unit scale.
struct ObservationScaling {
  double position = 60.0;
  double velocity = 10.0;
  double accel = 4.0;
};

Eigen::VectorXd observation_scale(ObservationMode mode, const ObservationScaling& scaling);

struct EnvConfig {
  LaneGeometry geom{};
  DriverModelConfig driver{};
  double dt = 0.5;
  int max_steps = 100;
  double ego_min_accel = -4.0;
  double ego_max_accel = 2.0;
  double hard_brake_accel = -4.0;
  double ego_length = 4.0;
  double discount = 0.95;
  double neutral_cooperation = 0.5;  // filler value for absent neighbor slots
  ObservationScaling scaling{};
};

/// New ego acceleration after applying a command.
double apply_action(const VehicleState& ego, EgoAction act, const EnvConfig& cfg);

Observation build_observation(const SceneState& scene, const EnvConfig& cfg,
                              ObservationMode mode);

double reward(const SceneState& prev, const SceneState& next, Status status);

struct StepOutcome {
  SceneState next_scene;
  Observation observation;
  double reward = 0.0;
  Status status = Status::Running;
};

/// Terminal status of a scene, Collision > GoalReached > TimeOut.
Status evaluate_status(const SceneState& scene, const EnvConfig& cfg);

/// Advances traffic one step with simultaneous C-IDM updates, then respawns.
/// The ego is read but not moved.
void advance_traffic(SceneState& scene, const EnvConfig& cfg, double dt);

/// Hot-path transition used by planners; mutates the scene and returns its status.
Status step_scene(SceneState& scene, EgoAction act, const EnvConfig& cfg);

/// Full transition. Throws std::logic_error when `scene` is already terminal.
/// In Belief mode the four belief entries hold the neutral prior; callers
/// tracking a CooperationBelief overwrite them.
StepOutcome env_step(const SceneState& scene, EgoAction act, const EnvConfig& cfg,
                     ObservationMode mode = ObservationMode::Base);

}  // namespace merging
