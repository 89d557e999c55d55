#pragma once

#include <random>
#include <string_view>
#include <vector>

#include "merging/env.hpp"
#include "merging/types.hpp"

namespace merging {

using Rng = std::mt19937_64;

enum class Regime { Mixed, Dense };

std::string_view regime_name(Regime r);
Regime parse_regime(std::string_view name);

struct CarCountRange {
  int min = 0;
  int max = 0;
};

CarCountRange regime_car_counts(Regime r);

/// Initial-state distribution for one traffic regime.
struct ScenarioConfig {
  Regime regime = Regime::Dense;
  CarCountRange mixed_counts{5, 12};
  CarCountRange dense_counts{10, 14};
  double v_mean = 5.0;
  double v_std = 1.0;
  double v_min = 0.0;
  double v_max = 10.0;
  std::vector<double> v0_choices{4.0, 5.0, 6.0};
  double c_min = 0.0;
  double c_max = 1.0;
  double burn_in_min = 10.0;
  double burn_in_max = 20.0;
  double vehicle_length = 4.0;
  double ego_speed = 5.0;
  int max_placement_attempts = 100;

  CarCountRange counts() const { return regime == Regime::Mixed ? mixed_counts : dense_counts; }
};

/// Draws a main-lane population, relaxes it under C-IDM without the ego for a
/// random burn-in, then inserts the ego at the start of the merge lane.
SceneState sample_initial_scene(const ScenarioConfig& cfg, const EnvConfig& env, Rng& rng);

/// Scenario i of a seeded evaluation set. Streams are independent of the
/// order scenarios are drawn in.
Rng scenario_rng(std::uint64_t seed, std::uint64_t index);
Rng episode_rng(std::uint64_t seed, std::uint64_t index);

std::vector<SceneState> generate_scenarios(const ScenarioConfig& cfg, const EnvConfig& env,
                                           std::uint64_t seed, std::size_t count);

}  // namespace merging
