#include "merging/scenario.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace merging {

std::string_view regime_name(Regime r) { return r == Regime::Mixed ? "mixed" : "dense"; }

Regime parse_regime(std::string_view name) {
  if (name == "mixed") return Regime::Mixed;
  if (name == "dense") return Regime::Dense;
  throw std::invalid_argument("unknown regime: " + std::string(name));
}

CarCountRange regime_car_counts(Regime r) { return ScenarioConfig{r}.counts(); }

namespace {

constexpr std::uint64_t kScenarioStream = 0x5ce9a210ULL;
constexpr std::uint64_t kEpisodeStream = 0xe915de00ULL;

Rng stream_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

// Uniform order statistics with a minimum front-to-front spacing.
bool place_fronts(int n, double first_front, double last_front, double spacing, Rng& rng,
                  std::vector<double>& fronts) {
  const double slack = (last_front - first_front) - (n - 1) * spacing;
  if (slack < 0.0) return false;
  std::uniform_real_distribution<double> u(0.0, slack);
  fronts.resize(static_cast<std::size_t>(n));
  for (auto& f : fronts) f = u(rng);
  std::sort(fronts.begin(), fronts.end());
  for (int i = 0; i < n; ++i) fronts[static_cast<std::size_t>(i)] += first_front + i * spacing;
  return true;
}

}  // namespace

Rng scenario_rng(std::uint64_t seed, std::uint64_t index) {
  return stream_rng(seed, index, kScenarioStream);
}

Rng episode_rng(std::uint64_t seed, std::uint64_t index) {
  return stream_rng(seed, index, kEpisodeStream);
}

SceneState sample_initial_scene(const ScenarioConfig& cfg, const EnvConfig& env, Rng& rng) {
  const CarCountRange counts = cfg.counts();
  if (counts.min <= 0 || counts.max < counts.min) {
    throw std::invalid_argument("scenario: invalid car-count range");
  }
  const auto& geom = env.geom;
  const double spacing = env.driver.defaults.min_gap + cfg.vehicle_length;
  const double first_front = geom.lane_start() + cfg.vehicle_length;
  const double last_front = geom.lane_end();

  std::uniform_int_distribution<int> count_dist(counts.min, counts.max);
  std::vector<double> fronts;
  int n = 0;
  int attempts = 0;
  do {
    if (++attempts > cfg.max_placement_attempts) {
      throw std::runtime_error("scenario: cannot fit the requested cars on the main lane");
    }
    n = count_dist(rng);
  } while (!place_fronts(n, first_front, last_front, spacing, rng, fronts));

  std::normal_distribution<double> speed(cfg.v_mean, cfg.v_std);
  std::uniform_int_distribution<std::size_t> v0_pick(0, cfg.v0_choices.size() - 1);
  std::uniform_real_distribution<double> coop(cfg.c_min, cfg.c_max);

  SceneState scene;
  scene.traffic.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) {
    VehicleState car;
    car.id = i + 1;
    car.lane = Lane::Main;
    car.length = cfg.vehicle_length;
    car.phys.s = fronts[static_cast<std::size_t>(i)];
    car.phys.v = std::clamp(speed(rng), cfg.v_min, cfg.v_max);
    DriverParams p = env.driver.defaults;
    p.desired_speed = cfg.v0_choices[v0_pick(rng)];
    p.cooperation = coop(rng);
    car.driver = p;
    scene.traffic.push_back(std::move(car));
  }

  // Burn-in runs without an ego: park it where no driver can sense it.
  scene.ego.id = kEgoId;
  scene.ego.lane = Lane::Merge;
  scene.ego.length = env.ego_length;
  scene.ego.phys = {-std::numeric_limits<double>::infinity(), 0.0, 0.0};

  double remaining = cfg.burn_in_min;
  if (cfg.burn_in_max > cfg.burn_in_min) {
    remaining = std::uniform_real_distribution<double>(cfg.burn_in_min, cfg.burn_in_max)(rng);
  }
  while (remaining > 0.0) {
    const double dt = std::min(env.dt, remaining);
    advance_traffic(scene, env, dt);
    remaining -= dt;
  }

  scene.ego.phys = {geom.ego_start_s(), cfg.ego_speed, 0.0};
  scene.time = 0.0;
  scene.step_index = 0;
  return scene;
}

std::vector<SceneState> generate_scenarios(const ScenarioConfig& cfg, const EnvConfig& env,
                                           std::uint64_t seed, std::size_t count) {
  std::vector<SceneState> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = scenario_rng(seed, i);
    out.push_back(sample_initial_scene(cfg, env, rng));
  }
  return out;
}

}  // namespace merging
