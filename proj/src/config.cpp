#include "merging/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <array>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace merging {

namespace pt = boost::property_tree;

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

template <typename T>
std::vector<T> split(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T value{};
    if (!(is >> value)) throw std::invalid_argument("bad list entry: " + item);
    out.push_back(value);
  }
  return out;
}

std::string curriculum_text(const std::vector<rl::CurriculumStage>& stages) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    os << (i ? "," : "") << regime_name(stages[i].regime) << ':' << stages[i].fraction;
  }
  return os.str();
}

std::vector<rl::CurriculumStage> parse_curriculum(const std::string& text) {
  std::vector<rl::CurriculumStage> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("bad curriculum stage: " + item);
    out.push_back({parse_regime(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
  }
  return out;
}

/// Binds every key to a field so loading and saving share one table.
struct Binding {
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

// Shortest text that parses back to the same double.
std::string fmt(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

template <typename T>
Binding number(T& field) {
  return {[&field] {
            if constexpr (std::is_floating_point_v<T>) return fmt(field);
            else return std::to_string(field);
          },
          [&field](const std::string& s) {
            std::istringstream is(s);
            T value{};
            if (!(is >> value) || !(is >> std::ws).eof()) {
              throw std::invalid_argument("not a number: " + s);
            }
            field = value;
          }};
}

Binding boolean(bool& field) {
  return {[&field] { return std::string(field ? "true" : "false"); },
          [&field](const std::string& s) {
            if (s == "true" || s == "1") field = true;
            else if (s == "false" || s == "0") field = false;
            else throw std::invalid_argument("not a boolean: " + s);
          }};
}

std::map<std::string, Binding> bindings(RunConfig& c) {
  auto& g = c.env.geom;
  auto& d = c.env.driver;
  auto& sc = c.scenario;
  auto& t = c.train;
  auto& m = c.mcts;
  auto& e = c.eval;
  std::map<std::string, Binding> b{
      {"traffic.main_lane_length", number(g.main_lane_length)},
      {"traffic.merge_point_s", number(g.merge_point_s)},
      {"traffic.goal_offset", number(g.goal_offset)},
      {"traffic.merge_lane_length", number(g.merge_lane_length)},
      {"traffic.sensor_range", number(g.sensor_range)},
      {"driver.desired_speed", number(d.defaults.desired_speed)},
      {"driver.min_gap", number(d.defaults.min_gap)},
      {"driver.time_headway", number(d.defaults.time_headway)},
      {"driver.max_accel", number(d.defaults.max_accel)},
      {"driver.comfort_decel", number(d.defaults.comfort_decel)},
      {"driver.accel_exponent", number(d.defaults.accel_exponent)},
      {"driver.hard_decel", number(d.hard_decel)},
      {"driver.ttm_min_speed", number(d.ttm_min_speed)},
      {"env.dt", number(c.env.dt)},
      {"env.max_steps", number(c.env.max_steps)},
      {"env.ego_min_accel", number(c.env.ego_min_accel)},
      {"env.ego_max_accel", number(c.env.ego_max_accel)},
      {"env.hard_brake_accel", number(c.env.hard_brake_accel)},
      {"env.ego_length", number(c.env.ego_length)},
      {"env.discount", number(c.env.discount)},
      {"env.neutral_cooperation", number(c.env.neutral_cooperation)},
      {"env.scale_position", number(c.env.scaling.position)},
      {"env.scale_velocity", number(c.env.scaling.velocity)},
      {"env.scale_accel", number(c.env.scaling.accel)},
      {"scenario.mixed_min_cars", number(sc.mixed_counts.min)},
      {"scenario.mixed_max_cars", number(sc.mixed_counts.max)},
      {"scenario.dense_min_cars", number(sc.dense_counts.min)},
      {"scenario.dense_max_cars", number(sc.dense_counts.max)},
      {"scenario.v_mean", number(sc.v_mean)},
      {"scenario.v_std", number(sc.v_std)},
      {"scenario.v_min", number(sc.v_min)},
      {"scenario.v_max", number(sc.v_max)},
      {"scenario.v0_choices",
       {[&sc] { return join_doubles(sc.v0_choices); },
        [&sc](const std::string& s) { sc.v0_choices = split<double>(s); }}},
      {"scenario.c_min", number(sc.c_min)},
      {"scenario.c_max", number(sc.c_max)},
      {"scenario.burn_in_min", number(sc.burn_in_min)},
      {"scenario.burn_in_max", number(sc.burn_in_max)},
      {"scenario.vehicle_length", number(sc.vehicle_length)},
      {"scenario.ego_speed", number(sc.ego_speed)},
      {"scenario.max_placement_attempts", number(sc.max_placement_attempts)},
      {"belief.sigma_pos", number(c.belief.sigma_pos)},
      {"belief.sigma_vel", number(c.belief.sigma_vel)},
      {"belief.prior", number(c.belief.prior)},
      {"rl.total_steps", number(t.total_steps)},
      {"rl.gamma", number(t.gamma)},
      {"rl.learning_rate", number(t.learning_rate)},
      {"rl.hidden",
       {[&t] { return join_ints(t.hidden); }, [&t](const std::string& s) { t.hidden = split<int>(s); }}},
      {"rl.buffer_capacity", number(t.buffer_capacity)},
      {"rl.priority_alpha", number(t.priority_alpha)},
      {"rl.priority_beta", number(t.priority_beta)},
      {"rl.priority_eps", number(t.priority_eps)},
      {"rl.target_update_period", number(t.target_update_period)},
      {"rl.target_update_unit",
       {[&t] { return std::string(t.target_update_unit == rl::TargetUpdateUnit::Episodes ? "episodes" : "steps"); },
        [&t](const std::string& s) {
          if (s == "episodes") t.target_update_unit = rl::TargetUpdateUnit::Episodes;
          else if (s == "steps") t.target_update_unit = rl::TargetUpdateUnit::Steps;
          else throw std::invalid_argument("target_update_unit must be episodes or steps");
        }}},
      {"rl.exploration_fraction", number(t.exploration_fraction)},
      {"rl.eps_start", number(t.eps_start)},
      {"rl.eps_final", number(t.eps_final)},
      {"rl.batch_size", number(t.batch_size)},
      {"rl.train_freq", number(t.train_freq)},
      {"rl.learning_starts", number(t.learning_starts)},
      {"rl.curriculum",
       {[&t] { return curriculum_text(t.curriculum); },
        [&t](const std::string& s) { t.curriculum = parse_curriculum(s); }}},
      {"rl.mode",
       {[&t] { return std::string(mode_name(t.mode)); },
        [&t](const std::string& s) { t.mode = parse_mode(s); }}},
      {"rl.eval_every", number(t.eval_every)},
      {"rl.eval_episodes", number(t.eval_episodes)},
      {"rl.keep_best", boolean(t.keep_best)},
      {"rl.seed", number(t.seed)},
      {"mcts.iterations", number(m.iterations)},
      {"mcts.max_depth", number(m.max_depth)},
      {"mcts.exploration", number(m.exploration)},
      {"mcts.k_action", number(m.k_action)},
      {"mcts.alpha_action", number(m.alpha_action)},
      {"mcts.k_state", number(m.k_state)},
      {"mcts.alpha_state", number(m.alpha_state)},
      {"mcts.time_limit_s", number(m.time_limit_s)},
      {"mcts.rollout",
       {[&c] { return std::string(mcts::rollout_name(c.rollout.policy)); },
        [&c](const std::string& s) { c.rollout.policy = mcts::parse_rollout(s); }}},
      {"mcts.rollout_speed", number(c.rollout.desired_speed)},
      {"eval.policy",
       {[&e] { return std::string(policy_name(e.policy)); },
        [&e](const std::string& s) { e.policy = parse_policy(s); }}},
      {"eval.regime",
       {[&e] { return std::string(regime_name(e.regime)); },
        [&e](const std::string& s) { e.regime = parse_regime(s); }}},
      {"eval.episodes", number(e.episodes)},
      {"eval.seed", number(e.seed)},
      {"eval.threads", number(e.threads)},
      {"eval.record_traces", boolean(e.record_traces)},
      {"eval.record_belief", boolean(e.record_belief)},
  };
  return b;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  auto table = bindings(cfg);
  for (const auto& [section, body] : tree) {
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = table.find(full);
      if (it == table.end()) throw std::runtime_error("config: unknown key " + full);
      try {
        it->second.set(value.get_value<std::string>());
      } catch (const std::exception& e) {
        throw std::runtime_error("config: " + full + ": " + e.what());
      }
    }
  }
  if (!cfg.env.geom.valid()) throw std::runtime_error("config: invalid lane geometry");
  cfg.scenario.regime = cfg.eval.regime;
  return cfg;
}

void save_run_config(const RunConfig& cfg_in, const std::string& path) {
  RunConfig cfg = cfg_in;
  pt::ptree tree;
  for (const auto& [key, binding] : bindings(cfg)) tree.put(pt::ptree::path_type(key, '.'), binding.get());
  pt::write_ini(path, tree);
}

}  // namespace merging
