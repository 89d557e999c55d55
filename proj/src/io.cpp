#include "merging/io.hpp"

#include <fstream>
#include <stdexcept>

namespace merging {

using nlohmann::json;

json to_json(const VehicleState& v) {
  json j{{"id", v.id},
         {"lane", v.lane == Lane::Main ? "main" : "merge"},
         {"s", v.phys.s},
         {"v", v.phys.v},
         {"a", v.phys.a},
         {"length", v.length}};
  if (v.driver) {
    const auto& d = *v.driver;
    j["driver"] = {{"c", d.cooperation},     {"v0", d.desired_speed}, {"s0", d.min_gap},
                   {"T", d.time_headway},    {"a_max", d.max_accel},  {"b", d.comfort_decel},
                   {"delta", d.accel_exponent}};
  }
  return j;
}

json to_json(const SceneState& scene) {
  json traffic = json::array();
  for (const auto& v : scene.traffic) traffic.push_back(to_json(v));
  return {{"time", scene.time},
          {"step", scene.step_index},
          {"ego", to_json(scene.ego)},
          {"traffic", std::move(traffic)}};
}

VehicleState vehicle_from_json(const json& j) {
  VehicleState v;
  v.id = j.at("id").get<VehicleId>();
  const auto lane = j.at("lane").get<std::string>();
  if (lane != "main" && lane != "merge") throw std::invalid_argument("bad lane: " + lane);
  v.lane = lane == "main" ? Lane::Main : Lane::Merge;
  v.phys = {j.at("s").get<double>(), j.at("v").get<double>(), j.at("a").get<double>()};
  v.length = j.at("length").get<double>();
  if (j.contains("driver")) {
    const auto& d = j.at("driver");
    v.driver = DriverParams{d.at("c").get<double>(),  d.at("v0").get<double>(),
                            d.at("s0").get<double>(), d.at("T").get<double>(),
                            d.at("a_max").get<double>(), d.at("b").get<double>(),
                            d.at("delta").get<double>()};
  }
  return v;
}

SceneState scene_from_json(const json& j) {
  SceneState scene;
  scene.time = j.at("time").get<double>();
  scene.step_index = j.at("step").get<int>();
  scene.ego = vehicle_from_json(j.at("ego"));
  for (const auto& v : j.at("traffic")) scene.traffic.push_back(vehicle_from_json(v));
  return scene;
}

void save_scenarios(const std::vector<SceneState>& scenes, const ScenarioConfig& cfg,
                    std::uint64_t seed, const std::string& path) {
  json scenes_json = json::array();
  for (const auto& s : scenes) scenes_json.push_back(to_json(s));
  const json doc{{"schema", kScenarioSchema},
                 {"regime", std::string(regime_name(cfg.regime))},
                 {"seed", seed},
                 {"scenes", std::move(scenes_json)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenarios: " + path);
  out << doc.dump(1) << '\n';
}

std::vector<SceneState> load_scenarios(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read scenarios: " + path);
  const json doc = json::parse(in);
  if (doc.value("schema", "") != kScenarioSchema) {
    throw std::runtime_error("unsupported scenario schema in " + path);
  }
  std::vector<SceneState> scenes;
  for (const auto& s : doc.at("scenes")) scenes.push_back(scene_from_json(s));
  return scenes;
}

void write_trace_jsonl(const EpisodeRecord& record, std::ostream& out) {
  for (const auto& step : record.trace) {
    json line = to_json(step.scene);
    line["schema"] = kTraceSchema;
    line["action"] = step.action ? json(std::string(action_name(*step.action))) : json(nullptr);
    line["reward"] = step.reward;
    line["status"] = std::string(status_name(step.status));
    if (step.belief) {
      json b = json::object();
      for (const auto& [id, theta] : *step.belief) b[std::to_string(id)] = theta;
      line["belief"] = std::move(b);
    }
    if (!step.search.empty()) {
      json s = json::object();
      for (const auto& [k, v] : step.search) s[k] = v;
      line["search"] = std::move(s);
    }
    out << line.dump() << '\n';
  }
}

void write_trace_jsonl(const EpisodeRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  write_trace_jsonl(record, out);
}

}  // namespace merging
