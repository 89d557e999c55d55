#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "merging/episode.hpp"
#include "merging/scenario.hpp"
#include "merging/types.hpp"

namespace merging {

inline constexpr const char* kScenarioSchema = "merging.scenarios/1";
inline constexpr const char* kTraceSchema = "merging.trace/1";

nlohmann::json to_json(const VehicleState& v);
nlohmann::json to_json(const SceneState& scene);
VehicleState vehicle_from_json(const nlohmann::json& j);
SceneState scene_from_json(const nlohmann::json& j);

void save_scenarios(const std::vector<SceneState>& scenes, const ScenarioConfig& cfg,
                    std::uint64_t seed, const std::string& path);
std::vector<SceneState> load_scenarios(const std::string& path);

/// One JSON object per line, one line per trace step.
void write_trace_jsonl(const EpisodeRecord& record, std::ostream& out);
void write_trace_jsonl(const EpisodeRecord& record, const std::string& path);

}  // namespace merging
