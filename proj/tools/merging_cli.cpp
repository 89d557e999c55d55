#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "merging/config.hpp"
#include "merging/eval.hpp"
#include "merging/io.hpp"
#include "merging/rl/dqn.hpp"
#include "merging/rl/policy.hpp"

namespace fs = std::filesystem;
using namespace merging;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<std::string> regime;
  std::optional<int> threads;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "INI run configuration")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Scenario seed");
  app->add_option("--episodes", c.episodes, "Number of evaluation episodes");
  app->add_option("--regime", c.regime, "Traffic regime (mixed|dense)");
  app->add_option("--threads", c.threads, "Worker threads");
  app->add_option("--out", c.out, "Output directory (default $MERGING_OUT or ./out)");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
  if (c.seed) cfg.eval.seed = *c.seed;
  if (c.episodes) cfg.eval.episodes = *c.episodes;
  if (c.regime) cfg.eval.regime = parse_regime(*c.regime);
  if (c.threads) cfg.eval.threads = *c.threads;
  cfg.scenario.regime = cfg.eval.regime;
  return cfg;
}

fs::path out_dir(const Common& c) {
  fs::path dir = c.out;
  if (dir.empty()) {
    const char* env = std::getenv("MERGING_OUT");
    dir = env != nullptr ? env : "out";
  }
  fs::create_directories(dir);
  return dir;
}

// "rl-belief=path" pairs; a bare path applies to the single RL policy requested.
std::map<PolicyKind, std::string> parse_policy_files(const std::vector<std::string>& items,
                                                     const std::vector<PolicyKind>& kinds) {
  std::map<PolicyKind, std::string> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq != std::string::npos) {
      out[parse_policy(item.substr(0, eq))] = item.substr(eq + 1);
      continue;
    }
    std::vector<PolicyKind> rl_kinds;
    for (PolicyKind k : kinds) {
      if (is_rl(k)) rl_kinds.push_back(k);
    }
    if (rl_kinds.size() != 1) throw CLI::ValidationError("--policy-file", "use kind=path with several RL policies");
    out[rl_kinds.front()] = item;
  }
  return out;
}

PolicySource make_source(PolicyKind kind, const std::map<PolicyKind, std::string>& files, const RunConfig& cfg) {
  if (!is_rl(kind)) return PolicySource::mcts(kind, cfg.mcts, cfg.rollout);
  const auto it = files.find(kind);
  if (it == files.end()) {
    throw std::runtime_error(std::string(policy_name(kind)) + " needs --policy-file");
  }
  return PolicySource::rl_from_file(kind, it->second);
}

void write_traces(const EvalResult& result, const fs::path& dir, std::string_view policy) {
  const fs::path traces = dir / "traces";
  fs::create_directories(traces);
  for (std::size_t i = 0; i < result.episodes.size(); ++i) {
    std::ostringstream name;
    name << policy << '_' << std::setw(5) << std::setfill('0') << i << ".jsonl";
    write_trace_jsonl(result.episodes[i], (traces / name.str()).string());
  }
}

void print_metrics(const std::vector<Metrics>& rows) {
  std::cout << std::left << std::setw(14) << "policy" << std::right << std::setw(12) << "collision%"
            << std::setw(12) << "timeout%" << std::setw(10) << "goal%" << std::setw(12) << "steps" << '\n';
  std::cout << std::fixed << std::setprecision(1);
  for (const auto& m : rows) {
    std::cout << std::left << std::setw(14) << m.policy << std::right << std::setw(12) << m.collision_rate
              << std::setw(12) << m.timeout_rate << std::setw(10) << m.goal_rate << std::setw(12)
              << m.mean_steps_to_goal << '\n';
  }
}

int run_train(const Common& c, const std::string& mode, std::optional<long> steps, std::optional<std::uint64_t> train_seed) {
  RunConfig cfg = resolve(c);
  cfg.train.mode = parse_mode(mode);
  if (steps) cfg.train.total_steps = *steps;
  if (train_seed) cfg.train.seed = *train_seed;
  const fs::path dir = out_dir(c);
  std::cout << "training " << mode_name(cfg.train.mode) << " for " << cfg.train.total_steps << " steps\n";
  const rl::TrainResult result = rl::train_dqn(cfg.train, cfg.env, cfg.scenario, cfg.belief, [](const rl::TrainLogRow& r) {
    std::cout << "step " << r.step << " eps " << std::setprecision(3) << r.epsilon << " loss " << r.loss
              << " goal " << r.eval_goal_rate << " collision " << r.eval_collision_rate << std::endl;
  });
  const fs::path policy_path = dir / ("policy_" + std::string(mode_name(cfg.train.mode)) + ".bin");
  rl::save_policy(result.policy, policy_path.string());
  rl::write_train_log_csv(result.log, (dir / "train_log.csv").string());
  std::cout << "episodes " << result.episodes << ", updates " << result.gradient_updates << ", weights from step "
            << result.selected_step << "\nwrote " << policy_path.string() << '\n';
  return 0;
}

int run_evaluate(const Common& c, const std::string& policy, const std::vector<std::string>& files,
                 bool trace, bool belief_trace) {
  RunConfig cfg = resolve(c);
  cfg.eval.policy = parse_policy(policy);
  cfg.eval.record_traces = trace || belief_trace;
  cfg.eval.record_belief = belief_trace;
  const auto source = make_source(cfg.eval.policy, parse_policy_files(files, {cfg.eval.policy}), cfg);
  const EvalResult result = evaluate(cfg.eval, source, cfg.env, cfg.scenario, cfg.belief);
  const fs::path dir = out_dir(c);
  write_metrics_csv({result.metrics}, (dir / "metrics.csv").string());
  write_summary_json({result.metrics}, cfg.eval, (dir / "summary.json").string());
  if (cfg.eval.record_traces) write_traces(result, dir, policy);
  print_metrics({result.metrics});
  return 0;
}

int run_compare(const Common& c, const std::vector<std::string>& policies, const std::vector<std::string>& files) {
  RunConfig cfg = resolve(c);
  std::vector<PolicyKind> kinds;
  for (const auto& p : policies) kinds.push_back(parse_policy(p));
  if (kinds.empty()) kinds = all_policies();
  const auto file_map = parse_policy_files(files, kinds);
  std::vector<PolicySource> sources;
  for (PolicyKind k : kinds) {
    if (is_rl(k) && !file_map.contains(k)) {
      std::cerr << "skipping " << policy_name(k) << " (no --policy-file)\n";
      continue;
    }
    sources.push_back(make_source(k, file_map, cfg));
  }
  const auto rows = compare(sources, cfg.eval, cfg.env, cfg.scenario, cfg.belief);
  const fs::path dir = out_dir(c);
  write_metrics_csv(rows, (dir / "metrics.csv").string());
  write_metrics_long_csv(rows, (dir / "metrics_long.csv").string());
  write_summary_json(rows, cfg.eval, (dir / "summary.json").string());
  print_metrics(rows);
  return 0;
}

int run_rollout(const Common& c, const std::string& policy, const std::vector<std::string>& files, int index) {
  RunConfig cfg = resolve(c);
  cfg.eval.policy = parse_policy(policy);
  const auto source = make_source(cfg.eval.policy, parse_policy_files(files, {cfg.eval.policy}), cfg);
  Rng rng = scenario_rng(cfg.eval.seed, static_cast<std::uint64_t>(index));
  const SceneState initial = sample_initial_scene(cfg.scenario, cfg.env, rng);
  const auto agent = source.make_agent(cfg.env, cfg.belief);
  const std::uint64_t episode_seed = episode_rng(cfg.eval.seed, static_cast<std::uint64_t>(index))();
  const EpisodeRecord rec = run_episode(*agent, initial, cfg.env, episode_seed, {true, true});
  const fs::path dir = out_dir(c) / "traces";
  fs::create_directories(dir);
  const fs::path path = dir / (policy + "_rollout_" + std::to_string(index) + ".jsonl");
  write_trace_jsonl(rec, path.string());
  std::cout << status_name(rec.status) << " after " << rec.steps << " steps, return " << rec.discounted_return
            << "\nwrote " << path.string() << '\n';
  return 0;
}

int run_gen_scenarios(const Common& c, std::size_t count) {
  RunConfig cfg = resolve(c);
  const auto scenes = generate_scenarios(cfg.scenario, cfg.env, cfg.eval.seed, count);
  const fs::path path = out_dir(c) / ("scenarios_" + std::string(regime_name(cfg.eval.regime)) + ".json");
  save_scenarios(scenes, cfg.scenario, cfg.eval.seed, path.string());
  std::cout << "wrote " << scenes.size() << " scenarios to " << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Merging under uncertain driver cooperation: training, planning and evaluation"};
  app.require_subcommand(1);
  Common common;

  auto* train = app.add_subcommand("train", "Train a DQN policy");
  add_common(train, common);
  std::string mode = "belief";
  std::optional<long> steps;
  std::optional<std::uint64_t> train_seed;
  train->add_option("--mode", mode, "Observation mode (base|fullobs|belief)");
  train->add_option("--steps", steps, "Total environment steps");
  train->add_option("--train-seed", train_seed, "Training seed");

  std::string policy = "rl-belief";
  std::vector<std::string> policy_files;
  bool trace = false, belief_trace = false;
  auto* eval = app.add_subcommand("evaluate", "Evaluate one policy");
  add_common(eval, common);
  eval->add_option("--policy", policy, "Policy name");
  eval->add_option("--policy-file", policy_files, "Trained weights, optionally kind=path");
  eval->add_flag("--trace", trace, "Write per-episode traces");
  eval->add_flag("--belief-trace", belief_trace, "Include belief entries in traces");

  std::vector<std::string> policies;
  auto* cmp = app.add_subcommand("compare", "Evaluate several policies on the same scenarios");
  add_common(cmp, common);
  cmp->add_option("--policy", policies, "Policy names (default: all)");
  cmp->add_option("--policy-files", policy_files, "Trained weights as kind=path");

  int index = 0;
  auto* roll = app.add_subcommand("rollout", "Run and trace a single episode");
  add_common(roll, common);
  roll->add_option("--policy", policy, "Policy name");
  roll->add_option("--policy-file", policy_files, "Trained weights");
  roll->add_option("--index", index, "Scenario index within the seeded set");

  std::size_t count = 1000;
  auto* gen = app.add_subcommand("gen-scenarios", "Write a seeded scenario set as JSON");
  add_common(gen, common);
  gen->add_option("--count", count, "Number of scenarios");

  std::string config_out;
  auto* dump = app.add_subcommand("dump-config", "Write the built-in defaults as INI");
  dump->add_option("path", config_out, "Destination file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return run_train(common, mode, steps, train_seed);
    if (*eval) return run_evaluate(common, policy, policy_files, trace, belief_trace);
    if (*cmp) return run_compare(common, policies, policy_files);
    if (*roll) return run_rollout(common, policy, policy_files, index);
    if (*gen) return run_gen_scenarios(common, count);
    if (*dump) {
      save_run_config(RunConfig{}, config_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
