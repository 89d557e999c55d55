#include "merging/eval.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "merging/rl/agent.hpp"

namespace merging {

namespace {

struct PolicyInfo {
  PolicyKind kind;
  std::string_view name;
};

constexpr std::array<PolicyInfo, 7> kPolicies{{
    {PolicyKind::RlBase, "rl-base"},
    {PolicyKind::RlFullObs, "rl-fullobs"},
    {PolicyKind::RlBelief, "rl-belief"},
    {PolicyKind::MctsFullObs, "mcts-fullobs"},
    {PolicyKind::MctsC0, "mcts-c0"},
    {PolicyKind::MctsC05, "mcts-c05"},
    {PolicyKind::MctsC1, "mcts-c1"},
}};

}  // namespace

std::string_view policy_name(PolicyKind p) {
  for (const auto& info : kPolicies) {
    if (info.kind == p) return info.name;
  }
  return "unknown";
}

PolicyKind parse_policy(std::string_view name) {
  for (const auto& info : kPolicies) {
    if (info.name == name) return info.kind;
  }
  throw std::invalid_argument("unknown policy: " + std::string(name));
}

const std::vector<PolicyKind>& all_policies() {
  static const std::vector<PolicyKind> all = [] {
    std::vector<PolicyKind> v;
    for (const auto& info : kPolicies) v.push_back(info.kind);
    return v;
  }();
  return all;
}

bool is_rl(PolicyKind p) {
  return p == PolicyKind::RlBase || p == PolicyKind::RlFullObs || p == PolicyKind::RlBelief;
}

ObservationMode policy_mode(PolicyKind p) {
  switch (p) {
    case PolicyKind::RlBase: return ObservationMode::Base;
    case PolicyKind::RlFullObs: return ObservationMode::FullObs;
    case PolicyKind::RlBelief: return ObservationMode::Belief;
    default: throw std::invalid_argument("policy_mode: not an RL policy");
  }
}

mcts::CooperationAssumption policy_assumption(PolicyKind p) {
  switch (p) {
    case PolicyKind::MctsFullObs: return mcts::CooperationAssumption::full();
    case PolicyKind::MctsC0: return mcts::CooperationAssumption::assume(0.0);
    case PolicyKind::MctsC05: return mcts::CooperationAssumption::assume(0.5);
    case PolicyKind::MctsC1: return mcts::CooperationAssumption::assume(1.0);
    default: throw std::invalid_argument("policy_assumption: not an MCTS policy");
  }
}

PolicySource PolicySource::rl(PolicyKind kind, rl::QPolicy policy) {
  if (!is_rl(kind)) throw std::invalid_argument("PolicySource::rl: not an RL policy");
  if (policy.mode != policy_mode(kind)) {
    throw std::invalid_argument("PolicySource::rl: policy mode does not match " +
                                std::string(policy_name(kind)));
  }
  PolicySource s;
  s.kind_ = kind;
  s.policy_ = std::make_shared<const rl::QPolicy>(std::move(policy));
  return s;
}

PolicySource PolicySource::rl_from_file(PolicyKind kind, const std::string& path) {
  return rl(kind, rl::load_policy(path, policy_mode(kind)));
}

PolicySource PolicySource::mcts(PolicyKind kind, const mcts::DpwParams& params,
                                const mcts::RolloutConfig& rollout) {
  if (is_rl(kind)) throw std::invalid_argument("PolicySource::mcts: not an MCTS policy");
  PolicySource s;
  s.kind_ = kind;
  s.dpw_ = params;
  s.rollout_ = rollout;
  return s;
}

std::unique_ptr<Agent> PolicySource::make_agent(const EnvConfig& env, const BeliefConfig& belief) const {
  if (is_rl(kind_)) return std::make_unique<rl::QAgent>(*policy_, env, belief);
  return std::make_unique<mcts::MctsAgent>(mcts::MctsParams{dpw_, policy_assumption(kind_), rollout_}, env);
}

BinomialInterval wilson_interval(int successes, int trials, double z) {
  if (trials <= 0) return {};
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {100.0 * std::max(0.0, center - half), 100.0 * std::min(1.0, center + half)};
}

Metrics aggregate_metrics(const std::string& policy, const std::vector<EpisodeRecord>& episodes) {
  Metrics m;
  m.policy = policy;
  m.episodes = static_cast<int>(episodes.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& e : episodes) {
    switch (e.status) {
      case Status::Collision: ++m.collisions; break;
      case Status::TimeOut: ++m.timeouts; break;
      case Status::GoalReached:
        ++m.successes;
        sum += e.steps;
        sum_sq += static_cast<double>(e.steps) * e.steps;
        break;
      case Status::Running: throw std::logic_error("aggregate_metrics: unfinished episode");
    }
  }
  if (m.episodes > 0) {
    m.collision_rate = 100.0 * m.collisions / m.episodes;
    m.timeout_rate = 100.0 * m.timeouts / m.episodes;
    m.goal_rate = 100.0 * m.successes / m.episodes;
  }
  if (m.successes > 0) {
    const double n = m.successes;
    m.mean_steps_to_goal = sum / n;
    if (m.successes > 1) {
      const double var = std::max(0.0, (sum_sq - n * m.mean_steps_to_goal * m.mean_steps_to_goal) / (n - 1.0));
      m.steps_ci_half_width = 1.959963984540054 * std::sqrt(var / n);
    }
  }
  m.collision_ci = wilson_interval(m.collisions, m.episodes);
  m.timeout_ci = wilson_interval(m.timeouts, m.episodes);
  m.goal_ci = wilson_interval(m.successes, m.episodes);
  return m;
}

EvalResult evaluate(const EvalConfig& cfg, const PolicySource& source, const EnvConfig& env,
                    const ScenarioConfig& scenario_base, const BeliefConfig& belief) {
  if (cfg.episodes <= 0) throw std::invalid_argument("evaluate: episode count must be > 0");
  ScenarioConfig scenario = scenario_base;
  scenario.regime = cfg.regime;
  const EpisodeOptions options{cfg.record_traces, cfg.record_belief};

  EvalResult result;
  result.episodes.resize(static_cast<std::size_t>(cfg.episodes));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    const auto agent = source.make_agent(env, belief);
    for (int i = next++; i < cfg.episodes; i = next++) {
      try {
        const auto index = static_cast<std::uint64_t>(i);
        Rng rng = scenario_rng(cfg.seed, index);
        const SceneState initial = sample_initial_scene(scenario, env, rng);
        const std::uint64_t episode_seed = episode_rng(cfg.seed, index)();
        result.episodes[static_cast<std::size_t>(i)] =
            run_episode(*agent, initial, env, episode_seed, options);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::make_exception_ptr(
              std::runtime_error("episode " + std::to_string(i) + ": " + e.what()));
        }
        next = cfg.episodes;
      }
    }
  };

  const int threads = std::max(1, std::min(cfg.threads, cfg.episodes));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  result.metrics = aggregate_metrics(std::string(policy_name(source.kind())), result.episodes);
  return result;
}

std::vector<Metrics> compare(const std::vector<PolicySource>& sources, EvalConfig cfg,
                             const EnvConfig& env, const ScenarioConfig& scenario,
                             const BeliefConfig& belief) {
  std::vector<Metrics> rows;
  for (const auto& source : sources) {
    cfg.policy = source.kind();
    rows.push_back(evaluate(cfg, source, env, scenario, belief).metrics);
  }
  return rows;
}

namespace {

std::string fixed(double x, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_metrics_csv(const std::vector<Metrics>& rows, const std::string& path) {
  auto out = open_out(path);
  out << "policy,episodes,collision_pct,collision_ci_half,timeout_pct,timeout_ci_half,goal_pct,"
         "goal_ci_half,mean_steps_to_goal,mean_steps_ci_half\n";
  for (const auto& m : rows) {
    out << m.policy << ',' << m.episodes << ',' << fixed(m.collision_rate) << ','
        << fixed(m.collision_ci.half_width()) << ',' << fixed(m.timeout_rate) << ','
        << fixed(m.timeout_ci.half_width()) << ',' << fixed(m.goal_rate) << ','
        << fixed(m.goal_ci.half_width()) << ',' << fixed(m.mean_steps_to_goal) << ','
        << fixed(m.steps_ci_half_width) << '\n';
  }
}

void write_metrics_long_csv(const std::vector<Metrics>& rows, const std::string& path) {
  auto out = open_out(path);
  out << "policy,metric,value,ci_lower,ci_upper\n";
  for (const auto& m : rows) {
    out << m.policy << ",collision_pct," << fixed(m.collision_rate) << ','
        << fixed(m.collision_ci.lower) << ',' << fixed(m.collision_ci.upper) << '\n';
    out << m.policy << ",timeout_pct," << fixed(m.timeout_rate) << ',' << fixed(m.timeout_ci.lower)
        << ',' << fixed(m.timeout_ci.upper) << '\n';
    out << m.policy << ",mean_steps_to_goal," << fixed(m.mean_steps_to_goal) << ','
        << fixed(m.steps_lower()) << ',' << fixed(m.steps_upper()) << '\n';
  }
}

void write_summary_json(const std::vector<Metrics>& rows, const EvalConfig& cfg,
                        const std::string& path) {
  nlohmann::json doc;
  doc["schema"] = "merging.summary/1";
  doc["regime"] = std::string(regime_name(cfg.regime));
  doc["episodes"] = cfg.episodes;
  doc["seed"] = cfg.seed;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& m : rows) {
    list.push_back({{"policy", m.policy},
                    {"episodes", m.episodes},
                    {"collisions", m.collisions},
                    {"timeouts", m.timeouts},
                    {"successes", m.successes},
                    {"collision_pct", m.collision_rate},
                    {"collision_ci", {m.collision_ci.lower, m.collision_ci.upper}},
                    {"timeout_pct", m.timeout_rate},
                    {"timeout_ci", {m.timeout_ci.lower, m.timeout_ci.upper}},
                    {"goal_pct", m.goal_rate},
                    {"mean_steps_to_goal", m.mean_steps_to_goal},
                    {"mean_steps_ci_half", m.steps_ci_half_width}});
  }
  doc["policies"] = std::move(list);
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace merging
