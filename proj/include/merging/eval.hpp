#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "merging/belief.hpp"
#include "merging/episode.hpp"
#include "merging/mcts.hpp"
#include "merging/rl/policy.hpp"
#include "merging/scenario.hpp"

namespace merging {

enum class PolicyKind { RlBase, RlFullObs, RlBelief, MctsFullObs, MctsC0, MctsC05, MctsC1 };

std::string_view policy_name(PolicyKind p);
PolicyKind parse_policy(std::string_view name);
bool is_rl(PolicyKind p);
ObservationMode policy_mode(PolicyKind p);  // RL kinds only
mcts::CooperationAssumption policy_assumption(PolicyKind p);  // MCTS kinds only
const std::vector<PolicyKind>& all_policies();

/// Builds agents for one policy; shareable across worker threads.
class PolicySource {
 public:
  static PolicySource rl(PolicyKind kind, rl::QPolicy policy);
  static PolicySource rl_from_file(PolicyKind kind, const std::string& path);
  static PolicySource mcts(PolicyKind kind, const mcts::DpwParams& params,
                           const mcts::RolloutConfig& rollout = {});

  PolicyKind kind() const { return kind_; }
  std::unique_ptr<Agent> make_agent(const EnvConfig& env, const BeliefConfig& belief) const;

 private:
  PolicyKind kind_ = PolicyKind::RlBase;
  std::shared_ptr<const rl::QPolicy> policy_;
  mcts::DpwParams dpw_{};
  mcts::RolloutConfig rollout_{};
};

struct EvalConfig {
  PolicyKind policy = PolicyKind::RlBelief;
  Regime regime = Regime::Dense;
  int episodes = 1000;
  std::uint64_t seed = 7;
  int threads = 1;
  bool record_traces = false;
  bool record_belief = false;
};

struct BinomialInterval {
  double lower = 0.0;  // percent
  double upper = 0.0;
  double half_width() const { return 0.5 * (upper - lower); }
};

/// 95 % Wilson score interval, in percent.
BinomialInterval wilson_interval(int successes, int trials, double z = 1.959963984540054);

struct Metrics {
  std::string policy;
  int episodes = 0;
  int collisions = 0;
  int timeouts = 0;
  int successes = 0;
  double collision_rate = 0.0;  // percent
  double timeout_rate = 0.0;
  double goal_rate = 0.0;
  double mean_steps_to_goal = 0.0;  // successful episodes only
  double steps_ci_half_width = 0.0;
  BinomialInterval collision_ci;
  BinomialInterval timeout_ci;
  BinomialInterval goal_ci;

  double steps_lower() const { return mean_steps_to_goal - steps_ci_half_width; }
  double steps_upper() const { return mean_steps_to_goal + steps_ci_half_width; }
};

Metrics aggregate_metrics(const std::string& policy, const std::vector<EpisodeRecord>& episodes);

struct EvalResult {
  Metrics metrics;
  std::vector<EpisodeRecord> episodes;  // index order
};

/// Runs cfg.episodes scenarios derived from cfg.seed. Per-episode random
/// streams depend only on (seed, index), so any thread count gives the same
/// result and every policy sees the same scenarios.
EvalResult evaluate(const EvalConfig& cfg, const PolicySource& source, const EnvConfig& env,
                    const ScenarioConfig& scenario, const BeliefConfig& belief);

std::vector<Metrics> compare(const std::vector<PolicySource>& sources, EvalConfig cfg,
                             const EnvConfig& env, const ScenarioConfig& scenario,
                             const BeliefConfig& belief);

void write_metrics_csv(const std::vector<Metrics>& rows, const std::string& path);
void write_metrics_long_csv(const std::vector<Metrics>& rows, const std::string& path);
void write_summary_json(const std::vector<Metrics>& rows, const EvalConfig& cfg,
                        const std::string& path);

}  // namespace merging
