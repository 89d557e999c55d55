#pragma once

#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "merging/episode.hpp"
#include "merging/env.hpp"
#include "merging/scenario.hpp"

namespace merging::mcts {

template <typename State>
struct Transition {
  State next;
  double reward = 0.0;
  bool terminal = false;
};

/// Generative model searched by DpwPlanner.
template <typename M>
concept GenerativeModel = requires(const M& m, const typename M::State& s, int a, Rng& rng, int depth) {
  { m.num_actions() } -> std::convertible_to<int>;
  { m.discount() } -> std::convertible_to<double>;
  { m.is_terminal(s) } -> std::convertible_to<bool>;
  { m.step(s, a, rng) } -> std::same_as<Transition<typename M::State>>;
  { m.rollout(s, depth, rng) } -> std::convertible_to<double>;
  { m.same_state(s, s) } -> std::convertible_to<bool>;
};

struct DpwParams {
  int iterations = 10'000;
  int max_depth = 60;
  double exploration = 1.0;
  double k_action = 7.0;
  double alpha_action = 0.0;
  double k_state = 1.0;
  double alpha_state = 0.1;
  double time_limit_s = 0.0;  // 0 disables the wall-clock cap
};

/// Progressive-widening bound ceil(k * n^alpha).
inline std::size_t widening_limit(double k, double alpha, int visits) {
  return static_cast<std::size_t>(std::ceil(k * std::pow(static_cast<double>(visits), alpha)));
}

template <typename State>
struct StateNode {
  State state;
  bool terminal = false;
  int visits = 0;
  std::vector<int> actions;  // indices into the action-node arena
};

struct ActionNode {
  int action = 0;
  int visits = 0;
  double q = 0.0;
  std::vector<int> children;      // indices into the state-node arena
  std::vector<double> rewards;    // reward on the edge to each child
  std::vector<int> child_draws;   // times the model generated each child
};

struct SearchResult {
  int action = 0;
  std::vector<int> root_visits;   // per action index, 0 if never admitted
  std::vector<double> root_q;     // per action index, NaN if never admitted
  int iterations = 0;
  std::size_t state_nodes = 0;
  std::size_t action_nodes = 0;

  double best_q() const { return root_q[static_cast<std::size_t>(action)]; }
};

/// Monte Carlo tree search with double progressive widening. Admits actions
/// while |A(s)| < ceil(k_a N(s)^a_a) and successor states while
/// |C(s,a)| < ceil(k_s N(s,a)^a_s); a sampled successor equal to an existing
/// child is merged into it. Leaves are valued by the model's rollout.
template <GenerativeModel Model>
class DpwPlanner {
 public:
  using State = typename Model::State;

  DpwPlanner(const Model& model, DpwParams params) : model_(model), params_(params) {}

  SearchResult search(const State& root, Rng& rng) {
    states_.clear();
    actions_.clear();
    states_.push_back({root, model_.is_terminal(root), 0, {}});
    const auto start = std::chrono::steady_clock::now();
    int done = 0;
    for (; done < params_.iterations; ++done) {
      if (params_.time_limit_s > 0.0 && done > 0 && done % 32 == 0) {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        if (elapsed.count() >= params_.time_limit_s) break;
      }
      simulate(0, params_.max_depth, rng);
    }

    SearchResult out;
    out.iterations = done;
    const int n = model_.num_actions();
    out.root_visits.assign(static_cast<std::size_t>(n), 0);
    out.root_q.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
    int best = -1;
    for (const int ai : states_[0].actions) {
      const ActionNode& an = actions_[static_cast<std::size_t>(ai)];
      out.root_visits[static_cast<std::size_t>(an.action)] = an.visits;
      out.root_q[static_cast<std::size_t>(an.action)] = an.q;
    }
    for (int a = 0; a < n; ++a) {
      const auto idx = static_cast<std::size_t>(a);
      if (std::isnan(out.root_q[idx])) continue;
      if (best < 0 || out.root_visits[idx] > out.root_visits[static_cast<std::size_t>(best)]) best = a;
    }
    out.action = best < 0 ? 0 : best;
    if (std::isnan(out.root_q[static_cast<std::size_t>(out.action)])) out.root_q[static_cast<std::size_t>(out.action)] = 0.0;
    out.state_nodes = states_.size();
    out.action_nodes = actions_.size();
    return out;
  }

  /// Number of nodes breaking either widening bound in the last tree.
  std::size_t widening_violations() const {
    std::size_t bad = 0;
    for (const auto& s : states_) {
      if (s.actions.size() > widening_limit(params_.k_action, params_.alpha_action, s.visits) &&
          !s.actions.empty()) {
        ++bad;
      }
    }
    for (const auto& a : actions_) {
      if (a.children.size() > widening_limit(params_.k_state, params_.alpha_state, a.visits)) ++bad;
    }
    return bad;
  }

  /// Largest number of distinct successors stored under any action node.
  std::size_t max_successors() const {
    std::size_t m = 0;
    for (const auto& a : actions_) m = std::max(m, a.children.size());
    return m;
  }

  const std::vector<StateNode<State>>& state_nodes() const { return states_; }
  const std::vector<ActionNode>& action_nodes() const { return actions_; }
  const DpwParams& params() const { return params_; }

 private:
  double simulate(int node_index, int depth, Rng& rng) {
    if (depth <= 0 || states_[static_cast<std::size_t>(node_index)].terminal) return 0.0;
    int visits = ++states_[static_cast<std::size_t>(node_index)].visits;

    // Action widening admits untried actions in index order.
    {
      auto& node = states_[static_cast<std::size_t>(node_index)];
      const int n_actions = model_.num_actions();
      if (static_cast<int>(node.actions.size()) < n_actions &&
          node.actions.size() < widening_limit(params_.k_action, params_.alpha_action, visits)) {
        actions_.push_back({static_cast<int>(node.actions.size()), 0, 0.0, {}, {}, {}});
        node.actions.push_back(static_cast<int>(actions_.size()) - 1);
      }
    }

    const int ai = select_action(node_index, visits);
    ActionNode* an = &actions_[static_cast<std::size_t>(ai)];
    const int action_visits = ++an->visits;

    double q = 0.0;
    if (an->children.size() < widening_limit(params_.k_state, params_.alpha_state, action_visits)) {
      Transition<State> t = model_.step(states_[static_cast<std::size_t>(node_index)].state, an->action, rng);
      int existing = -1;
      for (std::size_t c = 0; c < an->children.size(); ++c) {
        if (model_.same_state(states_[static_cast<std::size_t>(an->children[c])].state, t.next)) {
          existing = static_cast<int>(c);
          break;
        }
      }
      if (existing >= 0) {
        ++an->child_draws[static_cast<std::size_t>(existing)];
        const int child = an->children[static_cast<std::size_t>(existing)];
        const double r = an->rewards[static_cast<std::size_t>(existing)];
        q = r + model_.discount() * simulate(child, depth - 1, rng);
      } else {
        const double leaf = t.terminal ? 0.0 : model_.rollout(t.next, depth - 1, rng);
        q = t.reward + model_.discount() * leaf;
        states_.push_back({std::move(t.next), t.terminal, 0, {}});
        an = &actions_[static_cast<std::size_t>(ai)];
        an->children.push_back(static_cast<int>(states_.size()) - 1);
        an->rewards.push_back(t.reward);
        an->child_draws.push_back(1);
      }
    } else {
      // Resample from generated transitions only. Counting these picks too
      // would make the split a Polya urn rather than the model's distribution.
      const std::size_t c = pick_child(*an, rng);
      const int child = an->children[c];
      const double r = an->rewards[c];
      q = r + model_.discount() * simulate(child, depth - 1, rng);
    }
    an = &actions_[static_cast<std::size_t>(ai)];
    an->q += (q - an->q) / an->visits;
    return q;
  }

  int select_action(int node_index, int visits) const {
    const auto& node = states_[static_cast<std::size_t>(node_index)];
    const double log_n = std::log(static_cast<double>(visits));
    int best = node.actions.front();
    double best_score = -std::numeric_limits<double>::infinity();
    for (const int ai : node.actions) {
      const ActionNode& an = actions_[static_cast<std::size_t>(ai)];
      if (an.visits == 0) return ai;
      const double score = an.q + params_.exploration * std::sqrt(log_n / an.visits);
      if (score > best_score) {
        best_score = score;
        best = ai;
      }
    }
    return best;
  }

  static std::size_t pick_child(const ActionNode& an, Rng& rng) {
    if (an.children.size() == 1) return 0;
    int total = 0;
    for (const int v : an.child_draws) total += v;
    int draw = std::uniform_int_distribution<int>(0, total - 1)(rng);
    for (std::size_t c = 0; c < an.child_draws.size(); ++c) {
      draw -= an.child_draws[c];
      if (draw < 0) return c;
    }
    return an.child_draws.size() - 1;
  }

  const Model& model_;
  DpwParams params_;
  std::vector<StateNode<State>> states_;
  std::vector<ActionNode> actions_;
};

// --- Merging-scenario planner ---------------------------------------------

struct CooperationAssumption {
  bool full_observation = false;
  double value = 0.0;  // used when !full_observation

  static CooperationAssumption assume(double c) { return {false, c}; }
  static CooperationAssumption full() { return {true, 0.0}; }
};

/// Leaf estimator for the merging model. Release holds the current speed; Idm
/// drives the ego as an IDM follower of the first car at or ahead of its
/// projection, which lets leaves started from a standstill reach the goal;
/// Random draws uniformly from the action set.
enum class RolloutPolicy : std::uint8_t { Release, Idm, Random };

const char* rollout_name(RolloutPolicy p);
RolloutPolicy parse_rollout(const std::string& name);

struct RolloutConfig {
  RolloutPolicy policy = RolloutPolicy::Idm;
  double desired_speed = 6.0;
};

/// Search model: replaces every driver's cooperation per the assumption.
SceneState determinize(const SceneState& scene, const CooperationAssumption& assumption);

/// The merging environment as a generative model. Given cooperation levels
/// it is deterministic.
class MergeModel {
 public:
  using State = SceneState;

  explicit MergeModel(EnvConfig env, RolloutConfig rollout = {})
      : env_(std::move(env)), rollout_(rollout) {}

  int num_actions() const { return kNumActions; }
  double discount() const { return env_.discount; }
  bool is_terminal(const SceneState& s) const { return evaluate_status(s, env_) != Status::Running; }
  Transition<SceneState> step(const SceneState& s, int action, Rng& rng) const;
  double rollout(const SceneState& s, int depth, Rng& rng) const;
  bool same_state(const SceneState& a, const SceneState& b) const { return a == b; }
  const EnvConfig& env() const { return env_; }

 private:
  EnvConfig env_;
  RolloutConfig rollout_;
};

/// Acceleration the Idm rollout commands for the ego.
double rollout_ego_accel(const SceneState& scene, const EnvConfig& env, double desired_speed);

/// Discounted return of following `cfg` from `scene` for up to `depth` steps.
double rollout(const SceneState& scene, int depth, const EnvConfig& env, Rng& rng,
               const RolloutConfig& cfg = {RolloutPolicy::Release, 0.0});

struct MctsParams {
  DpwParams dpw{};
  CooperationAssumption assumption{};
  RolloutConfig rollout{};
};

struct PlanResult {
  EgoAction action = EgoAction::Release;
  SearchResult search;
};

PlanResult plan(const SceneState& scene, const MctsParams& params, const EnvConfig& env, Rng& rng);

/// Receding-horizon planner that replans from the true scene every step.
class MctsAgent final : public Agent {
 public:
  MctsAgent(MctsParams params, EnvConfig env) : params_(params), env_(std::move(env)) {}

  void reset(const SceneState&, std::uint64_t episode_seed) override { rng_.seed(episode_seed); }
  EgoAction act(const SceneState& scene) override;
  std::vector<std::pair<std::string, double>> decision_stats() const override { return stats_; }

 private:
  MctsParams params_;
  EnvConfig env_;
  Rng rng_;
  std::vector<std::pair<std::string, double>> stats_;
};

}  // namespace merging::mcts
