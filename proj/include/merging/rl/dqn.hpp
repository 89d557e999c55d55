#pragma once

#include <functional>
#include <string>
#include <vector>

#include "merging/belief.hpp"
#include "merging/episode.hpp"
#include "merging/rl/mlp.hpp"
#include "merging/rl/policy.hpp"
#include "merging/rl/replay.hpp"
#include "merging/scenario.hpp"

namespace merging::rl {

template <typename Scalar>
struct TransitionBatch {
  MatrixX<Scalar> obs;       // width x batch, already normalized
  MatrixX<Scalar> next_obs;
  std::vector<int> actions;
  VectorX<Scalar> rewards;
  std::vector<char> terminal;
  VectorX<Scalar> weights;   // importance weights

  Eigen::Index size() const { return obs.cols(); }
};

template <typename Scalar>
struct TdResult {
  Scalar loss{};
  MlpGradients<Scalar> grads;
  VectorX<Scalar> td_errors;  // target - prediction
  VectorX<Scalar> targets;
};

/// Importance-weighted squared TD error against a frozen target network,
/// with its gradient with respect to the online network.
template <typename Scalar>
TdResult<Scalar> td_loss_grad(const Mlp<Scalar>& online, const Mlp<Scalar>& target,
                              const TransitionBatch<Scalar>& batch, Scalar gamma) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::invalid_argument("td_loss_grad: empty batch");
  ForwardCache<Scalar> cache;
  const MatrixX<Scalar> q = online.forward(batch.obs, cache);
  const MatrixX<Scalar> q_next = target.forward(batch.next_obs);

  TdResult<Scalar> out;
  out.targets.resize(n);
  out.td_errors.resize(n);
  MatrixX<Scalar> grad_q = MatrixX<Scalar>::Zero(q.rows(), n);
  Scalar loss(0);
  const Scalar inv_n = Scalar(1) / Scalar(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar bootstrap = batch.terminal[static_cast<std::size_t>(i)]
                                 ? Scalar(0)
                                 : gamma * q_next.col(i).maxCoeff();
    const Scalar y = batch.rewards(i) + bootstrap;
    const int a = batch.actions[static_cast<std::size_t>(i)];
    const Scalar delta = y - q(a, i);
    const Scalar w = batch.weights.size() == n ? batch.weights(i) : Scalar(1);
    out.targets(i) = y;
    out.td_errors(i) = delta;
    loss += w * delta * delta * inv_n;
    grad_q(a, i) = Scalar(-2) * w * delta * inv_n;
  }
  out.loss = loss;
  out.grads = online.backward(cache, grad_q);
  return out;
}

enum class TargetUpdateUnit { Episodes, Steps };

struct CurriculumStage {
  Regime regime = Regime::Mixed;
  double fraction = 1.0;  // share of total_steps
};

struct TrainConfig {
  long total_steps = 3'000'000;
  double gamma = 0.95;
  double learning_rate = 1e-4;
  std::vector<int> hidden{64, 32};
  long buffer_capacity = 400'000;
  double priority_alpha = 0.7;
  double priority_beta = 1e-3;
  double priority_eps = 1e-6;
  long target_update_period = 5000;
  TargetUpdateUnit target_update_unit = TargetUpdateUnit::Episodes;
  double exploration_fraction = 0.5;
  double eps_start = 1.0;
  double eps_final = 0.01;
  int batch_size = 32;
  int train_freq = 4;
  long learning_starts = 1000;
  std::vector<CurriculumStage> curriculum{{Regime::Mixed, 0.5}, {Regime::Dense, 0.5}};
  ObservationMode mode = ObservationMode::Base;
  long eval_every = 50'000;
  int eval_episodes = 50;
  // Return the final-stage checkpoint with the best validation score (goal
  // rate minus collision rate) instead of the final weights.
  bool keep_best = false;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Linear decay from eps_start to eps_final over exploration_fraction of the
/// run, constant afterwards.
double epsilon(long step, const TrainConfig& cfg);

struct TrainLogRow {
  long step = 0;
  long episode = 0;
  int stage = 0;
  Regime regime = Regime::Mixed;
  double epsilon = 0.0;
  double loss = 0.0;
  double eval_goal_rate = 0.0;
  double eval_collision_rate = 0.0;
  double eval_timeout_rate = 0.0;
};

struct TrainResult {
  QPolicy policy;
  std::vector<TrainLogRow> log;
  long episodes = 0;
  long gradient_updates = 0;
  long target_updates = 0;
  long selected_step = 0;  // step of the returned weights
};

/// Deep Q-learning with prioritized replay and a staged traffic curriculum.
/// `on_checkpoint` (optional) sees each log row as it is produced.
TrainResult train_dqn(const TrainConfig& cfg, const EnvConfig& env, const ScenarioConfig& scenario,
                      const BeliefConfig& belief_cfg,
                      const std::function<void(const TrainLogRow&)>& on_checkpoint = {});

void write_train_log_csv(const std::vector<TrainLogRow>& rows, const std::string& path);

}  // namespace merging::rl
