#include "merging/rl/dqn.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "merging/rl/agent.hpp"

namespace merging::rl {

void TrainConfig::validate() const {
  if (total_steps <= 0 || gamma <= 0.0 || gamma > 1.0 || learning_rate <= 0.0 ||
      buffer_capacity <= 0 || target_update_period <= 0 || batch_size <= 0 || train_freq <= 0 ||
      learning_starts < 0 || eval_every <= 0 || eval_episodes < 0) {
    throw std::invalid_argument("TrainConfig: parameters must be positive");
  }
  if (!(exploration_fraction > 0.0 && exploration_fraction <= 1.0)) {
    throw std::invalid_argument("TrainConfig: exploration fraction must lie in (0, 1]");
  }
  if (curriculum.empty()) throw std::invalid_argument("TrainConfig: empty curriculum");
  for (const auto& stage : curriculum) {
    if (stage.fraction <= 0.0) throw std::invalid_argument("TrainConfig: stage fraction must be > 0");
  }
}

double epsilon(long step, const TrainConfig& cfg) {
  const double horizon = cfg.exploration_fraction * static_cast<double>(cfg.total_steps);
  if (static_cast<double>(step) >= horizon) return cfg.eps_final;
  const double frac = static_cast<double>(step) / horizon;
  return cfg.eps_start + frac * (cfg.eps_final - cfg.eps_start);
}

namespace {

struct EvalRates {
  double goal = 0.0;
  double collision = 0.0;
  double timeout = 0.0;
};

EvalRates checkpoint_eval(const QPolicy& policy, const EnvConfig& env, ScenarioConfig scenario,
                          const BeliefConfig& belief_cfg, int episodes, std::uint64_t seed) {
  EvalRates rates;
  if (episodes <= 0) return rates;
  QAgent agent(policy, env, belief_cfg);
  for (int i = 0; i < episodes; ++i) {
    Rng rng = scenario_rng(seed, static_cast<std::uint64_t>(i));
    const SceneState initial = sample_initial_scene(scenario, env, rng);
    const EpisodeRecord rec = run_episode(agent, initial, env, static_cast<std::uint64_t>(i));
    if (rec.status == Status::GoalReached) rates.goal += 1.0;
    if (rec.status == Status::Collision) rates.collision += 1.0;
    if (rec.status == Status::TimeOut) rates.timeout += 1.0;
  }
  rates.goal /= episodes;
  rates.collision /= episodes;
  rates.timeout /= episodes;
  return rates;
}

TransitionBatch<double> gather(const PrioritizedReplay& buffer, const ReplaySample& sample) {
  const auto n = static_cast<Eigen::Index>(sample.indices.size());
  TransitionBatch<double> batch;
  batch.obs.resize(buffer.obs_width(), n);
  batch.next_obs.resize(buffer.obs_width(), n);
  batch.actions.resize(sample.indices.size());
  batch.rewards.resize(n);
  batch.terminal.resize(sample.indices.size());
  batch.weights = sample.weights;
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::size_t idx = sample.indices[static_cast<std::size_t>(k)];
    batch.obs.col(k) = buffer.observations().col(static_cast<Eigen::Index>(idx));
    batch.next_obs.col(k) = buffer.next_observations().col(static_cast<Eigen::Index>(idx));
    batch.actions[static_cast<std::size_t>(k)] = buffer.action(idx);
    batch.rewards(k) = buffer.reward(idx);
    batch.terminal[static_cast<std::size_t>(k)] = buffer.terminal(idx) ? 1 : 0;
  }
  return batch;
}

}  // namespace

TrainResult train_dqn(const TrainConfig& cfg, const EnvConfig& env, const ScenarioConfig& scenario,
                      const BeliefConfig& belief_cfg,
                      const std::function<void(const TrainLogRow&)>& on_checkpoint) {
  cfg.validate();
  Rng rng(cfg.seed);
  TrainResult result;
  result.policy = QPolicy::create(cfg.mode, cfg.hidden, env.scaling);
  result.policy.net.initialize(rng);
  Mlp<double> target = result.policy.net;
  Adam<double> adam({cfg.learning_rate, 0.9, 0.999, 1e-8});
  PrioritizedReplay buffer(static_cast<std::size_t>(cfg.buffer_capacity), observation_width(cfg.mode),
                           cfg.priority_alpha, cfg.priority_beta, cfg.priority_eps);

  // The agent reads result.policy by reference, so it always acts with the latest weights.
  QAgent agent(result.policy, env, belief_cfg);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> random_action(0, kNumActions - 1);

  double stage_weight = 0.0;
  for (const auto& stage : cfg.curriculum) stage_weight += stage.fraction;

  long step = 0;
  double loss_accum = 0.0;
  long loss_count = 0;
  double last_loss = 0.0;
  const std::uint64_t eval_seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;
  Mlp<double> best_net = result.policy.net;
  double best_score = -std::numeric_limits<double>::infinity();

  const auto checkpoint = [&](int stage_index, Regime regime) {
    ScenarioConfig eval_scenario = scenario;
    eval_scenario.regime = regime;
    const EvalRates rates = checkpoint_eval(result.policy, env, eval_scenario, belief_cfg,
                                            cfg.eval_episodes, eval_seed);
    TrainLogRow row;
    row.step = step;
    row.episode = result.episodes;
    row.stage = stage_index;
    row.regime = regime;
    row.epsilon = epsilon(std::min(step, cfg.total_steps), cfg);
    row.loss = loss_count > 0 ? loss_accum / static_cast<double>(loss_count) : last_loss;
    row.eval_goal_rate = rates.goal;
    row.eval_collision_rate = rates.collision;
    row.eval_timeout_rate = rates.timeout;
    loss_accum = 0.0;
    loss_count = 0;
    result.log.push_back(row);
    // Earlier curriculum stages are scored on a different regime, so only
    // final-stage checkpoints compete.
    const bool final_stage = stage_index + 1 == static_cast<int>(cfg.curriculum.size());
    const double score = rates.goal - rates.collision;
    if (final_stage && score > best_score) {
      best_score = score;
      best_net = result.policy.net;
      result.selected_step = step;
    }
    if (on_checkpoint) on_checkpoint(row);
  };

  long stage_end = 0;
  double consumed = 0.0;
  for (std::size_t si = 0; si < cfg.curriculum.size(); ++si) {
    const auto& stage = cfg.curriculum[si];
    consumed += stage.fraction;
    stage_end = si + 1 == cfg.curriculum.size()
                    ? cfg.total_steps
                    : std::lround(static_cast<double>(cfg.total_steps) * consumed / stage_weight);
    ScenarioConfig stage_scenario = scenario;
    stage_scenario.regime = stage.regime;

    while (step < stage_end) {
      SceneState scene = sample_initial_scene(stage_scenario, env, rng);
      agent.reset(scene, 0);
      Observation obs = agent.observe_scene(scene);
      Status status = Status::Running;
      while (status == Status::Running && step < stage_end) {
        const Eigen::VectorXd norm_obs = result.policy.normalize(obs);
        int action = 0;
        if (unit(rng) < epsilon(step, cfg)) {
          action = random_action(rng);
        } else {
          action = argmax_action(result.policy.net.forward(norm_obs));
        }
        SceneState next = scene;
        status = step_scene(next, action_from_index(action), env);
        const double r = reward(scene, next, status);
        agent.observe(scene, next);
        const Observation next_obs = agent.observe_scene(next);
        buffer.add(norm_obs, action, r, result.policy.normalize(next_obs), status != Status::Running);
        scene = std::move(next);
        obs = next_obs;
        ++step;

        if (step > cfg.learning_starts && step % cfg.train_freq == 0 &&
            buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
          const ReplaySample sample = buffer.sample(static_cast<std::size_t>(cfg.batch_size), rng);
          const TransitionBatch<double> batch = gather(buffer, sample);
          const TdResult<double> td = td_loss_grad(result.policy.net, target, batch, cfg.gamma);
          if (!std::isfinite(td.loss)) {
            throw std::runtime_error("train_dqn: non-finite loss at step " + std::to_string(step));
          }
          adam.step(result.policy.net, td.grads);
          buffer.update_priorities(sample.indices,
                                   td.td_errors.cwiseAbs().array() + cfg.priority_eps);
          last_loss = td.loss;
          loss_accum += td.loss;
          ++loss_count;
          ++result.gradient_updates;
        }
        if (cfg.target_update_unit == TargetUpdateUnit::Steps &&
            step % cfg.target_update_period == 0) {
          target = result.policy.net;
          ++result.target_updates;
        }
        if (step % cfg.eval_every == 0) checkpoint(static_cast<int>(si), stage.regime);
      }
      if (status != Status::Running) {
        ++result.episodes;
        if (cfg.target_update_unit == TargetUpdateUnit::Episodes &&
            result.episodes % cfg.target_update_period == 0) {
          target = result.policy.net;
          ++result.target_updates;
        }
      }
    }
  }
  if (result.log.empty() || result.log.back().step != step) {
    checkpoint(static_cast<int>(cfg.curriculum.size()) - 1, cfg.curriculum.back().regime);
  }
  if (cfg.keep_best) {
    result.policy.net = best_net;
  } else {
    result.selected_step = step;
  }
  if (!result.policy.net.all_finite()) throw std::runtime_error("train_dqn: weights diverged");
  return result;
}

void write_train_log_csv(const std::vector<TrainLogRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open training log: " + path);
  out << "step,episode,stage,regime,epsilon,loss,eval_goal_rate,eval_collision_rate,eval_timeout_rate\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.step << ',' << r.episode << ',' << r.stage << ',' << regime_name(r.regime) << ','
        << r.epsilon << ',' << r.loss << ',' << r.eval_goal_rate << ',' << r.eval_collision_rate
        << ',' << r.eval_timeout_rate << '\n';
  }
}

}  // namespace merging::rl
