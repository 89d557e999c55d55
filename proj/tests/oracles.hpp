#pragma once

// Reference computations shared by the unit tests and the acceptance run.
// Each one is written independently of the library code it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "merging/belief.hpp"
#include "merging/driver.hpp"
#include "merging/mcts.hpp"
#include "merging/rl/dqn.hpp"
#include "merging/traffic.hpp"
#include "test_helpers.hpp"

namespace merging::oracles {

// Constant acceleration with a stop at v = 0 instead of reversing.
inline PhysicalState kinematics(const PhysicalState& p, double dt) {
  const double v1 = p.v + p.a * dt;
  if (v1 >= 0.0) return {p.s + p.v * dt + 0.5 * p.a * dt * dt, v1, p.a};
  const double t_stop = -p.v / p.a;
  return {p.s + p.v * t_stop + 0.5 * p.a * t_stop * t_stop, 0.0, p.a};
}

inline SceneState random_scene(std::mt19937_64& rng, double ego_lo, double ego_hi) {
  std::uniform_int_distribution<int> count(1, 12);
  std::uniform_real_distribution<double> pos(-100.0, 50.0), vel(0.0, 8.0), ego_pos(ego_lo, ego_hi),
      coop(0.0, 1.0);
  std::vector<VehicleState> traffic;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) traffic.push_back(testing::car(i + 1, pos(rng), vel(rng), coop(rng)));
  sort_traffic(traffic);
  return testing::scene(testing::ego(ego_pos(rng), vel(rng)), traffic);
}

// IDM against a leader found by direct search: the closest vehicle strictly
// ahead, counting the ego once it is on the main lane.
inline double plain_idm(const SceneState& s, std::size_t i, const DriverModelConfig& cfg) {
  const auto& subject = s.traffic[i];
  const VehicleState* leader = nullptr;
  for (const auto& other : s.traffic) {
    if (other.phys.s > subject.phys.s && (!leader || other.phys.s < leader->phys.s)) leader = &other;
  }
  if (s.ego.phys.s >= 0.0 && s.ego.phys.s > subject.phys.s &&
      (!leader || s.ego.phys.s < leader->phys.s)) {
    leader = &s.ego;
  }
  const DriverParams& p = *subject.driver;
  if (!leader) return idm_accel(subject.phys.v, kNoLeaderGap, 0.0, p, cfg.hard_decel);
  return idm_accel(subject.phys.v, leader->rear() - subject.phys.s, subject.phys.v - leader->phys.v,
                   p, cfg.hard_decel);
}

// Final belief on one follower whose yield gate (under c = 1) opens for at
// least five steps. The follower closes in on the ego's projection, so
// yielding means visible braking. Returns NaN if the gate opens too rarely.
inline double synthetic_final_theta(std::uint64_t seed, double true_c, const EnvConfig& env = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ego_s(-50.0, -25.0), ego_v(3.0, 5.0), rear_gap(0.5, 6.0),
      extra_v(0.0, 2.0), lead_gap(15.0, 40.0);
  const double es = ego_s(rng);
  const double ev = ego_v(rng);
  const double follower_s = es - 4.0 - rear_gap(rng);
  SceneState s = testing::scene(testing::ego(es, ev), {testing::car(1, follower_s, ev + extra_v(rng), true_c),
                                                       testing::car(2, es + lead_gap(rng), 5, 0.0)});
  CooperationBelief b;
  for (const auto& c : s.traffic) b.set(c.id, 0.5);
  int active = 0;
  while (s.ego.phys.s < 0.0) {
    if (evaluate_status(s, env) != Status::Running) break;
    const auto* subject = s.find(1);
    if (subject == nullptr) break;
    const std::size_t idx = static_cast<std::size_t>(subject - s.traffic.data());
    if (yield_gate_open(s, idx, 1.0, env.geom, env.driver)) ++active;
    const StepOutcome out = env_step(s, EgoAction::Hold, env);
    b = update_belief(b, s, out.next_scene, env);
    s = out.next_scene;
  }
  return active >= 5 ? b.theta(1) : std::nan("");
}

// Median over the first `count` valid seeds; `valid` reports how many were found.
inline double median_final_theta(double true_c, std::size_t count, std::size_t& valid) {
  std::vector<double> finals;
  for (std::uint64_t seed = 0; finals.size() < count && seed < 100 * count; ++seed) {
    const double theta = synthetic_final_theta(seed, true_c);
    if (!std::isnan(theta)) finals.push_back(theta);
  }
  valid = finals.size();
  if (finals.empty()) return std::nan("");
  std::nth_element(finals.begin(), finals.begin() + static_cast<long>(finals.size() / 2), finals.end());
  return finals[finals.size() / 2];
}

// Six-cell chain. Cell 0 pays a small exit reward two steps from the start,
// cell 5 a large one three steps away. A move goes the other way with
// probability `slip`.
struct ChainModel {
  using State = int;
  static constexpr int kCells = 6;
  static constexpr int kStart = 2;
  static constexpr double kLeftPrize = 0.4;
  static constexpr double kRightPrize = 1.0;
  double slip = 0.0;
  double gamma = 0.9;

  int num_actions() const { return 2; }  // 0 left, 1 right
  double discount() const { return gamma; }
  bool is_terminal(int s) const { return s == 0 || s == kCells - 1; }
  static double exit_reward(int s) { return s == 0 ? kLeftPrize : (s == kCells - 1 ? kRightPrize : 0.0); }
  mcts::Transition<int> step(int s, int a, Rng& rng) const {
    const int dir = a == 0 ? -1 : 1;
    const bool slipped = slip > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < slip;
    const int next = s + (slipped ? -dir : dir);
    return {next, exit_reward(next), is_terminal(next)};
  }
  // Uniform random walk.
  double rollout(int s, int depth, Rng& rng) const {
    double ret = 0.0, disc = 1.0;
    for (int k = 0; k < depth && !is_terminal(s); ++k) {
      const mcts::Transition<int> t = step(s, std::uniform_int_distribution<int>(0, 1)(rng), rng);
      ret += disc * t.reward;
      disc *= gamma;
      s = t.next;
    }
    return ret;
  }
  bool same_state(int a, int b) const { return a == b; }
};

struct ChainSolution {
  std::array<double, ChainModel::kCells> value{};
  std::array<int, ChainModel::kCells> best{};
};

inline ChainSolution value_iteration(const ChainModel& m) {
  ChainSolution sol;
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double change = 0.0;
    for (int s = 1; s < ChainModel::kCells - 1; ++s) {
      double best = -1e9;
      for (int a = 0; a < 2; ++a) {
        const int dir = a == 0 ? -1 : 1;
        double q = 0.0;
        for (const auto& [p, next] : {std::pair{1 - m.slip, s + dir}, std::pair{m.slip, s - dir}}) {
          const double cont = m.is_terminal(next) ? 0.0 : sol.value[static_cast<std::size_t>(next)];
          q += p * (ChainModel::exit_reward(next) + m.gamma * cont);
        }
        if (q > best) {
          best = q;
          sol.best[static_cast<std::size_t>(s)] = a;
        }
      }
      change = std::max(change, std::abs(best - sol.value[static_cast<std::size_t>(s)]));
      sol.value[static_cast<std::size_t>(s)] = best;
    }
    if (change < 1e-14) break;
  }
  return sol;
}

struct ChainAgreement {
  int agree = 0;
  int runs = 0;
  double worst_value_error = 0.0;
  std::size_t widening_violations = 0;
};

inline ChainAgreement chain_agreement(const ChainModel& model, const mcts::DpwParams& params, int seeds) {
  const ChainSolution sol = value_iteration(model);
  const int root = ChainModel::kStart;
  ChainAgreement out;
  for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(seeds); ++seed) {
    mcts::DpwPlanner<ChainModel> planner(model, params);
    Rng rng(seed);
    const mcts::SearchResult res = planner.search(root, rng);
    out.agree += res.action == sol.best[root];
    out.worst_value_error = std::max(out.worst_value_error, std::abs(res.best_q() - sol.value[root]));
    out.widening_violations += planner.widening_violations();
    ++out.runs;
  }
  return out;
}

// Weighted TD loss computed directly from forward passes, for finite differences.
template <typename Real>
Real td_loss_only(const rl::Mlp<Real>& online, const rl::Mlp<Real>& target,
                  const rl::TransitionBatch<Real>& b, Real gamma) {
  const rl::MatrixX<Real> q = online.forward(b.obs);
  const rl::MatrixX<Real> qn = target.forward(b.next_obs);
  Real loss = 0;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const Real y = b.rewards(i) + (b.terminal[static_cast<std::size_t>(i)] ? 0 : gamma * qn.col(i).maxCoeff());
    const Real d = y - q(b.actions[static_cast<std::size_t>(i)], i);
    loss += b.weights(i) * d * d;
  }
  return loss / static_cast<Real>(b.size());
}

template <typename Real>
rl::TransitionBatch<Real> random_batch(int width, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.2, 1.0);
  std::uniform_int_distribution<int> act(0, kNumActions - 1);
  rl::TransitionBatch<Real> b;
  b.obs.resize(width, n);
  b.next_obs.resize(width, n);
  b.rewards.resize(n);
  b.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < width; ++r) {
      b.obs(r, i) = u(rng);
      b.next_obs(r, i) = u(rng);
    }
    b.actions.push_back(act(rng));
    b.rewards(i) = static_cast<Real>(std::round(u(rng)));
    b.terminal.push_back(i % 5 == 0);
    b.weights(i) = w(rng);
  }
  return b;
}

// Largest relative gap between backprop and central differences over every
// parameter of `online`.
template <typename Real>
double worst_gradient_error(rl::Mlp<Real>& online, const rl::Mlp<Real>& target,
                            const rl::TransitionBatch<Real>& batch, Real gamma, Real h) {
  const rl::TdResult<Real> res = rl::td_loss_grad(online, target, batch, gamma);
  double worst = 0.0;
  const auto check = [&](auto& param, const auto& analytic) {
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      const Real saved = param.data()[i];
      param.data()[i] = saved + h;
      const Real up = td_loss_only(online, target, batch, gamma);
      param.data()[i] = saved - h;
      const Real down = td_loss_only(online, target, batch, gamma);
      param.data()[i] = saved;
      const Real numeric = (up - down) / (2 * h);
      const Real a = analytic.data()[i];
      const Real scale = std::max<Real>({std::abs(numeric), std::abs(a), Real(1e-3)});
      worst = std::max(worst, static_cast<double>(std::abs(numeric - a) / scale));
    }
  };
  for (std::size_t k = 0; k < online.layers().size(); ++k) {
    check(online.layers()[k].weight, res.grads[k].weight);
    check(online.layers()[k].bias, res.grads[k].bias);
  }
  return worst;
}

}  // namespace merging::oracles
