// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any fails.
//   merging_acceptance [--only 1,4,8] [--out DIR]

#include <CLI11.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "merging/config.hpp"
#include "merging/eval.hpp"
#include "merging/rl/replay.hpp"
#include "merging/scenario.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace merging;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "FAILED " << what << "; ";
    }
  }
};

std::string fmt(double x, int precision = 3) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

int worker_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

RunConfig desk_config() { return load_run_config(MERGING_SOURCE_DIR "/configs/desk.ini"); }

// --- 1: kinematics and driver model -----------------------------------------

void kinematics_and_model(Verdict& v) {
  const EnvConfig env;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> s(-100.0, 50.0), vel(0.0, 15.0), a(-4.0, 2.0), dt(0.01, 2.0);
  double worst_rel = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const PhysicalState p{s(rng), vel(rng), a(rng)};
    const double h = dt(rng);
    const PhysicalState got = step_kinematics(p, h);
    const PhysicalState want = oracles::kinematics(p, h);
    worst_rel = std::max(worst_rel, std::abs(got.s - want.s) / std::max(1.0, std::abs(want.s)));
    worst_rel = std::max(worst_rel, std::abs(got.v - want.v) / std::max(1.0, std::abs(want.v)));
  }
  v.check(worst_rel <= 1e-12, "kinematics closed form");
  v.detail << "kinematics max rel err " << fmt(worst_rel) << "; ";

  long mismatches = 0, checked = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    SceneState sc = oracles::random_scene(rng, -60.0, 45.0);
    for (auto& c : sc.traffic) c.driver->cooperation = 0.0;
    for (std::size_t i = 0; i < sc.traffic.size(); ++i) {
      const double x = cidm_accel(sc.traffic[i], sc, env.geom, env.driver);
      const double y = oracles::plain_idm(sc, i, env.driver);
      mismatches += std::memcmp(&x, &y, sizeof(double)) != 0;
      ++checked;
    }
  }
  v.check(mismatches == 0, "c=0 bit-exact IDM");
  v.detail << "c=0 vs IDM " << mismatches << "/" << checked << " bit mismatches; ";

  long violations = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const SceneState sc = oracles::random_scene(rng, -60.0, 0.0);
    for (std::size_t i = 0; i < sc.traffic.size(); ++i) {
      bool seen_open = false;
      for (int k = 0; k <= 100; ++k) {
        const bool open = yield_gate_open(sc, i, k / 100.0, env.geom, env.driver);
        violations += seen_open && !open;
        seen_open = seen_open || open;
      }
    }
  }
  v.check(violations == 0, "yield-gate monotonicity");
  v.detail << "gate monotonicity violations " << violations << "; ";

  // Follower behind a slower leader, 120 s at 0.1 s.
  SceneState sc = testing::scene(testing::ego(-1e9, 0.0), {testing::car(1, 0.0, 5.0, 0.0, 5.0),
                                                           testing::car(2, 20.0, 4.0, 0.0, 4.0)});
  double acc = 1.0;
  for (int step = 0; step < 1200; ++step) {
    acc = cidm_accel_at(sc, 0, env.geom, env.driver);
    const double lead = cidm_accel_at(sc, 1, env.geom, env.driver);
    sc.traffic[0].phys.a = acc;
    sc.traffic[1].phys.a = lead;
    for (auto& c : sc.traffic) c.phys = step_kinematics(c.phys, 0.1);
  }
  v.check(std::abs(acc) < 1e-3, "IDM equilibrium");
  v.detail << "|a| after 120 s " << fmt(std::abs(acc));
}

// --- 2: belief filter -------------------------------------------------------

void belief_filter(Verdict& v) {
  const double post = cooperation_posterior(0.5, 1.0, 0.0);  // likelihood ratio e
  v.check(std::abs(post - 0.7311) <= 1e-4 && std::abs(post - std::exp(1.0) / (std::exp(1.0) + 1.0)) <= 1e-9,
          "posterior hand value");
  v.detail << "posterior(0.5, e) " << fmt(post, 10) << "; ";
  std::size_t n1 = 0, n0 = 0;
  const double m1 = oracles::median_final_theta(1.0, 100, n1);
  const double m0 = oracles::median_final_theta(0.0, 100, n0);
  v.check(n1 == 100 && m1 > 0.9, "c=1 median > 0.9");
  v.check(n0 == 100 && m0 < 0.1, "c=0 median < 0.1");
  v.detail << "median final theta c=1 " << fmt(m1) << " (" << n1 << " seeds), c=0 " << fmt(m0) << " (" << n0
           << " seeds)";
}

// --- 3: numerical optimization ----------------------------------------------

void numerical_optimization(Verdict& v) {
  using Real = long double;
  std::mt19937_64 rng(303);
  rl::Mlp<Real> online({6, 10, 8, kNumActions}), target({6, 10, 8, kNumActions});
  online.initialize(rng);
  target.initialize(rng);
  for (auto& l : online.layers()) l.bias.setConstant(0.05L);
  const auto batch = oracles::random_batch<Real>(6, 16, rng);
  const double grad_err = oracles::worst_gradient_error(online, target, batch, Real(0.95), Real(1e-4));
  v.check(grad_err <= 1e-5, "finite differences");
  v.detail << "grad rel err " << fmt(grad_err) << "; ";

  rl::Mlp<double> net({kBaseObsWidth, 64, 32, kNumActions});
  net.initialize(rng);
  const rl::Mlp<double> frozen = net;
  const auto b = oracles::random_batch<Real>(kBaseObsWidth, 32, rng);
  rl::TransitionBatch<double> fixed;
  fixed.obs = b.obs.cast<double>();
  fixed.next_obs = b.next_obs.cast<double>();
  fixed.actions = b.actions;
  fixed.rewards = b.rewards.cast<double>();
  fixed.terminal = b.terminal;
  fixed.weights = Eigen::VectorXd::Ones(32);
  rl::Adam<double> adam({1e-3, 0.9, 0.999, 1e-8});
  const double initial = rl::td_loss_grad(net, frozen, fixed, 0.95).loss;
  for (int i = 0; i < 500; ++i) adam.step(net, rl::td_loss_grad(net, frozen, fixed, 0.95).grads);
  const double reduction = 1.0 - rl::td_loss_grad(net, frozen, fixed, 0.95).loss / initial;
  v.check(reduction >= 0.9, "500-step loss reduction");
  v.detail << "loss reduction " << fmt(100 * reduction) << "%; ";

  const std::vector<double> priorities{0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 0.02, 1.5, 4.0};
  const double alpha = 0.7;
  rl::PrioritizedReplay buf(16, 1, alpha, 0.4, 1e-6);
  for (std::size_t i = 0; i < priorities.size(); ++i) buf.add(Eigen::VectorXd::Zero(1), 0, 0, Eigen::VectorXd::Zero(1), false);
  for (std::size_t i = 0; i < priorities.size(); ++i) buf.set_priority(i, priorities[i]);
  double norm = 0;
  for (double p : priorities) norm += std::pow(p, alpha);
  std::vector<long> counts(priorities.size(), 0);
  const long draws = 100000;
  for (long k = 0; k < draws / 10; ++k) {
    for (std::size_t idx : buf.sample(10, rng).indices) ++counts[idx];
  }
  double chi2 = 0;
  for (std::size_t i = 0; i < priorities.size(); ++i) {
    const double expected = draws * std::pow(priorities[i], alpha) / norm;
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(priorities.size() - 1));
  const double p_value = boost::math::cdf(boost::math::complement(dist, chi2));
  v.check(p_value > 0.01, "replay chi-square");
  v.detail << "replay chi2 " << fmt(chi2) << " p " << fmt(p_value);
}

// --- 4: MCTS ----------------------------------------------------------------

void mcts_sanity(Verdict& v) {
  mcts::DpwParams params;
  params.iterations = 10'000;
  const auto r = oracles::chain_agreement(oracles::ChainModel{}, params, 100);
  v.check(r.agree == 100, "optimal root action 100/100");
  v.check(r.worst_value_error <= 0.05, "root value within 0.05");
  v.check(r.widening_violations == 0, "chain DPW audit");
  v.detail << "chain: optimal " << r.agree << "/100, worst |V - V*| " << fmt(r.worst_value_error)
           << ", widening violations " << r.widening_violations << "; ";

  // Audit on merging searches from generated scenes, every assumption.
  const EnvConfig env;
  ScenarioConfig sc;
  mcts::DpwParams merge_params;
  merge_params.iterations = 2000;
  const mcts::MergeModel model(env);
  std::size_t violations = 0, max_children = 0, audited = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    Rng rng = scenario_rng(404, i);
    const SceneState scene = sample_initial_scene(sc, env, rng);
    for (auto assumption : {mcts::CooperationAssumption::full(), mcts::CooperationAssumption::assume(0.0),
                            mcts::CooperationAssumption::assume(0.5), mcts::CooperationAssumption::assume(1.0)}) {
      mcts::DpwPlanner<mcts::MergeModel> planner(model, merge_params);
      planner.search(mcts::determinize(scene, assumption), rng);
      violations += planner.widening_violations();
      max_children = std::max(max_children, planner.max_successors());
      audited += planner.state_nodes().size() + planner.action_nodes().size();
    }
  }
  v.check(violations == 0, "merge DPW audit");
  v.check(max_children == 1, "one successor per action");
  v.detail << "merge searches: " << audited << " nodes audited, violations " << violations
           << ", max successors " << max_children;
}

// --- 5: desk-scale training -------------------------------------------------

void desk_training(Verdict& v, const fs::path& out) {
  RunConfig cfg = desk_config();
  cfg.train.mode = ObservationMode::Base;
  cfg.train.curriculum = {{Regime::Mixed, 1.0}};
  EvalConfig eval = cfg.eval;
  eval.regime = Regime::Mixed;
  eval.episodes = 200;
  eval.seed = 5005;  // held out: training and checkpoint scenarios use other streams
  eval.threads = worker_threads();
  eval.policy = PolicyKind::RlBase;
  int passes = 0;
  std::ofstream log(out / "criterion5.csv");
  log << "seed,goal_pct,collision_pct,timeout_pct,selected_step\n";
  for (std::uint64_t seed : {1, 2, 3}) {
    cfg.train.seed = seed;
    const rl::TrainResult trained = rl::train_dqn(cfg.train, cfg.env, cfg.scenario, cfg.belief);
    const EvalResult r = evaluate(eval, PolicySource::rl(PolicyKind::RlBase, trained.policy), cfg.env,
                                  cfg.scenario, cfg.belief);
    const bool ok = r.metrics.goal_rate > 90.0 && r.metrics.collision_rate < 5.0;
    passes += ok;
    log << seed << ',' << r.metrics.goal_rate << ',' << r.metrics.collision_rate << ',' << r.metrics.timeout_rate
        << ',' << trained.selected_step << '\n';
    v.detail << "seed " << seed << ": goal " << fmt(r.metrics.goal_rate) << "% coll "
             << fmt(r.metrics.collision_rate) << "%" << (ok ? "" : " (miss)") << "; ";
  }
  v.check(passes >= 2, "at least 2 of 3 seeds");
  v.detail << passes << "/3 seeds pass";
}

// --- 6: policy orderings ---------------------------------------------------

bool separated_above(const BinomialInterval& hi, const BinomialInterval& lo) { return hi.lower > lo.upper; }
bool steps_separated_above(const Metrics& hi, const Metrics& lo) { return hi.steps_lower() > lo.steps_upper(); }

void policy_orderings(Verdict& v, const fs::path& out) {
  RunConfig cfg = desk_config();
  cfg.eval.episodes = 200;
  cfg.eval.seed = 6006;
  cfg.eval.regime = Regime::Dense;
  cfg.eval.threads = worker_threads();
  cfg.train.curriculum = {{Regime::Mixed, 0.5}, {Regime::Dense, 0.5}};
  cfg.train.total_steps = 400'000;

  std::vector<PolicySource> sources;
  for (const auto& [kind, mode] : {std::pair{PolicyKind::RlBase, ObservationMode::Base},
                                   std::pair{PolicyKind::RlFullObs, ObservationMode::FullObs},
                                   std::pair{PolicyKind::RlBelief, ObservationMode::Belief}}) {
    rl::TrainConfig tc = cfg.train;
    tc.mode = mode;
    tc.seed = 61;
    const rl::TrainResult trained = rl::train_dqn(tc, cfg.env, cfg.scenario, cfg.belief);
    rl::save_policy(trained.policy, (out / ("policy_" + std::string(mode_name(mode)) + ".bin")).string());
    sources.push_back(PolicySource::rl(kind, trained.policy));
  }
  for (PolicyKind k : {PolicyKind::MctsFullObs, PolicyKind::MctsC0, PolicyKind::MctsC05, PolicyKind::MctsC1}) {
    sources.push_back(PolicySource::mcts(k, cfg.mcts, cfg.rollout));
  }
  const auto rows = compare(sources, cfg.eval, cfg.env, cfg.scenario, cfg.belief);
  write_metrics_csv(rows, (out / "criterion6_metrics.csv").string());
  write_summary_json(rows, cfg.eval, (out / "criterion6_summary.json").string());
  std::map<std::string, Metrics> m;
  for (const auto& row : rows) m[row.policy] = row;
  const Metrics& c0 = m["mcts-c0"];
  const Metrics& c05 = m["mcts-c05"];
  const Metrics& c1 = m["mcts-c1"];
  const Metrics& fo = m["mcts-fullobs"];

  const bool a = separated_above(c0.timeout_ci, c05.timeout_ci) && separated_above(c05.timeout_ci, c1.timeout_ci);
  const bool b = steps_separated_above(c0, c05) && steps_separated_above(c05, c1);
  const bool c = separated_above(c1.collision_ci, fo.collision_ci);
  const bool d = m["rl-belief"].collision_rate <= m["rl-base"].collision_rate;
  bool e = true;
  for (const char* rl_name : {"rl-base", "rl-fullobs", "rl-belief"}) {
    e = e && separated_above(c0.timeout_ci, m[rl_name].timeout_ci);
  }
  v.check(a, "(a) timeouts c0 > c0.5 > c1");
  v.check(b, "(b) steps c0 > c0.5 > c1");
  v.check(c, "(c) collisions c1 > FO");
  v.check(d, "(d) belief RL collisions <= base RL");
  v.check(e, "(e) RL timeouts < MCTS c0");
  for (const auto& row : rows) {
    v.detail << row.policy << " coll " << fmt(row.collision_rate) << "% to " << fmt(row.timeout_rate) << "% steps "
             << fmt(row.mean_steps_to_goal) << "; ";
  }
}

// --- 7: scenario generator --------------------------------------------------

void scenario_statistics(Verdict& v) {
  const EnvConfig env;
  double abs_accel = 0.0;
  long cars = 0;
  int dense_small_gap = 0;
  for (Regime regime : {Regime::Mixed, Regime::Dense}) {
    ScenarioConfig sc;
    sc.regime = regime;
    const CarCountRange range = sc.counts();
    const int bins = range.max - range.min + 1;
    std::vector<int> counts(static_cast<std::size_t>(bins), 0);
    const int samples = 10000;
    for (int i = 0; i < samples; ++i) {
      Rng rng = scenario_rng(7007, static_cast<std::uint64_t>(i));
      const SceneState s = sample_initial_scene(sc, env, rng);
      ++counts[s.traffic.size() - static_cast<std::size_t>(range.min)];
      for (const auto& c : s.traffic) abs_accel += std::abs(c.phys.a);
      cars += static_cast<long>(s.traffic.size());
      if (regime == Regime::Dense) {
        bool small = false;
        for (std::size_t k = 1; k < s.traffic.size(); ++k) {
          small = small || s.traffic[k].rear() - s.traffic[k - 1].phys.s < 2.0;
        }
        dense_small_gap += small;
      }
    }
    const double expected = static_cast<double>(samples) / bins;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared dist(bins - 1);
    const double p = boost::math::cdf(boost::math::complement(dist, chi2));
    v.check(p > 0.01, std::string(regime_name(regime)) + " count uniformity");
    v.detail << regime_name(regime) << " count chi2 p " << fmt(p) << "; ";
  }
  const double mean_abs = abs_accel / static_cast<double>(cars);
  const double gap_share = dense_small_gap / 10000.0;
  v.check(mean_abs < 0.3, "post-burn-in mean |a|");
  v.check(gap_share >= 0.25, "dense gap < 2 m share");
  v.detail << "mean |a| " << fmt(mean_abs) << "; dense scenes with a gap < 2 m " << fmt(100 * gap_share) << "%";
}

// --- 8: determinism ---------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism(Verdict& v, const fs::path& out) {
  RunConfig cfg = desk_config();
  cfg.train.total_steps = 20'000;
  cfg.train.eval_every = 10'000;
  cfg.train.mode = ObservationMode::Belief;
  const rl::TrainResult first = rl::train_dqn(cfg.train, cfg.env, cfg.scenario, cfg.belief);
  const rl::TrainResult second = rl::train_dqn(cfg.train, cfg.env, cfg.scenario, cfg.belief);
  bool same_weights = true;
  for (std::size_t k = 0; k < first.policy.net.layers().size(); ++k) {
    same_weights = same_weights && first.policy.net.layers()[k].weight == second.policy.net.layers()[k].weight &&
                   first.policy.net.layers()[k].bias == second.policy.net.layers()[k].bias;
  }
  v.check(same_weights, "training reproducible");

  mcts::DpwParams dpw = cfg.mcts;
  dpw.iterations = 300;
  const std::vector<PolicySource> sources{PolicySource::rl(PolicyKind::RlBelief, first.policy),
                                          PolicySource::mcts(PolicyKind::MctsC05, dpw, cfg.rollout)};
  EvalConfig eval = cfg.eval;
  eval.episodes = 40;
  eval.seed = 8008;
  std::vector<std::string> files;
  for (int threads : {1, 1, 4}) {
    eval.threads = threads;
    const fs::path path = out / ("criterion8_run" + std::to_string(files.size()) + ".csv");
    write_metrics_csv(compare(sources, eval, cfg.env, cfg.scenario, cfg.belief), path.string());
    files.push_back(slurp(path));
  }
  v.check(files[0] == files[1], "serial reruns identical");
  v.check(files[0] == files[2], "serial vs 4 threads identical");
  v.detail << "weights identical " << (same_weights ? "yes" : "no") << "; serial/serial "
           << (files[0] == files[1] ? "identical" : "differ") << "; serial/parallel "
           << (files[0] == files[2] ? "identical" : "differ") << " (" << files[0].size() << " bytes)";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::string out_dir = "acceptance_out";
  app.add_option("--only", only, "Run just these criteria")->delimiter(',');
  app.add_option("--out", out_dir, "Where criterion artifacts are written");
  CLI11_PARSE(app, argc, argv);
  const fs::path out = out_dir;
  fs::create_directories(out);

  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
      {"kinematics/model property suite", kinematics_and_model},
      {"belief-filter oracle suite", belief_filter},
      {"numerical-optimization suite", numerical_optimization},
      {"MCTS sanity", mcts_sanity},
      {"desk-scale training", [&](Verdict& v) { desk_training(v, out); }},
      {"policy orderings at desk scale", [&](Verdict& v) { policy_orderings(v, out); }},
      {"scenario-generator statistics", scenario_statistics},
      {"determinism", [&](Verdict& v) { determinism(v, out); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << ", "
              << fmt(secs) << " s): " << v.detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
  return failures == 0 ? 0 : 1;
}
