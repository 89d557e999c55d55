#pragma once

#include <map>

#include "merging/env.hpp"
#include "merging/types.hpp"

namespace merging {

struct BeliefConfig {
  double sigma_pos = 1.0;
  double sigma_vel = 1.0;
  double prior = 0.5;
};

/// Per-driver probability that the cooperation level is 1.
class CooperationBelief {
 public:
  explicit CooperationBelief(BeliefConfig cfg = {}) : cfg_(cfg) {}

  const BeliefConfig& config() const { return cfg_; }
  double theta(VehicleId id) const;
  bool tracks(VehicleId id) const { return entries_.count(id) != 0; }
  void set(VehicleId id, double theta) { entries_[id] = theta; }
  const std::map<VehicleId, double>& entries() const { return entries_; }

 private:
  BeliefConfig cfg_;
  std::map<VehicleId, double> entries_;
};

/// Binary-hypothesis Bayes rule written in log-likelihoods. Endpoints 0 and 1
/// are absorbing and a zero log-ratio leaves theta untouched.
double cooperation_posterior(double theta, double log_lik_coop, double log_lik_noncoop);

/// One-step prediction of a traffic vehicle with its cooperation forced to
/// `hypothesis`. All drivers react to the same pre-step scene, so the
/// prediction does not depend on what is assumed about the other drivers.
PhysicalState predict_vehicle(const SceneState& scene, VehicleId id, double hypothesis,
                              const EnvConfig& env, double dt);

/// Log-density (up to a shared constant) of an observed (s, v) under a
/// prediction with independent Gaussian noise.
double transition_log_likelihood(const PhysicalState& observed, const PhysicalState& predicted,
                                 const BeliefConfig& cfg);

/// Filters every vehicle within sensor range of the ego in `next`. New or
/// respawned vehicles restart from the prior.
CooperationBelief update_belief(const CooperationBelief& belief, const SceneState& prev,
                                const SceneState& next, const EnvConfig& env);

/// Base observation followed by the beliefs of the four neighbor slots.
Observation belief_observation(const SceneState& scene, const CooperationBelief& belief,
                               const EnvConfig& env);

}  // namespace merging
