#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "merging/env.hpp"
#include "merging/rl/mlp.hpp"

namespace merging::rl {

/// Value network plus what is needed to feed it raw observations.
struct QPolicy {
  Mlp<double> net;
  ObservationMode mode = ObservationMode::Base;
  ObservationScaling scaling{};

  /// Network with widths input -> hidden... -> kNumActions for `mode`.
  static QPolicy create(ObservationMode mode, const std::vector<int>& hidden,
                        const ObservationScaling& scaling);

  Eigen::VectorXd normalize(const Observation& raw) const;
};

/// Action values for a raw observation. Throws on width mismatch.
Eigen::VectorXd q_forward(const QPolicy& policy, const Observation& raw);

/// Arg max with ties broken toward the lowest action index.
int argmax_action(const Eigen::VectorXd& q);
EgoAction greedy_action(const QPolicy& policy, const Observation& raw);

class PolicyFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kPolicyFormatVersion = 1;

/// Binary layout, little-endian:
///   char[8]  magic "MRGQPOL\0"
///   u32      format version
///   u32      observation mode (0 base, 1 fullobs, 2 belief)
///   f64 x3   scaling: position, velocity, acceleration
///   u32      layer count
///   per layer: u32 rows, u32 cols, rows*cols f64 weights (row-major), rows f64 bias
///   u64      FNV-1a hash of every preceding byte
void save_policy(const QPolicy& policy, const std::string& path);

/// Throws PolicyFormatError on a corrupt, truncated or mismatched file.
QPolicy load_policy(const std::string& path,
                    std::optional<ObservationMode> expected_mode = std::nullopt);

}  // namespace merging::rl
