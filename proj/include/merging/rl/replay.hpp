#pragma once

#include <random>
#include <vector>

#include <Eigen/Core>

namespace merging::rl {

/// Binary tree of sums (and minima) over a power-of-two leaf array.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  void set(std::size_t index, double value);
  double get(std::size_t index) const { return sum_[leaf_base_ + index]; }
  double total() const { return sum_[1]; }
  double min() const { return min_[1]; }
  /// Leaf whose cumulative range contains `mass`, for mass in [0, total).
  std::size_t find(double mass) const;
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t leaf_base_;
  std::vector<double> sum_;
  std::vector<double> min_;
};

struct ReplaySample {
  std::vector<std::size_t> indices;
  std::vector<double> probabilities;
  Eigen::VectorXd weights;
};

/// Fixed-capacity FIFO experience buffer sampled in proportion to
/// priority^alpha with importance weights (N * P(i))^-beta / max_j w_j.
class PrioritizedReplay {
 public:
  PrioritizedReplay(std::size_t capacity, int obs_width, double alpha, double beta,
                    double priority_eps);

  void add(const Eigen::VectorXd& obs, int action, double reward, const Eigen::VectorXd& next_obs,
           bool terminal);

  ReplaySample sample(std::size_t batch_size, std::mt19937_64& rng) const;
  void update_priorities(const std::vector<std::size_t>& indices, const Eigen::VectorXd& priorities);
  void set_priority(std::size_t index, double priority);

  /// Sampling probability of slot `index` under the current priorities.
  double probability(std::size_t index) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int obs_width() const { return obs_width_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double max_priority() const { return max_priority_; }

  const Eigen::MatrixXd& observations() const { return obs_; }
  const Eigen::MatrixXd& next_observations() const { return next_obs_; }
  int action(std::size_t i) const { return actions_[i]; }
  double reward(std::size_t i) const { return rewards_[i]; }
  bool terminal(std::size_t i) const { return terminal_[i] != 0; }

 private:
  std::size_t capacity_;
  int obs_width_;
  double alpha_;
  double beta_;
  double priority_eps_;
  double max_priority_ = 1.0;
  std::size_t size_ = 0;
  std::size_t next_ = 0;
  Eigen::MatrixXd obs_;
  Eigen::MatrixXd next_obs_;
  std::vector<int> actions_;
  std::vector<double> rewards_;
  std::vector<char> terminal_;
  SumTree tree_;
};

}  // namespace merging::rl
