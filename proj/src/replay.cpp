#include "merging/rl/replay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace merging::rl {

SumTree::SumTree(std::size_t capacity) : capacity_(capacity), leaf_base_(1) {
  if (capacity == 0) throw std::invalid_argument("SumTree: zero capacity");
  while (leaf_base_ < capacity) leaf_base_ <<= 1;
  sum_.assign(2 * leaf_base_, 0.0);
  min_.assign(2 * leaf_base_, std::numeric_limits<double>::infinity());
}

void SumTree::set(std::size_t index, double value) {
  std::size_t node = leaf_base_ + index;
  sum_[node] = value;
  min_[node] = value;
  for (node >>= 1; node >= 1; node >>= 1) {
    sum_[node] = sum_[2 * node] + sum_[2 * node + 1];
    min_[node] = std::min(min_[2 * node], min_[2 * node + 1]);
  }
}

std::size_t SumTree::find(double mass) const {
  std::size_t node = 1;
  while (node < leaf_base_) {
    const std::size_t left = 2 * node;
    if (mass < sum_[left] || sum_[left + 1] <= 0.0) {
      node = left;
    } else {
      mass -= sum_[left];
      node = left + 1;
    }
  }
  return std::min(node - leaf_base_, capacity_ - 1);
}

PrioritizedReplay::PrioritizedReplay(std::size_t capacity, int obs_width, double alpha,
                                     double beta, double priority_eps)
    : capacity_(capacity),
      obs_width_(obs_width),
      alpha_(alpha),
      beta_(beta),
      priority_eps_(priority_eps),
      obs_(obs_width, static_cast<Eigen::Index>(capacity)),
      next_obs_(obs_width, static_cast<Eigen::Index>(capacity)),
      actions_(capacity),
      rewards_(capacity),
      terminal_(capacity),
      tree_(capacity) {
  if (obs_width <= 0) throw std::invalid_argument("PrioritizedReplay: bad observation width");
  if (priority_eps <= 0.0) throw std::invalid_argument("PrioritizedReplay: priority floor must be > 0");
}

void PrioritizedReplay::add(const Eigen::VectorXd& obs, int action, double reward,
                            const Eigen::VectorXd& next_obs, bool terminal) {
  if (obs.size() != obs_width_ || next_obs.size() != obs_width_) {
    throw std::invalid_argument("PrioritizedReplay: observation width mismatch");
  }
  const auto col = static_cast<Eigen::Index>(next_);
  obs_.col(col) = obs;
  next_obs_.col(col) = next_obs;
  actions_[next_] = action;
  rewards_[next_] = reward;
  terminal_[next_] = terminal ? 1 : 0;
  tree_.set(next_, std::pow(max_priority_, alpha_));
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

void PrioritizedReplay::set_priority(std::size_t index, double priority) {
  if (index >= size_) throw std::out_of_range("PrioritizedReplay: index out of range");
  const double p = std::max(priority, priority_eps_);
  max_priority_ = std::max(max_priority_, p);
  tree_.set(index, std::pow(p, alpha_));
}

void PrioritizedReplay::update_priorities(const std::vector<std::size_t>& indices,
                                          const Eigen::VectorXd& priorities) {
  for (std::size_t k = 0; k < indices.size(); ++k) {
    set_priority(indices[k], priorities(static_cast<Eigen::Index>(k)));
  }
}

double PrioritizedReplay::probability(std::size_t index) const {
  return tree_.get(index) / tree_.total();
}

ReplaySample PrioritizedReplay::sample(std::size_t batch_size, std::mt19937_64& rng) const {
  if (batch_size == 0 || size_ < batch_size) {
    throw std::runtime_error("PrioritizedReplay: not enough samples in buffer");
  }
  ReplaySample out;
  out.indices.resize(batch_size);
  out.probabilities.resize(batch_size);
  out.weights.resize(static_cast<Eigen::Index>(batch_size));
  const double total = tree_.total();
  const double n = static_cast<double>(size_);
  const double max_weight = std::pow(n * tree_.min() / total, -beta_);
  std::uniform_real_distribution<double> u(0.0, total);
  for (std::size_t k = 0; k < batch_size; ++k) {
    std::size_t idx = tree_.find(u(rng));
    if (idx >= size_) idx = size_ - 1;
    const double p = tree_.get(idx) / total;
    out.indices[k] = idx;
    out.probabilities[k] = p;
    out.weights(static_cast<Eigen::Index>(k)) = std::pow(n * p, -beta_) / max_weight;
  }
  return out;
}

}  // namespace merging::rl
