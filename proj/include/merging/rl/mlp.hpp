#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace merging::rl {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weight;  // out x in
  VectorX<Scalar> bias;

  int inputs() const { return static_cast<int>(weight.cols()); }
  int outputs() const { return static_cast<int>(weight.rows()); }
};

/// Gradients laid out like the network's layers.
template <typename Scalar>
using MlpGradients = std::vector<DenseLayer<Scalar>>;

/// Intermediate values of a batched forward pass, kept for backpropagation.
template <typename Scalar>
struct ForwardCache {
  std::vector<MatrixX<Scalar>> inputs;       // input to each layer
  std::vector<MatrixX<Scalar>> pre_activation;
};

/// Fully connected network with ReLU hidden layers and a linear output.
/// Batched calls take one sample per column.
template <typename Scalar>
class Mlp {
 public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  Mlp() = default;

  explicit Mlp(const std::vector<int>& widths) {
    if (widths.size() < 2) throw std::invalid_argument("Mlp: need at least two widths");
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      if (widths[i] <= 0 || widths[i + 1] <= 0) throw std::invalid_argument("Mlp: bad width");
      layers_.push_back({Matrix::Zero(widths[i + 1], widths[i]), Vector::Zero(widths[i + 1])});
    }
  }

  explicit Mlp(std::vector<DenseLayer<Scalar>> layers) : layers_(std::move(layers)) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (layers_[i].bias.size() != layers_[i].weight.rows() ||
          (i > 0 && layers_[i].inputs() != layers_[i - 1].outputs())) {
        throw std::invalid_argument("Mlp: layer shapes do not chain");
      }
    }
  }

  /// Glorot-uniform weights, zero biases.
  template <typename Urng>
  void initialize(Urng& rng) {
    for (auto& layer : layers_) {
      const double limit = std::sqrt(6.0 / (layer.inputs() + layer.outputs()));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
          layer.weight(i, j) = static_cast<Scalar>(u(rng));
        }
      }
      layer.bias.setZero();
    }
  }

  int input_width() const { return layers_.empty() ? 0 : layers_.front().inputs(); }
  int output_width() const { return layers_.empty() ? 0 : layers_.back().outputs(); }
  std::vector<DenseLayer<Scalar>>& layers() { return layers_; }
  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  Matrix forward(const Matrix& x) const {
    check_input(x.rows());
    Matrix h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Matrix z = layers_[i].weight * h;
      z.colwise() += layers_[i].bias;
      h = (i + 1 < layers_.size()) ? Matrix(z.cwiseMax(Scalar(0))) : std::move(z);
    }
    return h;
  }

  Vector forward(const Vector& x) const { return forward(Matrix(x)).col(0); }

  Matrix forward(const Matrix& x, ForwardCache<Scalar>& cache) const {
    check_input(x.rows());
    cache.inputs.resize(layers_.size());
    cache.pre_activation.resize(layers_.size());
    Matrix h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      cache.inputs[i] = h;
      Matrix z = layers_[i].weight * h;
      z.colwise() += layers_[i].bias;
      cache.pre_activation[i] = z;
      h = (i + 1 < layers_.size()) ? Matrix(z.cwiseMax(Scalar(0))) : std::move(z);
    }
    return h;
  }

  /// Backpropagates dLoss/dOutput through a cached forward pass.
  MlpGradients<Scalar> backward(const ForwardCache<Scalar>& cache, const Matrix& grad_output) const {
    MlpGradients<Scalar> grads(layers_.size());
    Matrix delta = grad_output;
    for (std::size_t k = layers_.size(); k-- > 0;) {
      grads[k].weight = delta * cache.inputs[k].transpose();
      grads[k].bias = delta.rowwise().sum();
      if (k > 0) {
        Matrix upstream = layers_[k].weight.transpose() * delta;
        const Matrix& z = cache.pre_activation[k - 1];
        delta = (z.array() > Scalar(0)).select(upstream, Scalar(0));
      }
    }
    return grads;
  }

  template <typename Other>
  Mlp<Other> cast() const {
    std::vector<DenseLayer<Other>> out;
    for (const auto& l : layers_) {
      out.push_back({l.weight.template cast<Other>(), l.bias.template cast<Other>()});
    }
    return Mlp<Other>(std::move(out));
  }

  bool all_finite() const {
    for (const auto& l : layers_) {
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    }
    return true;
  }

 private:
  void check_input(Eigen::Index rows) const {
    if (rows != input_width()) throw std::invalid_argument("Mlp: input width mismatch");
  }

  std::vector<DenseLayer<Scalar>> layers_;
};

/// Adam with bias-corrected moments.
template <typename Scalar>
class Adam {
 public:
  struct Options {
    Scalar learning_rate = Scalar(1e-4);
    Scalar beta1 = Scalar(0.9);
    Scalar beta2 = Scalar(0.999);
    Scalar epsilon = Scalar(1e-8);
  };

  Adam() = default;
  explicit Adam(Options opt) : opt_(opt) {}

  const Options& options() const { return opt_; }
  void set_learning_rate(Scalar lr) { opt_.learning_rate = lr; }
  long steps() const { return t_; }

  void step(Mlp<Scalar>& net, const MlpGradients<Scalar>& grads) {
    auto& layers = net.layers();
    if (grads.size() != layers.size()) throw std::invalid_argument("Adam: gradient shape mismatch");
    if (m_.empty()) {
      for (const auto& l : layers) {
        m_.push_back({MatrixX<Scalar>::Zero(l.weight.rows(), l.weight.cols()),
                      VectorX<Scalar>::Zero(l.bias.size())});
      }
      v_ = m_;
    }
    ++t_;
    const Scalar c1 = Scalar(1) - std::pow(opt_.beta1, Scalar(t_));
    const Scalar c2 = Scalar(1) - std::pow(opt_.beta2, Scalar(t_));
    for (std::size_t k = 0; k < layers.size(); ++k) {
      update(layers[k].weight, grads[k].weight, m_[k].weight, v_[k].weight, c1, c2);
      update(layers[k].bias, grads[k].bias, m_[k].bias, v_[k].bias, c1, c2);
    }
  }

 private:
  template <typename Param, typename Grad, typename Moment>
  void update(Param& param, const Grad& g, Moment& m, Moment& v, Scalar c1, Scalar c2) const {
    if (g.rows() != param.rows() || g.cols() != param.cols()) {
      throw std::invalid_argument("Adam: gradient shape mismatch");
    }
    m = opt_.beta1 * m + (Scalar(1) - opt_.beta1) * g;
    v = opt_.beta2 * v + (Scalar(1) - opt_.beta2) * g.cwiseProduct(g);
    param.array() -= opt_.learning_rate * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + opt_.epsilon);
  }

  Options opt_{};
  long t_ = 0;
  MlpGradients<Scalar> m_;
  MlpGradients<Scalar> v_;
};

}  // namespace merging::rl
