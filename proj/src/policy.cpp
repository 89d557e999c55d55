#include "merging/rl/policy.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace merging::rl {

QPolicy QPolicy::create(ObservationMode mode, const std::vector<int>& hidden,
                        const ObservationScaling& scaling) {
  std::vector<int> widths{observation_width(mode)};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(kNumActions);
  return QPolicy{Mlp<double>(widths), mode, scaling};
}

Eigen::VectorXd QPolicy::normalize(const Observation& raw) const {
  if (raw.size() != observation_width(mode)) {
    throw std::invalid_argument("QPolicy: observation width " + std::to_string(raw.size()) +
                                " does not match mode " + std::string(mode_name(mode)));
  }
  return raw.cwiseQuotient(observation_scale(mode, scaling));
}

Eigen::VectorXd q_forward(const QPolicy& policy, const Observation& raw) {
  return policy.net.forward(Eigen::VectorXd(policy.normalize(raw)));
}

int argmax_action(const Eigen::VectorXd& q) {
  int best = 0;
  for (int i = 1; i < q.size(); ++i) {
    if (q(i) > q(best)) best = i;
  }
  return best;
}

EgoAction greedy_action(const QPolicy& policy, const Observation& raw) {
  return action_from_index(argmax_action(q_forward(policy, raw)));
}

namespace {

constexpr std::array<char, 8> kMagic{'M', 'R', 'G', 'Q', 'P', 'O', 'L', '\0'};

std::uint64_t fnv1a(const std::vector<char>& bytes, std::size_t n) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(bytes[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  std::vector<char> bytes;
};

class Reader {
 public:
  explicit Reader(const std::vector<char>& b, std::size_t end) : bytes_(b), end_(end) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > end_) throw PolicyFormatError("policy file is truncated");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::size_t position() const { return pos_; }

 private:
  const std::vector<char>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_policy(const QPolicy& policy, const std::string& path) {
  Writer w;
  w.bytes.insert(w.bytes.end(), kMagic.begin(), kMagic.end());
  w.put<std::uint32_t>(kPolicyFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(policy.mode));
  w.put<double>(policy.scaling.position);
  w.put<double>(policy.scaling.velocity);
  w.put<double>(policy.scaling.accel);
  const auto& layers = policy.net.layers();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(l.weight.rows()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(l.weight.cols()));
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) w.put<double>(l.weight(i, j));
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) w.put<double>(l.bias(i));
  }
  w.put<std::uint64_t>(fnv1a(w.bytes, w.bytes.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open policy file for writing: " + path);
  out.write(w.bytes.data(), static_cast<std::streamsize>(w.bytes.size()));
  if (!out) throw std::runtime_error("failed writing policy file: " + path);
}

QPolicy load_policy(const std::string& path, std::optional<ObservationMode> expected_mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PolicyFormatError("cannot open policy file: " + path);
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr std::size_t kTrailer = sizeof(std::uint64_t);
  if (bytes.size() < kMagic.size() + kTrailer) throw PolicyFormatError("policy file is truncated");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw PolicyFormatError("not a policy file: " + path);
  }

  const std::size_t body = bytes.size() - kTrailer;
  Reader r(bytes, body);
  for (std::size_t i = 0; i < kMagic.size(); ++i) r.get<char>();
  const auto version = r.get<std::uint32_t>();
  if (version != kPolicyFormatVersion) {
    throw PolicyFormatError("unsupported policy format version " + std::to_string(version));
  }
  const auto mode_raw = r.get<std::uint32_t>();
  if (mode_raw > 2) throw PolicyFormatError("invalid observation mode in policy file");
  QPolicy policy;
  policy.mode = static_cast<ObservationMode>(mode_raw);
  policy.scaling.position = r.get<double>();
  policy.scaling.velocity = r.get<double>();
  policy.scaling.accel = r.get<double>();
  const auto count = r.get<std::uint32_t>();
  if (count == 0 || count > 64) throw PolicyFormatError("invalid layer count in policy file");
  std::vector<DenseLayer<double>> layers;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096) {
      throw PolicyFormatError("invalid layer shape in policy file");
    }
    DenseLayer<double> layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) layer.weight(i, j) = r.get<double>();
    }
    for (Eigen::Index i = 0; i < rows; ++i) layer.bias(i) = r.get<double>();
    layers.push_back(std::move(layer));
  }
  if (r.position() != body) throw PolicyFormatError("unexpected trailing data in policy file");
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body, kTrailer);
  if (stored != fnv1a(bytes, body)) throw PolicyFormatError("policy file checksum mismatch");

  try {
    policy.net = Mlp<double>(std::move(layers));
  } catch (const std::invalid_argument& e) {
    throw PolicyFormatError(e.what());
  }
  if (policy.net.input_width() != observation_width(policy.mode) ||
      policy.net.output_width() != kNumActions) {
    throw PolicyFormatError("policy network shape does not match its observation mode");
  }
  if (expected_mode && *expected_mode != policy.mode) {
    throw PolicyFormatError("policy was trained for " + std::string(mode_name(policy.mode)) +
                            " observations, but " + std::string(mode_name(*expected_mode)) +
                            " was requested");
  }
  return policy;
}

}  // namespace merging::rl
