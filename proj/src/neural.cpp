#include "cdrl/neural.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "cdrl/rng.hpp"

namespace cdrl::nn {

namespace {

void check_dims(const std::vector<int>& dims, const Head& head) {
  if (dims.size() < 2) throw ShapeError("an MLP needs at least input and output dimensions");
  for (int d : dims) {
    if (d < 1) throw ShapeError("layer dimensions must be positive");
  }
  if (head.kind == HeadKind::kSoftmaxGroups) {
    int total = 0;
    for (int g : head.groups) {
      if (g < 1) throw ShapeError("softmax groups must be non-empty");
      total += g;
    }
    if (total != dims.back()) throw ShapeError("softmax groups do not partition the output");
  } else if (!head.groups.empty()) {
    throw ShapeError("linear head takes no groups");
  }
}

void softmax_groups(Eigen::MatrixXd& z, const std::vector<int>& groups) {
  for (Eigen::Index col = 0; col < z.cols(); ++col) {
    int offset = 0;
    for (int g : groups) {
      auto seg = z.col(col).segment(offset, g);
      const double top = seg.maxCoeff();
      seg = (seg.array() - top).exp();
      seg /= seg.sum();
      offset += g;
    }
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> dims, Head head) : dims_(std::move(dims)), head_(std::move(head)) {
  check_dims(dims_, head_);
  layers_.reserve(dims_.size() - 1);
  for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
    layers_.push_back({Eigen::MatrixXd::Zero(dims_[k + 1], dims_[k]), Eigen::VectorXd::Zero(dims_[k + 1])});
  }
}

Mlp Mlp::initialized(std::vector<int> dims, Head head, std::uint64_t seed) {
  Mlp net(std::move(dims), std::move(head));
  Rng rng(seed);
  for (auto& layer : net.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = u(rng);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = u(rng);
  }
  return net;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, ForwardCache* cache) const {
  if (input.rows() != dims_.front()) {
    throw ShapeError("input has " + std::to_string(input.rows()) + " rows, expected " +
                     std::to_string(dims_.front()));
  }
  if (cache) {
    cache->activations.clear();
    cache->activations.reserve(layers_.size() + 1);
    cache->activations.push_back(input);
  }
  Eigen::MatrixXd a = input;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Eigen::MatrixXd z = layers_[k].weight * a;
    z.colwise() += layers_[k].bias;
    if (k + 1 < layers_.size()) {
      a = z.cwiseMax(0.0);
    } else {
      if (head_.kind == HeadKind::kSoftmaxGroups) softmax_groups(z, head_.groups);
      a = std::move(z);
    }
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

Eigen::VectorXd Mlp::forward_one(const Eigen::VectorXd& input) const {
  return forward(Eigen::MatrixXd(input)).col(0);
}

Gradients Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad,
                        Eigen::MatrixXd* input_grad) const {
  if (cache.activations.size() != layers_.size() + 1) throw ShapeError("backward called without a forward cache");
  const Eigen::MatrixXd& out = cache.activations.back();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
    throw ShapeError("output gradient shape does not match the cached forward pass");
  }

  Eigen::MatrixXd delta = output_grad;
  if (head_.kind == HeadKind::kSoftmaxGroups) {
    // Per group: dz = y * (g - <y, g>).
    int offset = 0;
    for (int g : head_.groups) {
      auto y = out.middleRows(offset, g);
      auto d = delta.middleRows(offset, g);
      const Eigen::RowVectorXd inner = (y.array() * d.array()).colwise().sum();
      d = (y.array() * (d.array().rowwise() - inner.array())).matrix();
      offset += g;
    }
  }

  Gradients grads;
  grads.weight.resize(layers_.size());
  grads.bias.resize(layers_.size());
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Eigen::MatrixXd& a_prev = cache.activations[k];
    grads.weight[k].noalias() = delta * a_prev.transpose();
    grads.bias[k] = delta.rowwise().sum();
    if (k == 0 && !input_grad) break;
    Eigen::MatrixXd upstream = layers_[k].weight.transpose() * delta;
    if (k == 0) {
      *input_grad = std::move(upstream);
    } else {
      delta = (a_prev.array() > 0.0).select(upstream, 0.0);
    }
  }
  return grads;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

std::vector<double> Mlp::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) out.push_back(layer.weight(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out.push_back(layer.bias(r));
  }
  return out;
}

void Mlp::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) throw ShapeError("parameter vector has the wrong length");
  std::size_t i = 0;
  for (auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = values[i++];
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = values[i++];
  }
}

void Mlp::soft_update(const Mlp& source, double tau) {
  if (source.dims_ != dims_) throw ShapeError("soft update between networks of different shape");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    layers_[k].weight = tau * source.layers_[k].weight + (1.0 - tau) * layers_[k].weight;
    layers_[k].bias = tau * source.layers_[k].bias + (1.0 - tau) * layers_[k].bias;
  }
}

bool Mlp::operator==(const Mlp& other) const {
  if (dims_ != other.dims_ || !(head_ == other.head_)) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (layers_[k].weight != other.layers_[k].weight || layers_[k].bias != other.layers_[k].bias) return false;
  }
  return true;
}

Gradients zero_gradients(const Mlp& net) {
  Gradients g;
  for (const auto& layer : net.layers()) {
    g.weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return g;
}

Adam::Adam(const Mlp& net, AdamConfig config)
    : config_(config), m_(zero_gradients(net)), v_(zero_gradients(net)) {}

void Adam::step(Mlp& net, const Gradients& grads) {
  auto& layers = net.layers();
  if (grads.weight.size() != layers.size() || m_.weight.size() != layers.size()) {
    throw ShapeError("gradient / optimizer state does not match the network");
  }
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (grads.weight[k].rows() != layers[k].weight.rows() || grads.weight[k].cols() != layers[k].weight.cols() ||
        grads.bias[k].size() != layers[k].bias.size()) {
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(k));
    }
    update(layers[k].weight, grads.weight[k], m_.weight[k], v_.weight[k]);
    update(layers[k].bias, grads.bias[k], m_.bias[k], v_.bias[k]);
  }
}

// Container layout, all integers little-endian:
//   "CDMLP\0\0\0" | u32 version | u32 n_dims | u32 dims[n] | u32 hidden tag (0 = relu)
//   | u32 head tag | u32 n_groups | u32 groups[g] | u64 n_params | f64 params[n]
//   | u64 FNV-1a of all preceding bytes
namespace {

constexpr char kMagic[8] = {'C', 'D', 'M', 'L', 'P', 0, 0, 0};
constexpr std::uint32_t kReluTag = 0;

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<char>((value >> (8 * b)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > bytes_.size()) throw CheckpointError(std::string("truncated checkpoint reading ") + what);
    T value = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    }
    pos_ += sizeof(T);
    return value;
  }
  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw CheckpointError("truncated checkpoint");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize(const Mlp& net) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.dims().size()));
  for (int d : net.dims()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put<std::uint32_t>(out, kReluTag);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.head().kind));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.head().groups.size()));
  for (int g : net.head().groups) put<std::uint32_t>(out, static_cast<std::uint32_t>(g));
  const auto params = net.parameters();
  put<std::uint64_t>(out, params.size());
  for (double p : params) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(p));
  put<std::uint64_t>(out, fnv1a(out));
  return out;
}

Mlp deserialize(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw CheckpointError("not a network checkpoint (bad magic)");
  }
  const auto version = in.get<std::uint32_t>("version");
  if (version != kCheckpointFormatVersion) {
    throw CheckpointError("unsupported checkpoint format version " + std::to_string(version));
  }
  const auto n_dims = in.get<std::uint32_t>("dimension count");
  if (n_dims < 2 || n_dims > 64) throw CheckpointError("implausible layer count in checkpoint");
  std::vector<int> dims;
  for (std::uint32_t k = 0; k < n_dims; ++k) dims.push_back(static_cast<int>(in.get<std::uint32_t>("dimension")));
  if (in.get<std::uint32_t>("hidden activation") != kReluTag) throw CheckpointError("unknown hidden activation tag");
  const auto head_tag = in.get<std::uint32_t>("head tag");
  if (head_tag > 1) throw CheckpointError("unknown head tag");
  Head head;
  head.kind = static_cast<HeadKind>(head_tag);
  const auto n_groups = in.get<std::uint32_t>("group count");
  if (n_groups > 1u << 20) throw CheckpointError("implausible group count in checkpoint");
  for (std::uint32_t k = 0; k < n_groups; ++k) head.groups.push_back(static_cast<int>(in.get<std::uint32_t>("group")));

  Mlp net;
  try {
    net = Mlp(dims, head);
  } catch (const ShapeError& e) {
    throw CheckpointError(std::string("inconsistent checkpoint header: ") + e.what());
  }
  const auto n_params = in.get<std::uint64_t>("parameter count");
  if (n_params != net.parameter_count()) throw CheckpointError("parameter count does not match layer dimensions");
  if (in.remaining() != n_params * 8 + 8) throw CheckpointError("checkpoint length does not match its header");
  std::vector<double> params(n_params);
  for (auto& p : params) p = std::bit_cast<double>(in.get<std::uint64_t>("parameter"));
  const std::size_t body = in.position();
  const auto checksum = in.get<std::uint64_t>("checksum");
  if (checksum != fnv1a(bytes.substr(0, body))) throw CheckpointError("checkpoint checksum mismatch");
  net.set_parameters(params);
  return net;
}

void save(const Mlp& net, const std::filesystem::path& file) {
  const std::string bytes = serialize(net);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + file.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing " + file.string());
}

Mlp load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize(buf.str());
  } catch (const CheckpointError& e) {
    throw CheckpointError(file.string() + ": " + e.what());
  }
}

}  // namespace cdrl::nn
