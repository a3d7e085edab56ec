#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cdrl::nn {

enum class HeadKind : std::uint32_t {
  kLinear = 0,
  kSoftmaxGroups = 1,  // independent softmax over consecutive output groups
};

struct Head {
  HeadKind kind = HeadKind::kLinear;
  std::vector<int> groups;  // sizes; must partition the output for kSoftmaxGroups

  static Head linear() { return {}; }
  static Head softmax(std::vector<int> groups) { return {HeadKind::kSoftmaxGroups, std::move(groups)}; }
  bool operator==(const Head&) const = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// Post-activation values of every layer from one batched forward pass;
/// activations[0] is the input.  Columns are samples.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
  bool empty() const { return activations.empty(); }
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Fully connected network: ReLU hidden layers and a linear or grouped
/// softmax output head.
class Mlp {
 public:
  Mlp() = default;
  /// Zero-initialized parameters.  dims = {input, hidden..., output}.
  Mlp(std::vector<int> dims, Head head);

  /// Weights and biases drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static Mlp initialized(std::vector<int> dims, Head head, std::uint64_t seed);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, ForwardCache* cache = nullptr) const;
  Eigen::VectorXd forward_one(const Eigen::VectorXd& input) const;

  /// Backpropagates dLoss/dOutput (summed over batch columns) through the
  /// cached pass.  Fills `input_grad` with dLoss/dInput when non-null.
  Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad,
                     Eigen::MatrixXd* input_grad = nullptr) const;

  const std::vector<int>& dims() const { return dims_; }
  const Head& head() const { return head_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  int input_size() const { return dims_.front(); }
  int output_size() const { return dims_.back(); }

  std::size_t parameter_count() const;
  /// Parameters in declared order: per layer, weight row-major then bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);

  /// this <- tau * source + (1 - tau) * this
  void soft_update(const Mlp& source, double tau);

  bool operator==(const Mlp& other) const;

 private:
  std::vector<int> dims_;
  Head head_;
  std::vector<DenseLayer> layers_;
};

Gradients zero_gradients(const Mlp& net);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, AdamConfig config);

  /// Gradient-descent step with bias-corrected moments.
  void step(Mlp& net, const Gradients& grads);
  std::int64_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::int64_t steps_ = 0;
  Gradients m_;
  Gradients v_;
};

class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

std::string serialize(const Mlp& net);
Mlp deserialize(std::string_view bytes);
void save(const Mlp& net, const std::filesystem::path& file);
Mlp load(const std::filesystem::path& file);

}  // namespace cdrl::nn
