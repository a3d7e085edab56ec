#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "cdrl/neural.hpp"

namespace cdrl::testing {

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a) + std::abs(b), 1e-6);
}

struct GradCheck {
  double params = 0.0;  // worst relative error over parameters
  double inputs = 0.0;  // worst relative error over inputs
};

/// Random dims in [1, 16] with 1-3 hidden layers; softmax heads get random groups.
inline nn::Mlp random_mlp(std::mt19937_64& rng, bool softmax) {
  std::uniform_int_distribution<int> width(1, 16);
  std::vector<int> dims{width(rng)};
  const int hidden = std::uniform_int_distribution<int>(1, 3)(rng);
  for (int k = 0; k < hidden; ++k) dims.push_back(width(rng));
  nn::Head head = nn::Head::linear();
  if (softmax) {
    const int out = std::uniform_int_distribution<int>(2, 16)(rng);
    std::vector<int> groups;
    int left = out;
    while (left > 0) {
      const int g = std::min(left, std::uniform_int_distribution<int>(1, 4)(rng));
      groups.push_back(g);
      left -= g;
    }
    dims.push_back(out);
    head = nn::Head::softmax(groups);
  } else {
    dims.push_back(width(rng));
  }
  return nn::Mlp::initialized(dims, head, rng());
}

/// True when every hidden pre-activation is at least `margin` from the ReLU kink.
inline bool clear_of_kinks(const nn::Mlp& net, const Eigen::MatrixXd& x, double margin) {
  nn::ForwardCache cache;
  net.forward(x, &cache);
  for (std::size_t k = 0; k + 1 < net.layers().size(); ++k) {
    const auto& layer = net.layers()[k];
    const Eigen::MatrixXd z = (layer.weight * cache.activations[k]).colwise() + layer.bias;
    if ((z.array().abs() < margin).any()) return false;
  }
  return true;
}

/// Loss = sum(G .* net(x)); compares backward() against central differences.
inline GradCheck check_gradients(const nn::Mlp& net, std::mt19937_64& rng, int batch = 3, double h = 1e-5) {
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_matrix = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
  };
  Eigen::MatrixXd x = random_matrix(net.input_size(), batch);
  while (!clear_of_kinks(net, x, 1e-4)) x = random_matrix(net.input_size(), batch);
  const Eigen::MatrixXd g = random_matrix(net.output_size(), batch);
  auto loss = [&](const nn::Mlp& m, const Eigen::MatrixXd& in) { return (m.forward(in).array() * g.array()).sum(); };

  nn::ForwardCache cache;
  net.forward(x, &cache);
  Eigen::MatrixXd dx;
  const nn::Gradients grads = net.backward(cache, g, &dx);

  std::vector<double> analytic;
  for (std::size_t k = 0; k < grads.weight.size(); ++k) {
    for (Eigen::Index r = 0; r < grads.weight[k].rows(); ++r) {
      for (Eigen::Index c = 0; c < grads.weight[k].cols(); ++c) analytic.push_back(grads.weight[k](r, c));
    }
    for (Eigen::Index r = 0; r < grads.bias[k].size(); ++r) analytic.push_back(grads.bias[k](r));
  }

  GradCheck out;
  nn::Mlp probe = net;
  std::vector<double> theta = net.parameters();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + h;
    probe.set_parameters(theta);
    const double up = loss(probe, x);
    theta[i] = keep - h;
    probe.set_parameters(theta);
    const double down = loss(probe, x);
    theta[i] = keep;
    out.params = std::max(out.params, relative_error(analytic[i], (up - down) / (2 * h)));
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::MatrixXd xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    out.inputs = std::max(out.inputs, relative_error(dx.data()[i], (loss(net, xp) - loss(net, xm)) / (2 * h)));
  }
  return out;
}

}  // namespace cdrl::testing
