#include "cdrl/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cdrl {

void DualState::record(double iteration_reward) {
  lambda_history.push_back(lambda);
  reward_window.push_back(iteration_reward);
  while (lambda_history.size() > window) lambda_history.pop_front();
  while (reward_window.size() > window) reward_window.pop_front();
}

std::vector<double> DualState::lambda_stddev() const {
  std::vector<double> out(lambda.size(), 0.0);
  if (lambda_history.empty()) return out;
  const double n = static_cast<double>(lambda_history.size());
  for (std::size_t c = 0; c < lambda.size(); ++c) {
    double mean = 0.0;
    for (const auto& l : lambda_history) mean += l[c];
    mean /= n;
    double var = 0.0;
    for (const auto& l : lambda_history) var += (l[c] - mean) * (l[c] - mean);
    out[c] = std::sqrt(var / n);
  }
  return out;
}

double DualState::window_mean_reward() const {
  if (reward_window.empty()) return 0.0;
  double s = 0.0;
  for (double r : reward_window) s += r;
  return s / static_cast<double>(reward_window.size());
}

DualState init_lambda(const std::vector<Commodity>& commodities, const DualConfig& config) {
  DualState state;
  state.window = config.window;
  state.sigma_threshold = config.sigma_threshold;
  for (const Commodity& c : commodities) {
    state.lambda.push_back(config.lambda0_scale * std::sqrt(c.mean_rate * c.reliability));
    state.eta.push_back(config.learning_rate);
  }
  return state;
}

double shaped_reward(double cost_normalized, std::span<const double> throughput, std::span<const double> lambda) {
  if (throughput.size() != lambda.size()) throw std::invalid_argument("throughput / multiplier size mismatch");
  double r = -cost_normalized;
  for (std::size_t c = 0; c < lambda.size(); ++c) r += lambda[c] * throughput[c];
  return r;
}

std::vector<double> estimate_mhat(const std::vector<std::vector<std::vector<double>>>& episodes, double gamma) {
  if (episodes.empty()) throw std::invalid_argument("estimate_mhat needs at least one episode");
  std::size_t nc = 0;
  for (const auto& ep : episodes) {
    if (!ep.empty()) {
      nc = ep.front().size();
      break;
    }
  }
  std::vector<double> mhat(nc, 0.0);
  for (const auto& ep : episodes) {
    double discount = 1.0;
    for (const auto& step : ep) {
      if (step.size() != nc) throw std::invalid_argument("inconsistent commodity count across steps");
      for (std::size_t c = 0; c < nc; ++c) mhat[c] += discount * step[c];
      discount *= gamma;
    }
  }
  for (double& m : mhat) m /= static_cast<double>(episodes.size());
  return mhat;
}

void dual_update(DualState& state, std::span<const double> mhat) {
  if (mhat.size() != state.lambda.size()) throw std::invalid_argument("mhat / multiplier size mismatch");
  for (std::size_t c = 0; c < mhat.size(); ++c) {
    state.lambda[c] = std::max(0.0, state.lambda[c] - state.eta[c] * mhat[c]);
  }
  ++state.iteration;
}

bool checkpoint_criteria(std::span<const double> mhat, std::span<const double> lambda_stddev,
                         double sigma_threshold, double window_mean, double best_window_mean) {
  const bool feasible = std::all_of(mhat.begin(), mhat.end(), [](double m) { return m >= 0.0; });
  const bool stable =
      std::all_of(lambda_stddev.begin(), lambda_stddev.end(), [&](double s) { return s < sigma_threshold; });
  return feasible && stable && window_mean > best_window_mean;
}

bool checkpoint_ok(DualState& state, std::span<const double> mhat) {
  if (!state.history_full()) return false;
  const double mean = state.window_mean_reward();
  const auto sigma = state.lambda_stddev();
  if (!checkpoint_criteria(mhat, sigma, state.sigma_threshold, mean, state.best_window_mean)) return false;
  state.best_window_mean = mean;
  return true;
}

}  // namespace cdrl
