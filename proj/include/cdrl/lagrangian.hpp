#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "cdrl/net_model.hpp"

namespace cdrl {

struct DualConfig {
  double learning_rate = 0.005;  // eta, shared by every commodity
  double lambda0_scale = 1.25;   // lambda0 = scale * sqrt(mean_rate * reliability)
  std::size_t window = 100;      // K
  double sigma_threshold = 0.05;
};

/// Lagrange multipliers plus the statistics the checkpoint test needs.
struct DualState {
  std::vector<double> lambda;
  std::vector<double> eta;
  std::size_t iteration = 0;
  std::size_t window = 100;
  double sigma_threshold = 0.05;
  std::deque<std::vector<double>> lambda_history;  // most recent last, at most `window`
  std::deque<double> reward_window;                // per-iteration mean episode reward
  double best_window_mean = -std::numeric_limits<double>::infinity();

  /// Appends this iteration's multipliers and mean reward to the windows.
  void record(double iteration_reward);
  bool history_full() const { return lambda_history.size() >= window && reward_window.size() >= window; }
  /// Population standard deviation of each multiplier over the history.
  std::vector<double> lambda_stddev() const;
  double window_mean_reward() const;
};

DualState init_lambda(const std::vector<Commodity>& commodities, const DualConfig& config);

/// r = -m0_norm + sum_c lambda_c * m_c
double shaped_reward(double cost_normalized, std::span<const double> throughput, std::span<const double> lambda);

/// Mean over episodes of sum_t gamma^t m_c(t).  episodes[e][t][c].
std::vector<double> estimate_mhat(const std::vector<std::vector<std::vector<double>>>& episodes, double gamma);

/// lambda_c <- max(0, lambda_c - eta_c * mhat_c); advances the iteration counter.
void dual_update(DualState& state, std::span<const double> mhat);

/// Pure form of the three checkpoint clauses.
bool checkpoint_criteria(std::span<const double> mhat, std::span<const double> lambda_stddev,
                         double sigma_threshold, double window_mean, double best_window_mean);

/// Evaluates the checkpoint clauses against the recorded history; false until
/// `window` iterations are recorded.  On success the best window mean is
/// raised to the current one.
bool checkpoint_ok(DualState& state, std::span<const double> mhat);

}  // namespace cdrl
