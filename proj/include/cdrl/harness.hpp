#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "cdrl/agents.hpp"
#include "cdrl/baselines.hpp"
#include "cdrl/config.hpp"
#include "cdrl/lagrangian.hpp"

namespace cdrl {

inline constexpr const char* kToolVersion = "1.0.0";

struct EpisodeStats {
  std::size_t episode = 0;  // running index within the output file
  std::string phase;        // train | improve | test
  std::size_t iteration = 0;
  double epsilon = 0.0;
  std::vector<std::int64_t> arrivals, delivered, expired, dropped;  // per commodity
  double cost = 0.0;    // sum of m0 over the episode
  double reward = 0.0;  // sum of shaped rewards over the episode
  std::vector<double> lambda;
  std::vector<double> mhat;  // set on the last episode of an iteration only
  bool checkpoint = false;   // a checkpoint was saved after this iteration

  /// delivered / arrivals per commodity; 1 when nothing arrived.
  std::vector<double> reliability() const;
};

/// Streams metrics.csv rows; the header depends only on the commodity names.
class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& file, const std::vector<Commodity>& commodities);
  static std::string header(const std::vector<Commodity>& commodities);
  static std::string row(const EpisodeStats& e);
  void write(const EpisodeStats& e);

 private:
  std::ofstream out_;
};

struct PolicySummary {
  std::string policy;
  double rate = 0.0;  // mean arrival rate of the first commodity
  std::uint64_t seed = 0;
  std::size_t episodes = 0;
  std::vector<double> reliability;  // pooled delivered / arrivals per commodity
  std::vector<double> target;
  double mean_cost = 0.0;  // per episode
  double mean_reward = 0.0;
  std::string model;  // best | final | "" for baselines
};

std::string summary_header(const std::vector<Commodity>& commodities);
std::string summary_row(const PolicySummary& s);
void write_summary(const std::filesystem::path& file, const std::vector<Commodity>& commodities,
                   const std::vector<PolicySummary>& rows);

struct RunOptions {
  std::ostream* log = nullptr;  // progress lines when set
  std::size_t log_every = 10;   // iterations
};

struct TrainingResult {
  PolicySummary test;
  bool used_checkpoint = false;  // false: no checkpoint passed, final model evaluated
  std::size_t checkpoints_saved = 0;
  std::filesystem::path model_dir;
  DualState dual;
};

/// Greedy (epsilon = 0) wrapper around trained agents.
class CdrlPolicy : public Policy {
 public:
  explicit CdrlPolicy(const CdrlAgents& agents) : agents_(&agents), rng_(0) {}
  std::string name() const override { return "cdrl"; }
  NetAction decide(const QueueState& state, const ArrivalBatch& arrivals) override {
    return agents_->act(state, arrivals, 0.0, rng_).action;
  }

 private:
  const CdrlAgents* agents_;
  Rng rng_;
};

/// Seed of episode `index`'s arrival stream during testing; shared by every policy.
std::uint64_t test_arrival_seed(std::uint64_t master, std::size_t index);

/// Runs config.phases.test episodes of `policy` on the shared test arrivals.
PolicySummary evaluate_policy(const ExperimentConfig& config, const Network& net, Policy& policy,
                              const std::vector<double>& lambda, std::vector<EpisodeStats>* rows = nullptr);

/// Train and improve phases, then the test phase on the best (or final) model.
/// Writes metrics.csv, summary.csv, config.yaml, manifest.json and
/// checkpoints/{best,final} under config.output_dir.
TrainingResult run_training(const ExperimentConfig& config, const RunOptions& options = {});

/// Test phase of a saved model; throws nn::CheckpointError on load or shape errors.
PolicySummary run_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint,
                       const RunOptions& options = {});

/// Test phase of bp or umw.
PolicySummary run_baseline(const ExperimentConfig& config, const std::string& policy, const RunOptions& options = {});

/// Every (rate, policy) pair with all commodity rates set to `rate`; one
/// summary row each, written to <output_dir>/summary.csv.
std::vector<PolicySummary> run_sweep(const ExperimentConfig& config, const std::vector<double>& rates,
                                     const std::vector<std::string>& policies, const RunOptions& options = {});

}  // namespace cdrl
