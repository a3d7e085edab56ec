#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdrl/agents.hpp"
#include "cdrl/lagrangian.hpp"
#include "cdrl/net_model.hpp"

namespace cdrl {

struct PhaseLengths {
  std::size_t train = 3000;  // episodes
  std::size_t improve = 1000;
  std::size_t test = 200;
};

struct ExplorationConfig {
  double decay = 0.99;
  double floor = 0.01;
};

struct ExperimentConfig {
  NetworkGraph graph;
  std::vector<Commodity> commodities;
  int episode_length = 20;
  PhaseLengths phases;
  std::size_t episodes_per_iteration = 10;  // V
  double gamma = 0.97;
  ExplorationConfig exploration;
  DualConfig dual;
  std::size_t checkpoint_every = 100;  // iterations between checkpoint tests
  AgentConfig agent;
  std::uint64_t seed = 1;
  std::string output_dir = "runs/edge";
  std::string policy = "cdrl";

  /// Validated network; throws InvalidNetwork.
  Network build_network() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Built-in edge topology with the desk-scale schedule.
ExperimentConfig default_config();

/// Parses YAML text.  Missing keys keep their defaults, unknown keys are
/// errors.  `origin` prefixes error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every violated constraint; empty when valid.
std::vector<std::string> validate_config(const ExperimentConfig& config);

/// 20000 / 10000 / 2000 episodes.
void apply_paper_scale(ExperimentConfig& config);

/// Canonical YAML rendering; parse_config(dump_config(c)) == c.
std::string dump_config(const ExperimentConfig& config);
/// FNV-1a of dump_config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace cdrl
