#include "cdrl/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cdrl/rng.hpp"

namespace cdrl {

Network ExperimentConfig::build_network() const { return Network(graph, commodities); }

ExperimentConfig default_config() {
  ExperimentConfig c;
  auto link = [](NodeId from, NodeId to) { return Link{from, to, 10, 1, 1.0}; };
  c.graph = NetworkGraph({"s1", "s2", "e1", "e2", "core"},
                         {link(0, 2), link(0, 3), link(1, 2), link(1, 3), link(2, 4), link(3, 4)});
  c.commodities = {Commodity{"c1", 0, 4, 6, 0.7, 6.0}, Commodity{"c2", 1, 4, 4, 0.6, 6.0}};
  return c;
}

void apply_paper_scale(ExperimentConfig& config) { config.phases = PhaseLengths{20000, 10000, 2000}; }

namespace {

std::string where(const std::string& origin, const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  if (m.line < 0) return origin;
  return origin + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& origin,
                const std::string& section) {
  if (!map.IsMap()) throw ConfigError(where(origin, map) + ": " + section + " must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigError(where(origin, kv.first) + ": unknown key '" + key + "' in " + section);
    }
  }
}

template <typename T>
void read(const YAML::Node& map, const char* key, T& out, const std::string& origin) {
  const YAML::Node v = map[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where(origin, v) + ": bad value for '" + key + "'");
  }
}

// Sizes are read as signed so that negative values reach validation instead of wrapping.
void read_count(const YAML::Node& map, const char* key, std::size_t& out, const std::string& origin) {
  long long v = static_cast<long long>(out);
  read(map, key, v, origin);
  if (v < 0) throw ConfigError(where(origin, map[key]) + ": '" + key + "' must not be negative");
  out = static_cast<std::size_t>(v);
}

NodeId node_ref(const std::vector<std::string>& nodes, const YAML::Node& v, const std::string& origin) {
  const auto name = v.as<std::string>();
  for (NodeId i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == name) return i;
  }
  throw ConfigError(where(origin, v) + ": unknown node '" + name + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": " + e.msg);
  }
  ExperimentConfig cfg = default_config();
  if (!root || root.IsNull()) return cfg;
  check_keys(root,
             {"topology", "commodities", "episode_length", "phases", "episodes_per_iteration", "gamma",
              "exploration", "dual", "agent", "seed", "output_dir", "policy"},
             origin, "config");

  if (const auto topo = root["topology"]) {
    check_keys(topo, {"nodes", "links"}, origin, "topology");
    std::vector<std::string> nodes;
    if (!topo["nodes"] || !topo["nodes"].IsSequence()) {
      throw ConfigError(where(origin, topo) + ": topology needs a 'nodes' list");
    }
    for (const auto& n : topo["nodes"]) nodes.push_back(n.as<std::string>());
    std::vector<Link> links;
    if (topo["links"]) {
      for (const auto& l : topo["links"]) {
        check_keys(l, {"from", "to", "block_capacity", "max_blocks", "block_cost"}, origin, "link");
        if (!l["from"] || !l["to"]) throw ConfigError(where(origin, l) + ": link needs 'from' and 'to'");
        Link link{node_ref(nodes, l["from"], origin), node_ref(nodes, l["to"], origin), 10, 1, 1.0};
        read(l, "block_capacity", link.block_capacity, origin);
        read(l, "max_blocks", link.max_blocks, origin);
        read(l, "block_cost", link.block_cost, origin);
        links.push_back(link);
      }
    }
    cfg.graph = NetworkGraph(std::move(nodes), std::move(links));
    if (!root["commodities"]) cfg.commodities.clear();
  }
  if (const auto list = root["commodities"]) {
    if (!list.IsSequence()) throw ConfigError(where(origin, list) + ": commodities must be a list");
    cfg.commodities.clear();
    for (const auto& c : list) {
      check_keys(c, {"name", "source", "destination", "lifetime", "reliability", "rate"}, origin, "commodity");
      for (const char* required : {"source", "destination", "lifetime", "reliability", "rate"}) {
        if (!c[required]) throw ConfigError(where(origin, c) + ": commodity is missing '" + required + "'");
      }
      Commodity com;
      com.name = "c" + std::to_string(cfg.commodities.size() + 1);
      read(c, "name", com.name, origin);
      com.source = node_ref(cfg.graph.nodes(), c["source"], origin);
      com.destination = node_ref(cfg.graph.nodes(), c["destination"], origin);
      read(c, "lifetime", com.initial_lifetime, origin);
      read(c, "reliability", com.reliability, origin);
      read(c, "rate", com.mean_rate, origin);
      cfg.commodities.push_back(com);
    }
  }

  read(root, "episode_length", cfg.episode_length, origin);
  if (const auto p = root["phases"]) {
    check_keys(p, {"train", "improve", "test"}, origin, "phases");
    read_count(p, "train", cfg.phases.train, origin);
    read_count(p, "improve", cfg.phases.improve, origin);
    read_count(p, "test", cfg.phases.test, origin);
  }
  read_count(root, "episodes_per_iteration", cfg.episodes_per_iteration, origin);
  read(root, "gamma", cfg.gamma, origin);
  if (const auto e = root["exploration"]) {
    check_keys(e, {"decay", "floor"}, origin, "exploration");
    read(e, "decay", cfg.exploration.decay, origin);
    read(e, "floor", cfg.exploration.floor, origin);
  }
  if (const auto d = root["dual"]) {
    check_keys(d, {"learning_rate", "lambda0_scale", "window", "sigma_threshold", "checkpoint_every"}, origin,
               "dual");
    read(d, "learning_rate", cfg.dual.learning_rate, origin);
    read(d, "lambda0_scale", cfg.dual.lambda0_scale, origin);
    read_count(d, "window", cfg.dual.window, origin);
    read(d, "sigma_threshold", cfg.dual.sigma_threshold, origin);
    cfg.checkpoint_every = cfg.dual.window;
    read_count(d, "checkpoint_every", cfg.checkpoint_every, origin);
  }
  if (const auto a = root["agent"]) {
    check_keys(a,
               {"hidden", "actor_learning_rate", "critic_learning_rate", "soft_update", "batch_size",
                "buffer_capacity", "updates_per_iteration", "input_scale"},
               origin, "agent");
    read(a, "hidden", cfg.agent.hidden, origin);
    read(a, "actor_learning_rate", cfg.agent.actor_adam.learning_rate, origin);
    read(a, "critic_learning_rate", cfg.agent.critic_adam.learning_rate, origin);
    read(a, "soft_update", cfg.agent.soft_update, origin);
    read_count(a, "batch_size", cfg.agent.batch_size, origin);
    read_count(a, "buffer_capacity", cfg.agent.buffer_capacity, origin);
    read_count(a, "updates_per_iteration", cfg.agent.updates_per_iteration, origin);
    read(a, "input_scale", cfg.agent.input_scale, origin);
  }
  cfg.agent.gamma = cfg.gamma;
  read(root, "seed", cfg.seed, origin);
  read(root, "output_dir", cfg.output_dir, origin);
  read(root, "policy", cfg.policy, origin);

  const auto errors = validate_config(cfg);
  if (!errors.empty()) {
    std::string msg = origin + ": invalid config";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> errors = validate_graph(c.graph);
  if (c.commodities.empty()) errors.push_back("at least one commodity is required");
  for (const Commodity& com : c.commodities) {
    const std::string tag = "commodity '" + com.name + "': ";
    if (com.source >= c.graph.node_count() || com.destination >= c.graph.node_count()) {
      errors.push_back(tag + "unknown node");
      continue;
    }
    if (com.source == com.destination) errors.push_back(tag + "source equals destination");
    if (com.initial_lifetime < 1) errors.push_back(tag + "lifetime must be at least 1");
    if (com.reliability < 0.0 || com.reliability > 1.0) errors.push_back(tag + "reliability must be in [0, 1]");
    if (com.mean_rate < 0.0) errors.push_back(tag + "rate must not be negative");
    if (errors.empty() && enumerate_paths(c.graph, com).empty()) {
      errors.push_back(tag + "no feasible path within its lifetime");
    }
  }
  if (c.episode_length <= 0) errors.push_back("episode_length must be positive");
  if (c.episodes_per_iteration == 0) {
    errors.push_back("episodes_per_iteration must be positive");
  } else {
    if (c.phases.train % c.episodes_per_iteration != 0) {
      errors.push_back("phases.train must be a multiple of episodes_per_iteration");
    }
    if (c.phases.improve % c.episodes_per_iteration != 0) {
      errors.push_back("phases.improve must be a multiple of episodes_per_iteration");
    }
  }
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) errors.push_back("gamma must be in [0, 1]");
  if (!(c.exploration.decay > 0.0 && c.exploration.decay <= 1.0)) errors.push_back("exploration.decay must be in (0, 1]");
  if (!(c.exploration.floor >= 0.0 && c.exploration.floor <= 1.0)) errors.push_back("exploration.floor must be in [0, 1]");
  if (c.dual.learning_rate < 0.0) errors.push_back("dual.learning_rate must not be negative");
  if (c.dual.lambda0_scale < 0.0) errors.push_back("dual.lambda0_scale must not be negative");
  if (c.dual.window == 0) errors.push_back("dual.window must be positive");
  if (c.checkpoint_every == 0) errors.push_back("dual.checkpoint_every must be positive");
  if (c.agent.hidden.empty()) errors.push_back("agent.hidden needs at least one layer");
  for (int h : c.agent.hidden) {
    if (h <= 0) errors.push_back("agent.hidden sizes must be positive");
  }
  if (c.agent.batch_size == 0) errors.push_back("agent.batch_size must be positive");
  if (c.agent.buffer_capacity < c.agent.batch_size) errors.push_back("agent.buffer_capacity must hold a batch");
  if (!(c.agent.soft_update >= 0.0 && c.agent.soft_update <= 1.0)) errors.push_back("agent.soft_update must be in [0, 1]");
  if (c.agent.input_scale <= 0.0) errors.push_back("agent.input_scale must be positive");
  if (c.policy != "cdrl" && c.policy != "bp" && c.policy != "umw") errors.push_back("policy must be cdrl, bp or umw");
  return errors;
}

std::string dump_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "topology" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "nodes" << YAML::Value << YAML::Flow << c.graph.nodes();
  out << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
  for (const Link& l : c.graph.links()) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "from" << YAML::Value << c.graph.node_name(l.from)
        << YAML::Key << "to" << YAML::Value << c.graph.node_name(l.to) << YAML::Key << "block_capacity"
        << YAML::Value << l.block_capacity << YAML::Key << "max_blocks" << YAML::Value << l.max_blocks
        << YAML::Key << "block_cost" << YAML::Value << l.block_cost << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  out << YAML::Key << "commodities" << YAML::Value << YAML::BeginSeq;
  for (const Commodity& com : c.commodities) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << com.name << YAML::Key << "source"
        << YAML::Value << c.graph.node_name(com.source) << YAML::Key << "destination" << YAML::Value
        << c.graph.node_name(com.destination) << YAML::Key << "lifetime" << YAML::Value << com.initial_lifetime
        << YAML::Key << "reliability" << YAML::Value << com.reliability << YAML::Key << "rate" << YAML::Value
        << com.mean_rate << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "episode_length" << YAML::Value << c.episode_length;
  out << YAML::Key << "phases" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "train" << YAML::Value
      << c.phases.train << YAML::Key << "improve" << YAML::Value << c.phases.improve << YAML::Key << "test"
      << YAML::Value << c.phases.test << YAML::EndMap;
  out << YAML::Key << "episodes_per_iteration" << YAML::Value << c.episodes_per_iteration;
  out << YAML::Key << "gamma" << YAML::Value << c.gamma;
  out << YAML::Key << "exploration" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "decay"
      << YAML::Value << c.exploration.decay << YAML::Key << "floor" << YAML::Value << c.exploration.floor
      << YAML::EndMap;
  out << YAML::Key << "dual" << YAML::Value << YAML::BeginMap << YAML::Key << "learning_rate" << YAML::Value
      << c.dual.learning_rate << YAML::Key << "lambda0_scale" << YAML::Value << c.dual.lambda0_scale << YAML::Key
      << "window" << YAML::Value << c.dual.window << YAML::Key << "sigma_threshold" << YAML::Value
      << c.dual.sigma_threshold << YAML::Key << "checkpoint_every" << YAML::Value << c.checkpoint_every
      << YAML::EndMap;
  out << YAML::Key << "agent" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "hidden" << YAML::Value << YAML::Flow << c.agent.hidden;
  out << YAML::Key << "actor_learning_rate" << YAML::Value << c.agent.actor_adam.learning_rate;
  out << YAML::Key << "critic_learning_rate" << YAML::Value << c.agent.critic_adam.learning_rate;
  out << YAML::Key << "soft_update" << YAML::Value << c.agent.soft_update;
  out << YAML::Key << "batch_size" << YAML::Value << c.agent.batch_size;
  out << YAML::Key << "buffer_capacity" << YAML::Value << c.agent.buffer_capacity;
  out << YAML::Key << "updates_per_iteration" << YAML::Value << c.agent.updates_per_iteration;
  out << YAML::Key << "input_scale" << YAML::Value << c.agent.input_scale;
  out << YAML::EndMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
  out << YAML::Key << "policy" << YAML::Value << c.policy;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(dump_config(config))));
  return buf;
}

}  // namespace cdrl
