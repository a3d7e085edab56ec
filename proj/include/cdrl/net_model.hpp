#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cdrl {

using NodeId = std::size_t;
using LinkId = std::size_t;

struct Link {
  NodeId from = 0;
  NodeId to = 0;
  int block_capacity = 1;  // packets per slot carried by one block
  int max_blocks = 0;
  double block_cost = 0.0;  // cost per block per slot

  int capacity() const { return block_capacity * max_blocks; }
};

/// Directed graph with per-link resource-block parameters.
///
/// Construction does not validate; call validate_graph() (or build a Network,
/// which does) before relying on the invariants.
class NetworkGraph {
 public:
  NetworkGraph() = default;
  NetworkGraph(std::vector<std::string> nodes, std::vector<Link> links);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }

  std::optional<NodeId> find_node(std::string_view name) const;
  std::optional<LinkId> find_link(NodeId from, NodeId to) const;
  const std::string& node_name(NodeId id) const { return nodes_.at(id); }

  // Outgoing / incoming link ids of a node.
  const std::vector<LinkId>& out_links(NodeId node) const { return out_.at(node); }
  const std::vector<LinkId>& in_links(NodeId node) const { return in_.at(node); }

 private:
  std::vector<std::string> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_;
  std::vector<std::vector<LinkId>> in_;
};

struct Commodity {
  std::string name;
  NodeId source = 0;
  NodeId destination = 0;
  int initial_lifetime = 1;
  double reliability = 0.0;  // target ratio of timely throughput to mean rate
  double mean_rate = 0.0;    // packets per slot
};

struct Path {
  std::vector<NodeId> nodes;
  std::vector<LinkId> links;  // links[k] joins nodes[k] -> nodes[k + 1]
  std::size_t commodity = 0;
  std::size_t id = 0;        // global id within a Network
  std::size_t local_id = 0;  // index within its commodity's path set

  std::size_t hops() const { return links.size(); }
  bool visits(NodeId node) const;
  // Link used to leave `node`, if the path continues past it.
  std::optional<LinkId> outgoing_link(NodeId node) const;
  bool uses_link(NodeId from, NodeId to) const;
};

/// All invariant violations of the graph; empty means valid.
std::vector<std::string> validate_graph(const NetworkGraph& graph);

/// Simple source-to-destination paths that can still deliver a packet on
/// time, in lexicographic order of their node sequences.  Ids are left at 0;
/// Network assigns them.
std::vector<Path> enumerate_paths(const NetworkGraph& graph, const Commodity& commodity);

std::vector<Path> paths_through_link(std::span<const Path> paths, NodeId from, NodeId to);

class InvalidNetwork : public std::runtime_error {
 public:
  explicit InvalidNetwork(const std::string& what) : std::runtime_error(what) {}
};

/// Graph, commodities and their feasible paths, assembled once and shared
/// read-only by the environment, agents and baselines.
class Network {
 public:
  /// Throws InvalidNetwork on graph or commodity violations, or when a
  /// commodity has no feasible path.
  Network(NetworkGraph graph, std::vector<Commodity> commodities);

  const NetworkGraph& graph() const { return graph_; }
  const std::vector<Commodity>& commodities() const { return commodities_; }
  const std::vector<Path>& paths() const { return paths_; }
  // Global path ids of commodity c, in local-id order.
  const std::vector<std::size_t>& commodity_paths(std::size_t c) const { return by_commodity_.at(c); }

  std::size_t node_count() const { return graph_.node_count(); }
  std::size_t link_count() const { return graph_.link_count(); }
  std::size_t path_count() const { return paths_.size(); }
  std::size_t commodity_count() const { return commodities_.size(); }
  int max_lifetime() const { return max_lifetime_; }

  // Sum over links of max_blocks * block_cost; the cost normalizer.
  double max_cost() const { return max_cost_; }

  // Global ids of paths on which packets can be held at `node` (paths that
  // visit it before their destination).
  const std::vector<std::size_t>& paths_held_at(NodeId node) const { return held_at_.at(node); }
  // Global ids of paths that use link `link`.
  const std::vector<std::size_t>& paths_on_link(LinkId link) const { return on_link_.at(link); }

 private:
  NetworkGraph graph_;
  std::vector<Commodity> commodities_;
  std::vector<Path> paths_;
  std::vector<std::vector<std::size_t>> by_commodity_;
  std::vector<std::vector<std::size_t>> held_at_;
  std::vector<std::vector<std::size_t>> on_link_;
  int max_lifetime_ = 1;
  double max_cost_ = 0.0;
};

}  // namespace cdrl
