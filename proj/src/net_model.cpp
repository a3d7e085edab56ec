#include "cdrl/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace cdrl {

NetworkGraph::NetworkGraph(std::vector<std::string> nodes, std::vector<Link> links)
    : nodes_(std::move(nodes)), links_(std::move(links)), out_(nodes_.size()), in_(nodes_.size()) {
  for (LinkId l = 0; l < links_.size(); ++l) {
    const Link& link = links_[l];
    if (link.from < nodes_.size()) out_[link.from].push_back(l);
    if (link.to < nodes_.size()) in_[link.to].push_back(l);
  }
}

std::optional<NodeId> NetworkGraph::find_node(std::string_view name) const {
  const auto it = std::find(nodes_.begin(), nodes_.end(), name);
  if (it == nodes_.end()) return std::nullopt;
  return static_cast<NodeId>(it - nodes_.begin());
}

std::optional<LinkId> NetworkGraph::find_link(NodeId from, NodeId to) const {
  if (from >= out_.size()) return std::nullopt;
  for (LinkId l : out_[from]) {
    if (links_[l].to == to) return l;
  }
  return std::nullopt;
}

bool Path::visits(NodeId node) const {
  return std::find(nodes.begin(), nodes.end(), node) != nodes.end();
}

std::optional<LinkId> Path::outgoing_link(NodeId node) const {
  for (std::size_t k = 0; k < links.size(); ++k) {
    if (nodes[k] == node) return links[k];
  }
  return std::nullopt;
}

bool Path::uses_link(NodeId from, NodeId to) const {
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    if (nodes[k] == from && nodes[k + 1] == to) return true;
  }
  return false;
}

std::vector<std::string> validate_graph(const NetworkGraph& graph) {
  std::vector<std::string> errors;
  const auto& nodes = graph.nodes();
  std::set<std::string> names;
  for (const auto& name : nodes) {
    if (name.empty()) errors.push_back("empty node name");
    if (!names.insert(name).second) errors.push_back("duplicate node '" + name + "'");
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  for (LinkId l = 0; l < graph.link_count(); ++l) {
    const Link& link = graph.links()[l];
    std::ostringstream where;
    where << "link #" << l;
    bool endpoints_ok = true;
    if (link.from >= nodes.size()) {
      errors.push_back(where.str() + ": unknown node (from=" + std::to_string(link.from) + ")");
      endpoints_ok = false;
    }
    if (link.to >= nodes.size()) {
      errors.push_back(where.str() + ": unknown node (to=" + std::to_string(link.to) + ")");
      endpoints_ok = false;
    }
    if (endpoints_ok) {
      where.str("");
      where << "link " << nodes[link.from] << "->" << nodes[link.to];
    }
    if (link.from == link.to) errors.push_back(where.str() + ": self-loop");
    if (!seen.insert({link.from, link.to}).second) errors.push_back(where.str() + ": duplicate link");
    if (link.block_capacity < 1) errors.push_back(where.str() + ": block capacity must be positive");
    if (link.max_blocks < 0) errors.push_back(where.str() + ": max blocks must be non-negative");
    if (!(link.block_cost >= 0.0) || !std::isfinite(link.block_cost)) {
      errors.push_back(where.str() + ": block cost must be a non-negative finite number");
    }
  }
  return errors;
}

namespace {

// A packet needs at least one remaining lifetime unit when it reaches the
// destination, and every hop costs one unit, so at most L - 1 hops.
std::size_t max_hops(const Commodity& c) {
  return c.initial_lifetime > 1 ? static_cast<std::size_t>(c.initial_lifetime - 1) : 0;
}

void extend(const NetworkGraph& graph, NodeId destination, std::size_t hop_limit,
            std::vector<NodeId>& prefix, std::vector<LinkId>& links, std::vector<char>& on_path,
            std::vector<Path>& out) {
  const NodeId here = prefix.back();
  if (here == destination) {
    out.push_back(Path{prefix, links, 0, 0, 0});
    return;
  }
  if (links.size() == hop_limit) return;
  for (LinkId l : graph.out_links(here)) {
    const NodeId next = graph.links()[l].to;
    if (on_path[next]) continue;
    on_path[next] = 1;
    prefix.push_back(next);
    links.push_back(l);
    extend(graph, destination, hop_limit, prefix, links, on_path, out);
    links.pop_back();
    prefix.pop_back();
    on_path[next] = 0;
  }
}

}  // namespace

std::vector<Path> enumerate_paths(const NetworkGraph& graph, const Commodity& commodity) {
  std::vector<Path> paths;
  const std::size_t n = graph.node_count();
  if (commodity.source >= n || commodity.destination >= n || commodity.source == commodity.destination) {
    return paths;
  }
  std::vector<NodeId> prefix{commodity.source};
  std::vector<LinkId> links;
  std::vector<char> on_path(n, 0);
  on_path[commodity.source] = 1;
  extend(graph, commodity.destination, max_hops(commodity), prefix, links, on_path, paths);
  std::sort(paths.begin(), paths.end(),
            [](const Path& a, const Path& b) { return a.nodes < b.nodes; });
  return paths;
}

std::vector<Path> paths_through_link(std::span<const Path> paths, NodeId from, NodeId to) {
  std::vector<Path> out;
  for (const Path& p : paths) {
    if (p.uses_link(from, to)) out.push_back(p);
  }
  return out;
}

Network::Network(NetworkGraph graph, std::vector<Commodity> commodities)
    : graph_(std::move(graph)), commodities_(std::move(commodities)) {
  std::vector<std::string> errors = validate_graph(graph_);
  const std::size_t n = graph_.node_count();
  for (std::size_t c = 0; c < commodities_.size(); ++c) {
    const Commodity& com = commodities_[c];
    const std::string tag = "commodity '" + com.name + "'";
    if (com.source >= n) errors.push_back(tag + ": unknown source node");
    if (com.destination >= n) errors.push_back(tag + ": unknown destination node");
    if (com.source == com.destination) errors.push_back(tag + ": source equals destination");
    if (com.initial_lifetime < 1) errors.push_back(tag + ": initial lifetime must be >= 1");
    if (!(com.reliability >= 0.0 && com.reliability <= 1.0)) {
      errors.push_back(tag + ": reliability must lie in [0, 1]");
    }
    if (!(com.mean_rate >= 0.0) || !std::isfinite(com.mean_rate)) {
      errors.push_back(tag + ": mean rate must be a non-negative finite number");
    }
  }
  if (!errors.empty()) {
    std::string msg = "invalid network:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw InvalidNetwork(msg);
  }

  by_commodity_.resize(commodities_.size());
  for (std::size_t c = 0; c < commodities_.size(); ++c) {
    max_lifetime_ = std::max(max_lifetime_, commodities_[c].initial_lifetime);
    auto found = enumerate_paths(graph_, commodities_[c]);
    if (found.empty()) {
      throw InvalidNetwork("commodity '" + commodities_[c].name + "' has no feasible path from " +
                           graph_.node_name(commodities_[c].source) + " to " +
                           graph_.node_name(commodities_[c].destination));
    }
    for (std::size_t k = 0; k < found.size(); ++k) {
      Path p = std::move(found[k]);
      p.commodity = c;
      p.local_id = k;
      p.id = paths_.size();
      by_commodity_[c].push_back(p.id);
      paths_.push_back(std::move(p));
    }
  }

  held_at_.resize(n);
  on_link_.resize(graph_.link_count());
  for (const Path& p : paths_) {
    for (std::size_t k = 0; k < p.links.size(); ++k) {
      held_at_[p.nodes[k]].push_back(p.id);
      on_link_[p.links[k]].push_back(p.id);
    }
  }
  for (const Link& link : graph_.links()) max_cost_ += link.max_blocks * link.block_cost;
}

}  // namespace cdrl
