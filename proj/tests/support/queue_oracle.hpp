#pragma once

// Packet-by-packet re-implementation of the slot dynamics, independent of
// LifetimeEnv::step, plus the commodity-level balance equation.

#include <vector>

#include "cdrl/lifetime_env.hpp"

namespace cdrl::testing {

struct OracleStep {
  LifetimeCounts next;
  std::vector<std::int64_t> delivered, expired, dropped;
};

inline OracleStep oracle_step(const Network& net, const LifetimeCounts& backlog, const NetAction& action) {
  struct Packet {
    NodeId node;
    std::size_t path;
    int life;
    char fate;  // 's'ent, 'd'ropped, 'h'eld
  };
  const std::size_t nc = net.commodity_count();
  const int lmax = net.max_lifetime();

  std::vector<Packet> packets;
  for (NodeId i = 0; i < net.node_count(); ++i) {
    for (std::size_t p = 0; p < net.path_count(); ++p) {
      for (int l = 0; l <= lmax; ++l) {
        for (std::int64_t k = 0; k < backlog.at(i, p, l); ++k) packets.push_back({i, p, l, 'h'});
      }
    }
  }
  for (std::size_t p = 0; p < net.path_count(); ++p) {
    const Commodity& c = net.commodities()[net.paths()[p].commodity];
    for (std::int64_t k = 0; k < action.route[p]; ++k) packets.push_back({c.source, p, c.initial_lifetime, 'h'});
  }

  LifetimeCounts to_drop = action.drop;
  LifetimeCounts to_send = action.send;
  for (Packet& pk : packets) {
    if (to_drop.at(pk.node, pk.path, pk.life) > 0) {
      --to_drop.at(pk.node, pk.path, pk.life);
      pk.fate = 'd';
    } else if (to_send.at(pk.node, pk.path, pk.life) > 0) {
      --to_send.at(pk.node, pk.path, pk.life);
      pk.fate = 's';
    }
  }

  OracleStep out{LifetimeCounts(net), std::vector<std::int64_t>(nc, 0), std::vector<std::int64_t>(nc, 0),
                 std::vector<std::int64_t>(nc, 0)};
  for (Packet pk : packets) {
    const Path& path = net.paths()[pk.path];
    const std::size_t c = path.commodity;
    if (pk.fate == 'd') {
      ++out.dropped[c];
      continue;
    }
    if (pk.fate == 's') {
      const auto at = std::find(path.nodes.begin(), path.nodes.end(), pk.node);
      pk.node = *(at + 1);
    }
    --pk.life;
    if (pk.life <= 0) {
      ++out.expired[c];
    } else if (pk.node == net.commodities()[c].destination) {
      ++out.delivered[c];
    } else {
      ++out.next.at(pk.node, pk.path, pk.life);
    }
  }
  return out;
}

/// Commodity-aggregated balance: next q_i^{(c,l)} = q_i^{(c,l+1)} - out - drop
/// + in, where q is the post-injection backlog and destinations hold nothing.
inline std::int64_t balance_rhs(const Network& net, const LifetimeCounts& injected, const NetAction& action,
                                NodeId i, std::size_t c, int l) {
  if (l == 0 || i == net.commodities()[c].destination || l + 1 > net.max_lifetime()) return 0;  // l = 0 is cleared
  std::int64_t v = 0;
  for (std::size_t p : net.commodity_paths(c)) {
    v += injected.at(i, p, l + 1) - action.send.at(i, p, l + 1) - action.drop.at(i, p, l + 1);
    for (LinkId in : net.graph().in_links(i)) {
      const NodeId j = net.graph().links()[in].from;
      if (net.paths()[p].uses_link(j, i)) v += action.send.at(j, p, l + 1);
    }
  }
  return v;
}

}  // namespace cdrl::testing
