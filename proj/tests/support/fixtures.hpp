#pragma once

#include <random>
#include <vector>

#include "cdrl/lifetime_env.hpp"
#include "cdrl/net_model.hpp"

namespace cdrl::testing {

inline Link make_link(NodeId from, NodeId to, int cb = 10, int xmax = 1, double cost = 1.0) {
  return Link{from, to, cb, xmax, cost};
}

/// s1, s2, e1, e2, core with the diamond links; commodities s1->core (L=6)
/// and s2->core (L=4).
inline Network edge_network(double rate1 = 6.0, double rate2 = 6.0) {
  NetworkGraph g({"s1", "s2", "e1", "e2", "core"},
                 {make_link(0, 2), make_link(0, 3), make_link(1, 2), make_link(1, 3), make_link(2, 4),
                  make_link(3, 4)});
  return Network(std::move(g), {Commodity{"c1", 0, 4, 6, 0.7, rate1}, Commodity{"c2", 1, 4, 4, 0.6, rate2}});
}

/// a -> b -> c with small capacities so that capacity constraints bind.
inline Network line3_network() {
  NetworkGraph g({"a", "b", "c"}, {make_link(0, 1, 3, 2, 1.0), make_link(1, 2, 2, 3, 0.5)});
  return Network(std::move(g), {Commodity{"ac", 0, 2, 3, 0.5, 3.0}, Commodity{"bc", 1, 2, 2, 0.5, 2.0}});
}

/// Uniformly random split of each commodity's arrivals over its paths.
inline std::vector<std::int64_t> random_route(const Network& net, const ArrivalBatch& arrivals, std::mt19937_64& rng) {
  std::vector<std::int64_t> route(net.path_count(), 0);
  for (std::size_t c = 0; c < net.commodity_count(); ++c) {
    const auto& ids = net.commodity_paths(c);
    std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
    for (std::int64_t k = 0; k < arrivals.counts[c]; ++k) ++route[ids[pick(rng)]];
  }
  return route;
}

/// Random action that satisfies availability and capacity for `state`.
inline NetAction random_feasible_action(const LifetimeEnv& env, const QueueState& state, const ArrivalBatch& arrivals,
                                        std::mt19937_64& rng) {
  const Network& net = env.network();
  NetAction a = NetAction::zeros(net);
  a.route = random_route(net, arrivals, rng);
  const LifetimeCounts q = env.inject(state, a.route);
  for (LinkId l = 0; l < net.link_count(); ++l) {
    const Link& link = net.graph().links()[l];
    a.blocks[l] = std::uniform_int_distribution<int>(0, link.max_blocks)(rng);
    std::int64_t room = static_cast<std::int64_t>(a.blocks[l]) * link.block_capacity;
    std::vector<std::size_t> paths = net.paths_on_link(l);
    std::shuffle(paths.begin(), paths.end(), rng);
    for (std::size_t p : paths) {
      for (int life = 1; life <= net.max_lifetime(); ++life) {
        const std::int64_t have = q.at(link.from, p, life);
        if (have == 0) continue;
        const std::int64_t drop = std::uniform_int_distribution<std::int64_t>(0, have)(rng) / 2;
        const std::int64_t send = std::min(room, std::uniform_int_distribution<std::int64_t>(0, have - drop)(rng));
        a.drop.at(link.from, p, life) = drop;
        a.send.at(link.from, p, life) = send;
        room -= send;
      }
    }
  }
  return a;
}

}  // namespace cdrl::testing
