#include "cdrl/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "cdrl/agents.hpp"

namespace cdrl {

namespace {

LifetimeCounts injected(const Network& net, const QueueState& state, std::span<const std::int64_t> route) {
  LifetimeCounts q = state.backlog;
  for (const Path& p : net.paths()) {
    const Commodity& c = net.commodities()[p.commodity];
    q.at(c.source, p.id, c.initial_lifetime) += route[p.id];
  }
  return q;
}

// Packets of one commodity at `node` per path, lifetime aggregated.
std::int64_t commodity_backlog(const Network& net, const LifetimeCounts& q, NodeId node, std::size_t c) {
  std::int64_t total = 0;
  for (std::size_t p : net.commodity_paths(c)) total += q.sum(node, p);
  return total;
}

// Sends up to `budget` packets from the given paths at `node`, lowest
// lifetime first, ties by the order of `paths`.  Returns the number sent.
std::int64_t send_lowest_first(const Network& net, const LifetimeCounts& q, NodeId node,
                               const std::vector<std::size_t>& paths, std::int64_t budget, NetAction& action) {
  std::int64_t sent = 0;
  for (int l = 1; l <= net.max_lifetime() && budget > 0; ++l) {
    for (std::size_t p : paths) {
      const std::int64_t n = std::min(budget, q.at(node, p, l) - action.send.at(node, p, l));
      if (n <= 0) continue;
      action.send.at(node, p, l) += n;
      budget -= n;
      sent += n;
      if (budget == 0) break;
    }
  }
  return sent;
}

}  // namespace

std::vector<std::int64_t> bp_route(const Network& net, const QueueState& state, const ArrivalBatch& arrivals) {
  std::vector<std::int64_t> route(net.path_count(), 0);
  for (std::size_t c = 0; c < net.commodity_count(); ++c) {
    const auto& ids = net.commodity_paths(c);
    std::vector<std::int64_t> score(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
      score[k] = commodity_backlog(net, state.backlog, net.paths()[ids[k]].nodes[1], c);
    }
    for (std::int64_t n = 0; n < arrivals.counts.at(c); ++n) {
      const auto k = static_cast<std::size_t>(std::min_element(score.begin(), score.end()) - score.begin());
      ++route[ids[k]];
      ++score[k];
    }
  }
  return route;
}

NetAction bp_step(const Network& net, const QueueState& state, const ArrivalBatch& arrivals) {
  NetAction action = NetAction::zeros(net);
  action.route = bp_route(net, state, arrivals);
  const LifetimeCounts q = injected(net, state, action.route);

  for (LinkId l = 0; l < net.link_count(); ++l) {
    const Link& link = net.graph().links()[l];
    std::int64_t best_weight = 0;
    std::size_t best = net.commodity_count();
    for (std::size_t c = 0; c < net.commodity_count(); ++c) {
      const bool to_dest = net.commodities()[c].destination == link.to;
      const std::int64_t w =
          commodity_backlog(net, q, link.from, c) - (to_dest ? 0 : commodity_backlog(net, q, link.to, c));
      if (w > best_weight) {
        best_weight = w;
        best = c;
      }
    }
    if (best == net.commodity_count()) continue;
    std::vector<std::size_t> eligible;
    for (std::size_t p : net.paths_on_link(l)) {
      if (net.paths()[p].commodity == best) eligible.push_back(p);
    }
    const std::int64_t sent = send_lowest_first(net, q, link.from, eligible, link.capacity(), action);
    action.blocks[l] = allocate_blocks(sent, link.block_capacity);
  }
  return action;
}

void VirtualQueues::drain(const Network& net) {
  for (LinkId l = 0; l < value.size(); ++l) {
    value[l] = std::max(0.0, value[l] - net.graph().links()[l].capacity());
  }
}

std::vector<std::int64_t> umw_route(const Network& net, const ArrivalBatch& arrivals, VirtualQueues& vq) {
  std::vector<std::int64_t> route(net.path_count(), 0);
  for (std::size_t c = 0; c < net.commodity_count(); ++c) {
    const auto& ids = net.commodity_paths(c);
    for (std::int64_t n = 0; n < arrivals.counts.at(c); ++n) {
      std::size_t best = ids.front();
      double best_cost = 0.0;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        double cost = 0.0;
        for (LinkId l : net.paths()[ids[k]].links) cost += vq.value[l];
        if (k == 0 || cost < best_cost) {
          best = ids[k];
          best_cost = cost;
        }
      }
      ++route[best];
      for (LinkId l : net.paths()[best].links) vq.value[l] += 1.0;
    }
  }
  return route;
}

NetAction umw_step(const Network& net, const QueueState& state, const ArrivalBatch& arrivals, VirtualQueues& vq) {
  NetAction action = NetAction::zeros(net);
  action.route = umw_route(net, arrivals, vq);
  const LifetimeCounts q = injected(net, state, action.route);

  for (LinkId l = 0; l < net.link_count(); ++l) {
    const Link& link = net.graph().links()[l];
    std::vector<std::size_t> order = net.paths_on_link(l);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return q.sum(link.from, a) > q.sum(link.from, b); });
    std::int64_t budget = link.capacity();
    std::int64_t sent = 0;
    for (std::size_t p : order) {
      const std::int64_t n = send_lowest_first(net, q, link.from, {p}, budget, action);
      budget -= n;
      sent += n;
    }
    action.blocks[l] = allocate_blocks(sent, link.block_capacity);
  }
  vq.drain(net);
  return action;
}

NetAction IdlePolicy::decide(const QueueState& state, const ArrivalBatch& arrivals) {
  NetAction action = NetAction::zeros(*net_);
  (void)state;
  for (std::size_t c = 0; c < net_->commodity_count(); ++c) {
    action.route[net_->commodity_paths(c).front()] = arrivals.counts.at(c);
  }
  return action;
}

}  // namespace cdrl
