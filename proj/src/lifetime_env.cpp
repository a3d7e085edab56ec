#include "cdrl/lifetime_env.hpp"

#include <numeric>
#include <sstream>

namespace cdrl {

std::int64_t LifetimeCounts::sum(NodeId node, std::size_t path) const {
  const auto c = cell(node, path);
  return std::accumulate(c.begin(), c.end(), std::int64_t{0});
}

std::int64_t LifetimeCounts::total() const {
  return std::accumulate(data_.begin(), data_.end(), std::int64_t{0});
}

NetAction NetAction::zeros(const Network& net) {
  NetAction a;
  a.route.assign(net.path_count(), 0);
  a.send = LifetimeCounts(net);
  a.drop = LifetimeCounts(net);
  a.blocks.assign(net.link_count(), 0);
  return a;
}

namespace {

std::int64_t sum_of(const std::vector<std::int64_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::int64_t{0});
}

}  // namespace

std::int64_t StepOutcome::total_expired() const { return sum_of(expired); }
std::int64_t StepOutcome::total_dropped() const { return sum_of(dropped); }
std::int64_t StepOutcome::total_delivered() const { return sum_of(delivered); }

LifetimeEnv::LifetimeEnv(const Network& net) : net_(&net), rng_(0) {}

QueueState LifetimeEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  return QueueState{LifetimeCounts(*net_), 0};
}

ArrivalBatch LifetimeEnv::sample_arrivals() {
  ArrivalBatch batch;
  batch.counts.reserve(net_->commodity_count());
  for (const Commodity& c : net_->commodities()) {
    if (c.mean_rate > 0.0) {
      std::poisson_distribution<std::int64_t> draw(c.mean_rate);
      batch.counts.push_back(draw(rng_));
    } else {
      batch.counts.push_back(0);
    }
  }
  return batch;
}

LifetimeCounts LifetimeEnv::inject(const QueueState& state, std::span<const std::int64_t> route) const {
  LifetimeCounts q = state.backlog;
  for (const Path& p : net_->paths()) {
    const Commodity& c = net_->commodities()[p.commodity];
    q.at(c.source, p.id, c.initial_lifetime) += route[p.id];
  }
  return q;
}

void LifetimeEnv::validate(const QueueState& state, const NetAction& action,
                           const ArrivalBatch& arrivals) const {
  const Network& net = *net_;
  const int lmax = net.max_lifetime();
  auto fail = [](const std::string& msg) { throw InfeasibleAction(msg); };

  if (arrivals.counts.size() != net.commodity_count()) fail("arrival batch has wrong commodity count");
  if (action.route.size() != net.path_count()) fail("route vector has wrong path count");
  if (action.blocks.size() != net.link_count()) fail("block vector has wrong link count");
  const LifetimeCounts shape(net);
  auto same_shape = [&](const LifetimeCounts& a) {
    return a.nodes() == shape.nodes() && a.paths() == shape.paths() && a.max_lifetime() == shape.max_lifetime();
  };
  if (!same_shape(action.send) || !same_shape(action.drop) || !same_shape(state.backlog)) {
    fail("send/drop/backlog arrays do not match the network shape");
  }

  std::vector<std::int64_t> routed(net.commodity_count(), 0);
  for (std::size_t p = 0; p < net.path_count(); ++p) {
    if (action.route[p] < 0) fail("negative route count on path " + std::to_string(p));
    routed[net.paths()[p].commodity] += action.route[p];
  }
  for (std::size_t c = 0; c < net.commodity_count(); ++c) {
    if (routed[c] != arrivals.counts[c]) {
      std::ostringstream os;
      os << "commodity " << net.commodities()[c].name << ": routed " << routed[c] << " of "
         << arrivals.counts[c] << " arrivals";
      fail(os.str());
    }
  }

  const LifetimeCounts q = inject(state, action.route);
  for (NodeId i = 0; i < net.node_count(); ++i) {
    for (std::size_t p = 0; p < net.path_count(); ++p) {
      const bool holds = net.paths()[p].outgoing_link(i).has_value();
      for (int l = 0; l <= lmax; ++l) {
        const std::int64_t have = q.at(i, p, l);
        const std::int64_t s = action.send.at(i, p, l);
        const std::int64_t d = action.drop.at(i, p, l);
        if (have < 0) fail("negative backlog in state");
        if ((!holds || l == 0) && have != 0) fail("state holds packets where none may reside");
        if (s < 0 || d < 0) fail("negative send/drop count");
        if (s + d > have) {
          std::ostringstream os;
          os << "availability violated at node " << net.graph().node_name(i) << ", path " << p
             << ", lifetime " << l << ": send " << s << " + drop " << d << " > backlog " << have;
          fail(os.str());
        }
      }
    }
  }

  const std::vector<std::int64_t> sends = link_sends(net, action);
  for (LinkId l = 0; l < net.link_count(); ++l) {
    const Link& link = net.graph().links()[l];
    const int x = action.blocks[l];
    auto name = [&] { return net.graph().node_name(link.from) + "->" + net.graph().node_name(link.to); };
    if (x < 0 || x > link.max_blocks) fail("block allocation out of range on link " + name());
    if (sends[l] > static_cast<std::int64_t>(link.block_capacity) * x) {
      std::ostringstream os;
      os << "capacity violated on link " << name() << ": " << sends[l] << " packets > "
         << link.block_capacity << " x " << x << " blocks";
      fail(os.str());
    }
  }
}

StepOutcome LifetimeEnv::step(const QueueState& state, const NetAction& action,
                              const ArrivalBatch& arrivals) const {
  validate(state, action, arrivals);
  const Network& net = *net_;
  const int lmax = net.max_lifetime();
  const std::size_t nc = net.commodity_count();

  StepOutcome out;
  out.next = QueueState{LifetimeCounts(net), state.slot + 1};
  out.arrived = arrivals.counts;
  out.delivered.assign(nc, 0);
  out.expired.assign(nc, 0);
  out.dropped.assign(nc, 0);

  const LifetimeCounts q = inject(state, action.route);
  for (const Path& p : net.paths()) {
    const std::size_t c = p.commodity;
    for (std::size_t k = 0; k < p.links.size(); ++k) {
      const NodeId here = p.nodes[k];
      const NodeId there = p.nodes[k + 1];
      const bool last_hop = k + 1 == p.links.size();
      for (int l = 1; l <= lmax; ++l) {
        const std::int64_t sent = action.send.at(here, p.id, l);
        const std::int64_t dropped = action.drop.at(here, p.id, l);
        const std::int64_t held = q.at(here, p.id, l) - sent - dropped;
        out.dropped[c] += dropped;
        if (l == 1) {
          // Everything still in the system at lifetime 1 ages out this slot.
          out.expired[c] += held + sent;
          continue;
        }
        out.next.backlog.at(here, p.id, l - 1) += held;
        if (last_hop) {
          out.delivered[c] += sent;
        } else {
          out.next.backlog.at(there, p.id, l - 1) += sent;
        }
      }
    }
  }
  out.cost = cost_m0(net, action);
  out.cost_normalized = cost_m0_normalized(net, action);
  return out;
}

std::vector<std::int64_t> link_sends(const Network& net, const NetAction& action) {
  std::vector<std::int64_t> sends(net.link_count(), 0);
  const int lmax = net.max_lifetime();
  for (const Path& p : net.paths()) {
    for (std::size_t k = 0; k < p.links.size(); ++k) {
      for (int l = 0; l <= lmax; ++l) sends[p.links[k]] += action.send.at(p.nodes[k], p.id, l);
    }
  }
  return sends;
}

double cost_m0(const Network& net, const NetAction& action) {
  double cost = 0.0;
  for (LinkId l = 0; l < net.link_count(); ++l) cost += action.blocks[l] * net.graph().links()[l].block_cost;
  return cost;
}

double cost_m0_normalized(const Network& net, const NetAction& action) {
  const double max_cost = net.max_cost();
  return max_cost > 0.0 ? cost_m0(net, action) / max_cost : 0.0;
}

double throughput_signal(const StepOutcome& outcome, const Network& net, std::size_t commodity) {
  const Commodity& c = net.commodities().at(commodity);
  if (c.mean_rate <= 0.0) return 0.0;
  return static_cast<double>(outcome.delivered.at(commodity)) / c.mean_rate - c.reliability;
}

}  // namespace cdrl
