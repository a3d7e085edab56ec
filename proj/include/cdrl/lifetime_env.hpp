#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdrl/net_model.hpp"
#include "cdrl/rng.hpp"

namespace cdrl {

/// Non-negative packet counts indexed by (node, path, remaining lifetime).
/// Lifetime index 0 exists but is kept at zero for backlogs.
class LifetimeCounts {
 public:
  LifetimeCounts() = default;
  LifetimeCounts(std::size_t nodes, std::size_t paths, int max_lifetime)
      : nodes_(nodes), paths_(paths), lifetimes_(max_lifetime + 1),
        data_(nodes * paths * static_cast<std::size_t>(max_lifetime + 1), 0) {}
  explicit LifetimeCounts(const Network& net)
      : LifetimeCounts(net.node_count(), net.path_count(), net.max_lifetime()) {}

  std::int64_t& at(NodeId node, std::size_t path, int lifetime) { return data_[index(node, path, lifetime)]; }
  std::int64_t at(NodeId node, std::size_t path, int lifetime) const { return data_[index(node, path, lifetime)]; }

  // Counts at (node, path) for lifetimes 0..max_lifetime.
  std::span<std::int64_t> cell(NodeId node, std::size_t path) {
    return {data_.data() + index(node, path, 0), lifetimes_};
  }
  std::span<const std::int64_t> cell(NodeId node, std::size_t path) const {
    return {data_.data() + index(node, path, 0), lifetimes_};
  }
  std::int64_t sum(NodeId node, std::size_t path) const;
  std::int64_t total() const;

  std::size_t nodes() const { return nodes_; }
  std::size_t paths() const { return paths_; }
  int max_lifetime() const { return static_cast<int>(lifetimes_) - 1; }
  std::span<const std::int64_t> raw() const { return data_; }

  bool operator==(const LifetimeCounts&) const = default;

 private:
  std::size_t index(NodeId node, std::size_t path, int lifetime) const {
    return (node * paths_ + path) * lifetimes_ + static_cast<std::size_t>(lifetime);
  }

  std::size_t nodes_ = 0;
  std::size_t paths_ = 0;
  std::size_t lifetimes_ = 1;
  std::vector<std::int64_t> data_;
};

/// Path-based backlog q[i][p][l] at the start of a slot, before that slot's
/// arrivals are injected.
struct QueueState {
  LifetimeCounts backlog;
  int slot = 0;

  bool operator==(const QueueState&) const = default;
};

struct ArrivalBatch {
  std::vector<std::int64_t> counts;  // per commodity
};

/// One slot's network action.  `route` splits the slot's arrivals over the
/// paths of their commodity; `send` / `drop` are lifetime-resolved per
/// (node, path); `blocks` are allocated per link.
struct NetAction {
  std::vector<std::int64_t> route;  // per global path id
  LifetimeCounts send;
  LifetimeCounts drop;
  std::vector<int> blocks;  // per link id

  static NetAction zeros(const Network& net);
};

struct StepOutcome {
  QueueState next;
  std::vector<std::int64_t> arrived;    // per commodity
  std::vector<std::int64_t> delivered;  // per commodity, on time
  std::vector<std::int64_t> expired;    // per commodity
  std::vector<std::int64_t> dropped;    // per commodity
  double cost = 0.0;                    // m0
  double cost_normalized = 0.0;         // m0 / max cost

  std::int64_t total_expired() const;
  std::int64_t total_dropped() const;
  std::int64_t total_delivered() const;
};

class InfeasibleAction : public std::runtime_error {
 public:
  explicit InfeasibleAction(const std::string& what) : std::runtime_error(what) {}
};

/// Slotted lifetime-queue environment.  Transitions are pure functions of
/// (state, action, arrivals); only arrival sampling carries state.
class LifetimeEnv {
 public:
  explicit LifetimeEnv(const Network& net);

  const Network& network() const { return *net_; }

  /// Empty queues at slot 0; reseeds the arrival stream.
  QueueState reset(std::uint64_t seed);

  /// Independent Poisson draws, one per commodity.
  ArrivalBatch sample_arrivals();

  /// Backlog after placing routed arrivals at their sources with full lifetime.
  LifetimeCounts inject(const QueueState& state, std::span<const std::int64_t> route) const;

  /// Throws InfeasibleAction describing the first violated constraint.
  void validate(const QueueState& state, const NetAction& action, const ArrivalBatch& arrivals) const;

  StepOutcome step(const QueueState& state, const NetAction& action, const ArrivalBatch& arrivals) const;

 private:
  const Network* net_;
  Rng rng_;
};

/// Per-link packet totals sent by an action.
std::vector<std::int64_t> link_sends(const Network& net, const NetAction& action);

double cost_m0(const Network& net, const NetAction& action);
double cost_m0_normalized(const Network& net, const NetAction& action);

/// Per-slot constraint signal m^c = delivered / mean_rate - reliability.
/// Zero when the commodity has no traffic.
double throughput_signal(const StepOutcome& outcome, const Network& net, std::size_t commodity);

}  // namespace cdrl
