#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cdrl/lifetime_env.hpp"
#include "cdrl/net_model.hpp"

namespace cdrl {

/// Anything that maps a slot's state and arrivals to a network action.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  /// Called at the start of every episode.
  virtual void reset() {}
  virtual NetAction decide(const QueueState& state, const ArrivalBatch& arrivals) = 0;
};

// --- Backpressure ----------------------------------------------------------

/// Source routing for BP: packets join, one at a time, the path whose next
/// hop holds the smallest backlog of their commodity (counting packets
/// already placed this slot); ties go to the lowest path id.
std::vector<std::int64_t> bp_route(const Network& net, const QueueState& state, const ArrivalBatch& arrivals);

/// Per link (i,j), serve the commodity maximizing Q_i^c - Q_j^c if positive,
/// sending up to C_ij of its packets routed over (i,j), lowest lifetime
/// first.  No drops.  Blocks are ceil(sent / C^b).
NetAction bp_step(const Network& net, const QueueState& state, const ArrivalBatch& arrivals);

class BackpressurePolicy : public Policy {
 public:
  explicit BackpressurePolicy(const Network& net) : net_(&net) {}
  std::string name() const override { return "bp"; }
  NetAction decide(const QueueState& state, const ArrivalBatch& arrivals) override {
    return bp_step(*net_, state, arrivals);
  }

 private:
  const Network* net_;
};

// --- Universal max-weight style ------------------------------------------

/// Per-link virtual backlogs steering source routing.
struct VirtualQueues {
  std::vector<double> value;  // per link id, never negative

  explicit VirtualQueues(const Network& net) : value(net.link_count(), 0.0) {}
  /// Subtracts each link's capacity, flooring at zero.
  void drain(const Network& net);
};

/// Every packet takes the path with the smallest sum of virtual backlogs
/// (ties -> lowest path id), then adds one to each link of that path.
std::vector<std::int64_t> umw_route(const Network& net, const ArrivalBatch& arrivals, VirtualQueues& vq);

/// Routes with umw_route, then per link serves path backlogs in decreasing
/// order up to C_ij (lowest lifetime first within a path), then drains the
/// virtual queues.
NetAction umw_step(const Network& net, const QueueState& state, const ArrivalBatch& arrivals, VirtualQueues& vq);

class UmwPolicy : public Policy {
 public:
  explicit UmwPolicy(const Network& net) : net_(&net), vq_(net) {}
  std::string name() const override { return "umw"; }
  void reset() override { vq_ = VirtualQueues(*net_); }
  NetAction decide(const QueueState& state, const ArrivalBatch& arrivals) override {
    return umw_step(*net_, state, arrivals, vq_);
  }
  const VirtualQueues& virtual_queues() const { return vq_; }

 private:
  const Network* net_;
  VirtualQueues vq_;
};

/// Holds everything; used for empty-system checks.
class IdlePolicy : public Policy {
 public:
  explicit IdlePolicy(const Network& net) : net_(&net) {}
  std::string name() const override { return "idle"; }
  NetAction decide(const QueueState& state, const ArrivalBatch& arrivals) override;

 private:
  const Network* net_;
};

}  // namespace cdrl
