#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cdrl/lifetime_env.hpp"
#include "cdrl/net_model.hpp"
#include "cdrl/neural.hpp"
#include "cdrl/rng.hpp"

namespace cdrl {

struct AgentConfig {
  std::vector<int> hidden{64, 64};
  nn::AdamConfig actor_adam;
  nn::AdamConfig critic_adam;
  double gamma = 0.97;
  double soft_update = 0.01;  // target-network tau
  std::size_t batch_size = 256;
  std::size_t buffer_capacity = 100000;
  std::size_t updates_per_iteration = 50;  // gradient steps per primal update
  double input_scale = 0.1;                // packet counts are multiplied by this before entering a network
};

// --- Decision primitives -------------------------------------------------

/// floor(b * p) packets per path; the remainder goes to the most probable
/// path (lowest index on ties).
std::vector<std::int64_t> split_arrivals(std::int64_t arrivals, std::span<const double> probs);

struct ScheduleCounts {
  std::int64_t send = 0;
  std::int64_t drop = 0;
  std::int64_t hold = 0;
};

/// send = floor(P(send) q), drop = floor(P(drop) q), hold = the rest.
/// probs = (send, drop, hold).
ScheduleCounts schedule_counts(std::int64_t backlog, std::span<const double> probs);

struct LifetimeSplit {
  std::vector<std::int64_t> send;  // indexed by lifetime
  std::vector<std::int64_t> drop;
};

/// Drops `drop` packets then sends `send` packets, each time taking the
/// lowest remaining lifetime first.
LifetimeSplit resolve_lifetimes(std::span<const std::int64_t> backlog_by_lifetime, std::int64_t send,
                                std::int64_t drop);

/// ceil(sends / block_capacity)
int allocate_blocks(std::int64_t sends, int block_capacity);

/// Caps every link at its capacity by holding back sends with the highest
/// remaining lifetime first, then sets the block allocation of every link.
void truncate_and_allocate(const Network& net, NetAction& action);

/// max(decay^k, floor)
double exploration_epsilon(std::size_t k, double decay = 0.99, double floor = 0.01);

/// Uniform point on the (n-1)-simplex.
std::vector<double> sample_simplex(std::size_t n, Rng& rng);

// --- Experience ----------------------------------------------------------

/// Raw slot data; network inputs are rebuilt from it at sampling time.
struct Transition {
  std::vector<std::int32_t> backlog;  // LifetimeCounts layout, pre-arrival
  std::vector<std::int32_t> arrivals;
  std::vector<std::int32_t> route;  // arrivals assigned to each path
  std::vector<double> actions;      // all actors' probability outputs as executed
  double reward = 0.0;
  std::vector<std::int32_t> next_backlog;
  std::vector<std::int32_t> next_arrivals;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  /// Appends, evicting the oldest transition when full.
  void push(Transition t);
  /// `count` indices drawn uniformly with replacement.
  std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;

  const Transition& operator[](std::size_t i) const { return items_[i]; }
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  void clear();

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

// --- Agents --------------------------------------------------------------

struct Decision {
  NetAction action;
  std::vector<double> probs;  // routing groups, then each scheduling agent's groups
  std::vector<char> explored;  // per agent: routing first, then scheduling agents
};

struct UpdateStats {
  double critic_loss = 0.0;
  double mean_q = 0.0;
  std::size_t steps = 0;
};

class UnderfullBuffer : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Centralized routing actor, one scheduling actor per node that can hold
/// packets, and a centralized critic over the global state and every
/// actor's output, trained with deterministic policy gradients.
class CdrlAgents {
 public:
  CdrlAgents(const Network& net, AgentConfig config, std::uint64_t seed);

  const Network& network() const { return *net_; }
  const AgentConfig& config() const { return config_; }

  // Layout.
  std::size_t state_size() const { return state_size_; }
  std::size_t action_size() const { return action_size_; }
  std::size_t scheduling_agent_count() const { return sched_nodes_.size(); }
  NodeId scheduling_node(std::size_t agent) const { return sched_nodes_.at(agent); }
  // Offset of an agent's outputs in the joint action vector; agent 0 is the router.
  std::size_t action_offset(std::size_t agent) const { return action_offsets_.at(agent); }

  Eigen::VectorXd state_features(const QueueState& state, const ArrivalBatch& arrivals) const;
  /// Scaled per-path backlog at a scheduling agent's node after routing.
  Eigen::VectorXd local_features(std::size_t sched_agent, const LifetimeCounts& injected) const;

  /// Routing decision: per-path counts of the slot's arrivals.
  std::vector<std::int64_t> route(std::span<const double> routing_probs, const ArrivalBatch& arrivals) const;

  /// Full decision for one slot.  Each agent independently replaces its
  /// outputs with a uniform simplex point with probability epsilon.
  Decision act(const QueueState& state, const ArrivalBatch& arrivals, double epsilon, Rng& rng) const;

  /// Builds a transition from one executed decision.
  Transition make_transition(const QueueState& state, const ArrivalBatch& arrivals, const Decision& decision,
                             double reward, const QueueState& next_state, const ArrivalBatch& next_arrivals) const;

  /// `updates_per_iteration` critic/actor/target steps on uniform minibatches.
  UpdateStats update(const ReplayBuffer& buffer, Rng& rng);

  /// Gradients of the mean critic value over a minibatch w.r.t. each actor's
  /// parameters (routing first) without applying them.  Exposed for checks.
  std::vector<nn::Gradients> actor_objective_gradients(const ReplayBuffer& buffer,
                                                       std::span<const std::size_t> batch) const;
  /// Mean critic value of the current actors' outputs over a minibatch.
  double actor_objective(const ReplayBuffer& buffer, std::span<const std::size_t> batch) const;
  /// One critic regression step on a fixed minibatch; returns the loss before the step.
  double critic_step(const ReplayBuffer& buffer, std::span<const std::size_t> batch);
  double critic_loss(const ReplayBuffer& buffer, std::span<const std::size_t> batch) const;

  nn::Mlp& routing_actor() { return routing_; }
  const nn::Mlp& routing_actor() const { return routing_; }
  nn::Mlp& scheduling_actor(std::size_t k) { return scheduling_.at(k); }
  const nn::Mlp& scheduling_actor(std::size_t k) const { return scheduling_.at(k); }
  nn::Mlp& critic() { return critic_; }
  const nn::Mlp& critic() const { return critic_; }

  /// Writes one container per network plus manifest.json into `dir`.
  void save(const std::filesystem::path& dir) const;
  /// Loads actors and critic; throws nn::CheckpointError on any shape mismatch.
  void load(const std::filesystem::path& dir);

 private:
  struct Batch {
    Eigen::MatrixXd state;
    Eigen::MatrixXd actions;
    Eigen::RowVectorXd reward;
    Eigen::MatrixXd next_state;
    std::vector<Eigen::MatrixXd> local;  // per scheduling agent
    std::vector<const Transition*> items;
  };

  Batch gather(const ReplayBuffer& buffer, std::span<const std::size_t> batch) const;
  Eigen::RowVectorXd td_targets(const Batch& b) const;
  void state_features_raw(std::span<const std::int32_t> backlog, std::span<const std::int32_t> arrivals,
                          double* out) const;
  double local_feature_raw(std::size_t sched_agent, std::size_t slot, std::span<const std::int32_t> backlog,
                           std::span<const std::int64_t> route) const;
  Eigen::MatrixXd joint_input(const Eigen::MatrixXd& state, const Eigen::MatrixXd& actions) const;
  std::vector<std::int64_t> route_raw(std::span<const double> probs, std::span<const std::int32_t> arrivals) const;

  const Network* net_;
  AgentConfig config_;
  std::vector<NodeId> sched_nodes_;
  std::vector<std::size_t> action_offsets_;
  std::size_t state_size_ = 0;
  std::size_t action_size_ = 0;

  nn::Mlp routing_, routing_target_;
  std::vector<nn::Mlp> scheduling_, scheduling_target_;
  nn::Mlp critic_, critic_target_;
  nn::Adam routing_opt_;
  std::vector<nn::Adam> scheduling_opt_;
  nn::Adam critic_opt_;
};

}  // namespace cdrl
