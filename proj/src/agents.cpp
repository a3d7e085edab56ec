#include "cdrl/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace cdrl {

// --- Decision primitives -------------------------------------------------

namespace {

// Guards floor(p * n) against products like 2.9999999999999996.
constexpr double kFloorSlack = 1e-9;

std::int64_t floor_share(double p, std::int64_t n) {
  return static_cast<std::int64_t>(std::floor(p * static_cast<double>(n) + kFloorSlack));
}

}  // namespace

std::vector<std::int64_t> split_arrivals(std::int64_t arrivals, std::span<const double> probs) {
  std::vector<std::int64_t> counts(probs.size(), 0);
  if (probs.empty() || arrivals <= 0) return counts;
  std::int64_t assigned = 0;
  for (std::size_t p = 0; p < probs.size(); ++p) {
    counts[p] = std::clamp<std::int64_t>(floor_share(probs[p], arrivals), 0, arrivals - assigned);
    assigned += counts[p];
  }
  const auto best = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  counts[best] += arrivals - assigned;
  return counts;
}

ScheduleCounts schedule_counts(std::int64_t backlog, std::span<const double> probs) {
  ScheduleCounts out;
  if (backlog <= 0) return out;
  out.send = std::clamp<std::int64_t>(floor_share(probs[0], backlog), 0, backlog);
  out.drop = std::clamp<std::int64_t>(floor_share(probs[1], backlog), 0, backlog - out.send);
  out.hold = backlog - out.send - out.drop;
  return out;
}

LifetimeSplit resolve_lifetimes(std::span<const std::int64_t> backlog_by_lifetime, std::int64_t send,
                                std::int64_t drop) {
  LifetimeSplit out{std::vector<std::int64_t>(backlog_by_lifetime.size(), 0),
                    std::vector<std::int64_t>(backlog_by_lifetime.size(), 0)};
  std::vector<std::int64_t> left(backlog_by_lifetime.begin(), backlog_by_lifetime.end());
  auto take = [&](std::int64_t want, std::vector<std::int64_t>& into) {
    for (std::size_t l = 1; l < left.size() && want > 0; ++l) {
      const std::int64_t n = std::min(want, left[l]);
      into[l] += n;
      left[l] -= n;
      want -= n;
    }
  };
  take(drop, out.drop);
  take(send, out.send);
  return out;
}

int allocate_blocks(std::int64_t sends, int block_capacity) {
  if (sends <= 0) return 0;
  return static_cast<int>((sends + block_capacity - 1) / block_capacity);
}

void truncate_and_allocate(const Network& net, NetAction& action) {
  const int lmax = net.max_lifetime();
  for (LinkId l = 0; l < net.link_count(); ++l) {
    const Link& link = net.graph().links()[l];
    const auto& on_link = net.paths_on_link(l);
    std::int64_t total = 0;
    for (std::size_t p : on_link) total += action.send.sum(link.from, p);
    std::int64_t excess = total - link.capacity();
    for (int life = lmax; life >= 1 && excess > 0; --life) {
      for (auto it = on_link.rbegin(); it != on_link.rend() && excess > 0; ++it) {
        std::int64_t& s = action.send.at(link.from, *it, life);
        const std::int64_t cut = std::min(s, excess);
        s -= cut;
        excess -= cut;
      }
    }
    action.blocks[l] = allocate_blocks(std::min<std::int64_t>(total, link.capacity()), link.block_capacity);
  }
}

double exploration_epsilon(std::size_t k, double decay, double floor) {
  return std::max(std::pow(decay, static_cast<double>(k)), floor);
}

std::vector<double> sample_simplex(std::size_t n, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> x(n);
  double total = 0.0;
  for (auto& v : x) {
    v = expo(rng);
    total += v;
  }
  for (auto& v : x) v /= total;
  return x;
}

// --- Replay buffer ---------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, Rng& rng) const {
  if (items_.empty()) throw std::logic_error("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> idx(count);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

void ReplayBuffer::clear() {
  items_.clear();
  next_ = 0;
}

// --- Agents --------------------------------------------------------------

namespace {

std::vector<int> with_hidden(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

std::vector<std::int32_t> narrow(std::span<const std::int64_t> v) {
  std::vector<std::int32_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<std::int32_t>(v[i]);
  return out;
}

}  // namespace

CdrlAgents::CdrlAgents(const Network& net, AgentConfig config, std::uint64_t seed)
    : net_(&net), config_(std::move(config)) {
  for (NodeId i = 0; i < net.node_count(); ++i) {
    if (!net.paths_held_at(i).empty()) sched_nodes_.push_back(i);
  }
  state_size_ = net.node_count() * net.path_count() * static_cast<std::size_t>(net.max_lifetime()) +
                net.commodity_count();

  std::vector<int> routing_groups;
  for (std::size_t c = 0; c < net.commodity_count(); ++c) {
    routing_groups.push_back(static_cast<int>(net.commodity_paths(c).size()));
  }
  action_offsets_.push_back(0);
  action_size_ = net.path_count();
  routing_ = nn::Mlp::initialized(with_hidden(static_cast<int>(state_size_), config_.hidden,
                                              static_cast<int>(net.path_count())),
                                  nn::Head::softmax(routing_groups), derive_seed(seed, "init/routing"));
  for (std::size_t k = 0; k < sched_nodes_.size(); ++k) {
    const int slots = static_cast<int>(net.paths_held_at(sched_nodes_[k]).size());
    action_offsets_.push_back(action_size_);
    action_size_ += 3 * static_cast<std::size_t>(slots);
    scheduling_.push_back(nn::Mlp::initialized(with_hidden(slots, config_.hidden, 3 * slots),
                                               nn::Head::softmax(std::vector<int>(slots, 3)),
                                               derive_seed(seed, "init/scheduling", k)));
  }
  critic_ = nn::Mlp::initialized(with_hidden(static_cast<int>(state_size_ + action_size_), config_.hidden, 1),
                                 nn::Head::linear(), derive_seed(seed, "init/critic"));

  routing_target_ = routing_;
  scheduling_target_ = scheduling_;
  critic_target_ = critic_;
  routing_opt_ = nn::Adam(routing_, config_.actor_adam);
  for (const auto& s : scheduling_) scheduling_opt_.emplace_back(s, config_.actor_adam);
  critic_opt_ = nn::Adam(critic_, config_.critic_adam);
}

void CdrlAgents::state_features_raw(std::span<const std::int32_t> backlog, std::span<const std::int32_t> arrivals,
                                    double* out) const {
  const std::size_t lifetimes = static_cast<std::size_t>(net_->max_lifetime()) + 1;
  const double scale = config_.input_scale;
  std::size_t k = 0;
  for (std::size_t cell = 0; cell < backlog.size(); cell += lifetimes) {
    for (std::size_t l = 1; l < lifetimes; ++l) out[k++] = scale * backlog[cell + l];
  }
  for (std::int32_t b : arrivals) out[k++] = scale * b;
}

Eigen::VectorXd CdrlAgents::state_features(const QueueState& state, const ArrivalBatch& arrivals) const {
  Eigen::VectorXd s(state_size_);
  state_features_raw(narrow(state.backlog.raw()), narrow(arrivals.counts), s.data());
  return s;
}

double CdrlAgents::local_feature_raw(std::size_t sched_agent, std::size_t slot, std::span<const std::int32_t> backlog,
                                     std::span<const std::int64_t> route) const {
  const NodeId node = sched_nodes_[sched_agent];
  const std::size_t p = net_->paths_held_at(node)[slot];
  const std::size_t lifetimes = static_cast<std::size_t>(net_->max_lifetime()) + 1;
  const std::size_t base = (node * net_->path_count() + p) * lifetimes;
  std::int64_t total = 0;
  for (std::size_t l = 0; l < lifetimes; ++l) total += backlog[base + l];
  const Path& path = net_->paths()[p];
  if (net_->commodities()[path.commodity].source == node) total += route[p];
  return config_.input_scale * static_cast<double>(total);
}

Eigen::VectorXd CdrlAgents::local_features(std::size_t sched_agent, const LifetimeCounts& injected) const {
  const auto& held = net_->paths_held_at(sched_nodes_.at(sched_agent));
  Eigen::VectorXd o(held.size());
  for (std::size_t j = 0; j < held.size(); ++j) {
    o(static_cast<Eigen::Index>(j)) = config_.input_scale * static_cast<double>(injected.sum(sched_nodes_[sched_agent], held[j]));
  }
  return o;
}

std::vector<std::int64_t> CdrlAgents::route(std::span<const double> routing_probs,
                                            const ArrivalBatch& arrivals) const {
  std::vector<std::int64_t> counts(net_->path_count(), 0);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < net_->commodity_count(); ++c) {
    const auto& ids = net_->commodity_paths(c);
    const auto split = split_arrivals(arrivals.counts.at(c), routing_probs.subspan(offset, ids.size()));
    for (std::size_t k = 0; k < ids.size(); ++k) counts[ids[k]] = split[k];
    offset += ids.size();
  }
  return counts;
}

std::vector<std::int64_t> CdrlAgents::route_raw(std::span<const double> probs,
                                                std::span<const std::int32_t> arrivals) const {
  ArrivalBatch b;
  b.counts.assign(arrivals.begin(), arrivals.end());
  return route(probs, b);
}

Decision CdrlAgents::act(const QueueState& state, const ArrivalBatch& arrivals, double epsilon, Rng& rng) const {
  const Network& net = *net_;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Decision d;
  d.action = NetAction::zeros(net);
  d.probs.assign(action_size_, 0.0);
  d.explored.assign(1 + sched_nodes_.size(), 0);

  const Eigen::VectorXd routing_out = routing_.forward_one(state_features(state, arrivals));
  std::copy(routing_out.data(), routing_out.data() + routing_out.size(), d.probs.begin());
  if (epsilon > 0.0 && coin(rng) < epsilon) {
    d.explored[0] = 1;
    std::size_t offset = 0;
    for (std::size_t c = 0; c < net.commodity_count(); ++c) {
      const auto n = net.commodity_paths(c).size();
      const auto x = sample_simplex(n, rng);
      std::copy(x.begin(), x.end(), d.probs.begin() + static_cast<std::ptrdiff_t>(offset));
      offset += n;
    }
  }
  d.action.route = route(std::span<const double>(d.probs).subspan(0, net.path_count()), arrivals);

  LifetimeCounts injected = state.backlog;
  for (const Path& p : net.paths()) {
    const Commodity& c = net.commodities()[p.commodity];
    injected.at(c.source, p.id, c.initial_lifetime) += d.action.route[p.id];
  }

  for (std::size_t k = 0; k < sched_nodes_.size(); ++k) {
    const NodeId node = sched_nodes_[k];
    const auto& held = net.paths_held_at(node);
    const Eigen::VectorXd out = scheduling_[k].forward_one(local_features(k, injected));
    auto* probs = d.probs.data() + action_offsets_[k + 1];
    std::copy(out.data(), out.data() + out.size(), probs);
    if (epsilon > 0.0 && coin(rng) < epsilon) {
      d.explored[k + 1] = 1;
      for (std::size_t j = 0; j < held.size(); ++j) {
        const auto x = sample_simplex(3, rng);
        std::copy(x.begin(), x.end(), probs + 3 * j);
      }
    }
    for (std::size_t j = 0; j < held.size(); ++j) {
      const std::size_t p = held[j];
      const auto counts = schedule_counts(injected.sum(node, p), std::span<const double>(probs + 3 * j, 3));
      const auto split = resolve_lifetimes(injected.cell(node, p), counts.send, counts.drop);
      auto send = d.action.send.cell(node, p);
      auto drop = d.action.drop.cell(node, p);
      std::copy(split.send.begin(), split.send.end(), send.begin());
      std::copy(split.drop.begin(), split.drop.end(), drop.begin());
    }
  }
  truncate_and_allocate(net, d.action);
  return d;
}

Transition CdrlAgents::make_transition(const QueueState& state, const ArrivalBatch& arrivals,
                                       const Decision& decision, double reward, const QueueState& next_state,
                                       const ArrivalBatch& next_arrivals) const {
  Transition t;
  t.backlog = narrow(state.backlog.raw());
  t.arrivals = narrow(arrivals.counts);
  t.route = narrow(decision.action.route);
  t.actions = decision.probs;
  t.reward = reward;
  t.next_backlog = narrow(next_state.backlog.raw());
  t.next_arrivals = narrow(next_arrivals.counts);
  return t;
}

CdrlAgents::Batch CdrlAgents::gather(const ReplayBuffer& buffer, std::span<const std::size_t> batch) const {
  const auto n = static_cast<Eigen::Index>(batch.size());
  Batch b;
  b.state.resize(static_cast<Eigen::Index>(state_size_), n);
  b.next_state.resize(static_cast<Eigen::Index>(state_size_), n);
  b.actions.resize(static_cast<Eigen::Index>(action_size_), n);
  b.reward.resize(n);
  b.local.resize(sched_nodes_.size());
  for (std::size_t k = 0; k < sched_nodes_.size(); ++k) {
    b.local[k].resize(static_cast<Eigen::Index>(net_->paths_held_at(sched_nodes_[k]).size()), n);
  }
  std::vector<std::int64_t> route(net_->path_count());
  for (Eigen::Index j = 0; j < n; ++j) {
    const Transition& t = buffer[batch[static_cast<std::size_t>(j)]];
    b.items.push_back(&t);
    state_features_raw(t.backlog, t.arrivals, b.state.col(j).data());
    state_features_raw(t.next_backlog, t.next_arrivals, b.next_state.col(j).data());
    for (std::size_t a = 0; a < action_size_; ++a) b.actions(static_cast<Eigen::Index>(a), j) = t.actions[a];
    b.reward(j) = t.reward;
    std::copy(t.route.begin(), t.route.end(), route.begin());
    for (std::size_t k = 0; k < sched_nodes_.size(); ++k) {
      for (Eigen::Index s = 0; s < b.local[k].rows(); ++s) {
        b.local[k](s, j) = local_feature_raw(k, static_cast<std::size_t>(s), t.backlog, route);
      }
    }
  }
  return b;
}

Eigen::MatrixXd CdrlAgents::joint_input(const Eigen::MatrixXd& state, const Eigen::MatrixXd& actions) const {
  Eigen::MatrixXd x(state.rows() + actions.rows(), state.cols());
  x.topRows(state.rows()) = state;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

Eigen::RowVectorXd CdrlAgents::td_targets(const Batch& b) const {
  const Eigen::Index n = b.state.cols();
  const auto np = static_cast<Eigen::Index>(net_->path_count());
  Eigen::MatrixXd next_actions(static_cast<Eigen::Index>(action_size_), n);
  next_actions.topRows(np) = routing_target_.forward(b.next_state);

  std::vector<Eigen::MatrixXd> next_local(sched_nodes_.size());
  for (std::size_t k = 0; k < sched_nodes_.size(); ++k) next_local[k].resize(b.local[k].rows(), n);
  std::vector<double> probs(net_->path_count());
  for (Eigen::Index j = 0; j < n; ++j) {
    const Transition& t = *b.items[static_cast<std::size_t>(j)];
    for (Eigen::Index p = 0; p < np; ++p) probs[static_cast<std::size_t>(p)] = next_actions(p, j);
    const auto route = route_raw(probs, t.next_arrivals);
    for (std::size_t k = 0; k < sched_nodes_.size(); ++k) {
      for (Eigen::Index s = 0; s < next_local[k].rows(); ++s) {
        next_local[k](s, j) = local_feature_raw(k, static_cast<std::size_t>(s), t.next_backlog, route);
      }
    }
  }
  for (std::size_t k = 0; k < sched_nodes_.size(); ++k) {
    const auto offset = static_cast<Eigen::Index>(action_offsets_[k + 1]);
    const Eigen::MatrixXd out = scheduling_target_[k].forward(next_local[k]);
    next_actions.middleRows(offset, out.rows()) = out;
  }
  const Eigen::MatrixXd q_next = critic_target_.forward(joint_input(b.next_state, next_actions));
  return b.reward + config_.gamma * q_next.row(0);
}

double CdrlAgents::critic_loss(const ReplayBuffer& buffer, std::span<const std::size_t> batch) const {
  const Batch b = gather(buffer, batch);
  const Eigen::RowVectorXd y = td_targets(b);
  const Eigen::MatrixXd q = critic_.forward(joint_input(b.state, b.actions));
  return 0.5 * (q.row(0) - y).squaredNorm() / static_cast<double>(b.state.cols());
}

double CdrlAgents::critic_step(const ReplayBuffer& buffer, std::span<const std::size_t> batch) {
  const Batch b = gather(buffer, batch);
  const Eigen::RowVectorXd y = td_targets(b);
  nn::ForwardCache cache;
  const Eigen::MatrixXd q = critic_.forward(joint_input(b.state, b.actions), &cache);
  const Eigen::RowVectorXd diff = q.row(0) - y;
  const double n = static_cast<double>(b.state.cols());
  const auto grads = critic_.backward(cache, Eigen::MatrixXd(diff / n));
  critic_opt_.step(critic_, grads);
  return 0.5 * diff.squaredNorm() / n;
}

double CdrlAgents::actor_objective(const ReplayBuffer& buffer, std::span<const std::size_t> batch) const {
  const Batch b = gather(buffer, batch);
  Eigen::MatrixXd actions(static_cast<Eigen::Index>(action_size_), b.state.cols());
  actions.topRows(static_cast<Eigen::Index>(net_->path_count())) = routing_.forward(b.state);
  for (std::size_t k = 0; k < sched_nodes_.size(); ++k) {
    const Eigen::MatrixXd out = scheduling_[k].forward(b.local[k]);
    actions.middleRows(static_cast<Eigen::Index>(action_offsets_[k + 1]), out.rows()) = out;
  }
  return critic_.forward(joint_input(b.state, actions)).mean();
}

std::vector<nn::Gradients> CdrlAgents::actor_objective_gradients(const ReplayBuffer& buffer,
                                                                 std::span<const std::size_t> batch) const {
  const Batch b = gather(buffer, batch);
  const Eigen::Index n = b.state.cols();
  const auto np = static_cast<Eigen::Index>(net_->path_count());

  nn::ForwardCache routing_cache;
  std::vector<nn::ForwardCache> sched_cache(sched_nodes_.size());
  Eigen::MatrixXd actions(static_cast<Eigen::Index>(action_size_), n);
  actions.topRows(np) = routing_.forward(b.state, &routing_cache);
  for (std::size_t k = 0; k < sched_nodes_.size(); ++k) {
    const Eigen::MatrixXd out = scheduling_[k].forward(b.local[k], &sched_cache[k]);
    actions.middleRows(static_cast<Eigen::Index>(action_offsets_[k + 1]), out.rows()) = out;
  }

  nn::ForwardCache critic_cache;
  critic_.forward(joint_input(b.state, actions), &critic_cache);
  // Loss is -mean(Q); its gradient w.r.t. every Q output is -1/n.
  const Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(1, n, -1.0 / static_cast<double>(n));
  Eigen::MatrixXd dinput;
  critic_.backward(critic_cache, dq, &dinput);
  const auto ds = static_cast<Eigen::Index>(state_size_);

  std::vector<nn::Gradients> grads;
  grads.push_back(routing_.backward(routing_cache, dinput.middleRows(ds, np)));
  for (std::size_t k = 0; k < sched_nodes_.size(); ++k) {
    const auto offset = ds + static_cast<Eigen::Index>(action_offsets_[k + 1]);
    grads.push_back(scheduling_[k].backward(sched_cache[k],
                                            dinput.middleRows(offset, scheduling_[k].output_size())));
  }
  return grads;
}

UpdateStats CdrlAgents::update(const ReplayBuffer& buffer, Rng& rng) {
  if (buffer.size() < config_.batch_size) {
    throw UnderfullBuffer("replay buffer holds " + std::to_string(buffer.size()) + " transitions, batch needs " +
                          std::to_string(config_.batch_size));
  }
  UpdateStats stats;
  for (std::size_t u = 0; u < config_.updates_per_iteration; ++u) {
    const auto batch = buffer.sample_indices(config_.batch_size, rng);
    stats.critic_loss += critic_step(buffer, batch);
    const auto grads = actor_objective_gradients(buffer, batch);
    routing_opt_.step(routing_, grads[0]);
    for (std::size_t k = 0; k < scheduling_.size(); ++k) scheduling_opt_[k].step(scheduling_[k], grads[k + 1]);

    routing_target_.soft_update(routing_, config_.soft_update);
    for (std::size_t k = 0; k < scheduling_.size(); ++k) {
      scheduling_target_[k].soft_update(scheduling_[k], config_.soft_update);
    }
    critic_target_.soft_update(critic_, config_.soft_update);
    ++stats.steps;
  }
  if (stats.steps > 0) stats.critic_loss /= static_cast<double>(stats.steps);
  return stats;
}

namespace {

std::string sched_file(const Network& net, NodeId node, std::size_t k) {
  return "scheduling_" + std::to_string(k) + "_" + net.graph().node_name(node) + ".mlp";
}

void expect_shape(const nn::Mlp& loaded, const nn::Mlp& expected, const std::string& role) {
  if (loaded.dims() != expected.dims() || !(loaded.head() == expected.head())) {
    throw nn::CheckpointError("shape mismatch for " + role + ": checkpoint does not fit this network/config");
  }
}

}  // namespace

void CdrlAgents::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  using nlohmann::json;
  json manifest;
  manifest["format_version"] = nn::kCheckpointFormatVersion;
  manifest["input_scale"] = config_.input_scale;
  json agents = json::array();

  nn::save(routing_, dir / "routing.mlp");
  agents.push_back({{"role", "routing"},
                    {"file", "routing.mlp"},
                    {"dims", routing_.dims()},
                    {"input_layout", "backlog[node][path][lifetime=1..L] then arrivals[commodity], scaled"},
                    {"output_groups", routing_.head().groups}});
  for (std::size_t k = 0; k < scheduling_.size(); ++k) {
    const NodeId node = sched_nodes_[k];
    const std::string file = sched_file(*net_, node, k);
    nn::save(scheduling_[k], dir / file);
    json paths = json::array();
    for (std::size_t p : net_->paths_held_at(node)) paths.push_back(p);
    agents.push_back({{"role", "scheduling"},
                      {"node", net_->graph().node_name(node)},
                      {"file", file},
                      {"dims", scheduling_[k].dims()},
                      {"input_layout", "aggregate backlog per held path after routing, scaled"},
                      {"paths", paths},
                      {"output_groups", scheduling_[k].head().groups}});
  }
  nn::save(critic_, dir / "critic.mlp");
  agents.push_back({{"role", "critic"},
                    {"file", "critic.mlp"},
                    {"dims", critic_.dims()},
                    {"input_layout", "routing input then every actor output in agent order"}});
  manifest["agents"] = agents;
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw nn::CheckpointError("failed writing checkpoint manifest in " + dir.string());
}

void CdrlAgents::load(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "manifest.json")) {
    throw nn::CheckpointError("no checkpoint manifest in " + dir.string());
  }
  nn::Mlp routing = nn::load(dir / "routing.mlp");
  expect_shape(routing, routing_, "routing actor");
  std::vector<nn::Mlp> scheduling;
  for (std::size_t k = 0; k < scheduling_.size(); ++k) {
    const std::string file = sched_file(*net_, sched_nodes_[k], k);
    if (!std::filesystem::exists(dir / file)) throw nn::CheckpointError("missing " + file + " in " + dir.string());
    scheduling.push_back(nn::load(dir / file));
    expect_shape(scheduling.back(), scheduling_[k], "scheduling actor " + file);
  }
  nn::Mlp critic = nn::load(dir / "critic.mlp");
  expect_shape(critic, critic_, "critic");

  routing_ = routing_target_ = std::move(routing);
  scheduling_ = scheduling_target_ = std::move(scheduling);
  critic_ = critic_target_ = std::move(critic);
  routing_opt_ = nn::Adam(routing_, config_.actor_adam);
  scheduling_opt_.clear();
  for (const auto& s : scheduling_) scheduling_opt_.emplace_back(s, config_.actor_adam);
  critic_opt_ = nn::Adam(critic_, config_.critic_adam);
}

}  // namespace cdrl
