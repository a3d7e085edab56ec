#include "cdrl/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace cdrl {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<double> throughput_signals(const StepOutcome& out, const Network& net) {
  std::vector<double> m(net.commodity_count());
  for (std::size_t c = 0; c < m.size(); ++c) m[c] = throughput_signal(out, net, c);
  return m;
}

EpisodeStats blank_stats(const Network& net) {
  EpisodeStats e;
  const std::size_t nc = net.commodity_count();
  e.arrivals.assign(nc, 0);
  e.delivered.assign(nc, 0);
  e.expired.assign(nc, 0);
  e.dropped.assign(nc, 0);
  return e;
}

void accumulate(EpisodeStats& e, const StepOutcome& out, double reward) {
  for (std::size_t c = 0; c < e.arrivals.size(); ++c) {
    e.arrivals[c] += out.arrived[c];
    e.delivered[c] += out.delivered[c];
    e.expired[c] += out.expired[c];
    e.dropped[c] += out.dropped[c];
  }
  e.cost += out.cost;
  e.reward += reward;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& config, const std::string& command,
                    double seconds, nlohmann::json extra) {
  nlohmann::json m = std::move(extra);
  m["tool"] = "cdrlnc";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["config_hash"] = config_hash(config);
  m["seed"] = config.seed;
  m["checkpoint_format_version"] = nn::kCheckpointFormatVersion;
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  m["compiler"] = __VERSION__;
  m["finished_utc"] = utc_now();
  m["wall_clock_seconds"] = seconds;
  std::ofstream out(dir / "manifest.json");
  out << m.dump(2) << '\n';
  std::ofstream cfg(dir / "config.yaml");
  cfg << dump_config(config);
}

PolicySummary summarize(const std::string& policy, const ExperimentConfig& config,
                        const std::vector<EpisodeStats>& rows) {
  PolicySummary s;
  s.policy = policy;
  s.rate = config.commodities.front().mean_rate;
  s.seed = config.seed;
  s.episodes = rows.size();
  const std::size_t nc = config.commodities.size();
  std::vector<std::int64_t> arrived(nc, 0), delivered(nc, 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < nc; ++c) {
      arrived[c] += r.arrivals[c];
      delivered[c] += r.delivered[c];
    }
    s.mean_cost += r.cost;
    s.mean_reward += r.reward;
  }
  if (!rows.empty()) {
    s.mean_cost /= static_cast<double>(rows.size());
    s.mean_reward /= static_cast<double>(rows.size());
  }
  for (std::size_t c = 0; c < nc; ++c) {
    s.reliability.push_back(arrived[c] == 0 ? 1.0
                                            : static_cast<double>(delivered[c]) / static_cast<double>(arrived[c]));
    s.target.push_back(config.commodities[c].reliability);
  }
  return s;
}

}  // namespace

std::vector<double> EpisodeStats::reliability() const {
  std::vector<double> r(arrivals.size());
  for (std::size_t c = 0; c < r.size(); ++c) {
    r[c] = arrivals[c] == 0 ? 1.0 : static_cast<double>(delivered[c]) / static_cast<double>(arrivals[c]);
  }
  return r;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& file, const std::vector<Commodity>& commodities)
    : out_(file) {
  if (!out_) throw std::runtime_error("cannot write " + file.string());
  out_ << header(commodities) << '\n';
}

std::string MetricsWriter::header(const std::vector<Commodity>& commodities) {
  std::string h = "episode,phase,iteration,epsilon";
  for (const char* field : {"arrivals", "delivered", "expired", "dropped", "reliability"}) {
    for (const Commodity& c : commodities) h += std::string(",") + field + "_" + c.name;
  }
  h += ",cost,reward";
  for (const Commodity& c : commodities) h += ",lambda_" + c.name;
  for (const Commodity& c : commodities) h += ",mhat_" + c.name;
  h += ",checkpoint";
  return h;
}

std::string MetricsWriter::row(const EpisodeStats& e) {
  std::ostringstream s;
  s << e.episode << ',' << e.phase << ',' << e.iteration << ',' << num(e.epsilon);
  for (const auto* v : {&e.arrivals, &e.delivered, &e.expired, &e.dropped}) {
    for (std::int64_t x : *v) s << ',' << x;
  }
  for (double r : e.reliability()) s << ',' << num(r);
  s << ',' << num(e.cost) << ',' << num(e.reward);
  for (double l : e.lambda) s << ',' << num(l);
  for (std::size_t c = 0; c < e.arrivals.size(); ++c) {
    s << ',';
    if (!e.mhat.empty()) s << num(e.mhat[c]);
  }
  s << ',' << (e.checkpoint ? 1 : 0);
  return s.str();
}

void MetricsWriter::write(const EpisodeStats& e) { out_ << row(e) << '\n'; }

std::string summary_header(const std::vector<Commodity>& commodities) {
  std::string h = "policy,rate,seed,episodes,model,mean_cost,mean_reward";
  for (const Commodity& c : commodities) h += ",reliability_" + c.name + ",target_" + c.name;
  return h;
}

std::string summary_row(const PolicySummary& s) {
  std::ostringstream out;
  out << s.policy << ',' << num(s.rate) << ',' << s.seed << ',' << s.episodes << ',' << s.model << ','
      << num(s.mean_cost) << ',' << num(s.mean_reward);
  for (std::size_t c = 0; c < s.reliability.size(); ++c) out << ',' << num(s.reliability[c]) << ',' << num(s.target[c]);
  return out.str();
}

void write_summary(const std::filesystem::path& file, const std::vector<Commodity>& commodities,
                   const std::vector<PolicySummary>& rows) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << summary_header(commodities) << '\n';
  for (const auto& r : rows) out << summary_row(r) << '\n';
}

std::uint64_t test_arrival_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(master, "arrivals/test", index);
}

PolicySummary evaluate_policy(const ExperimentConfig& config, const Network& net, Policy& policy,
                              const std::vector<double>& lambda, std::vector<EpisodeStats>* rows) {
  LifetimeEnv env(net);
  std::vector<EpisodeStats> local;
  for (std::size_t e = 0; e < config.phases.test; ++e) {
    QueueState s = env.reset(test_arrival_seed(config.seed, e));
    policy.reset();
    EpisodeStats stats = blank_stats(net);
    stats.phase = "test";
    stats.lambda = lambda;
    for (int t = 0; t < config.episode_length; ++t) {
      const ArrivalBatch b = env.sample_arrivals();
      const StepOutcome out = env.step(s, policy.decide(s, b), b);
      accumulate(stats, out, shaped_reward(out.cost_normalized, throughput_signals(out, net), lambda));
      s = out.next;
    }
    local.push_back(std::move(stats));
  }
  PolicySummary summary = summarize(policy.name(), config, local);
  if (rows) rows->insert(rows->end(), local.begin(), local.end());
  return summary;
}

TrainingResult run_training(const ExperimentConfig& config, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const Network net = config.build_network();
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir / "checkpoints");
  MetricsWriter metrics(dir / "metrics.csv", config.commodities);

  AgentConfig agent_cfg = config.agent;
  agent_cfg.gamma = config.gamma;
  CdrlAgents agents(net, agent_cfg, derive_seed(config.seed, "init"));
  ReplayBuffer buffer(agent_cfg.buffer_capacity);
  Rng explore_rng = make_rng(config.seed, "exploration");
  Rng replay_rng = make_rng(config.seed, "replay");
  LifetimeEnv env(net);

  TrainingResult result;
  result.dual = init_lambda(config.commodities, config.dual);
  DualState& dual = result.dual;
  const std::size_t nc = net.commodity_count();
  const std::size_t v_eps = config.episodes_per_iteration;
  std::size_t episode = 0;
  std::size_t iteration = 0;

  struct Phase {
    const char* name;
    std::size_t iterations;
  };
  for (const Phase phase : {Phase{"train", config.phases.train / v_eps}, Phase{"improve", config.phases.improve / v_eps}}) {
    for (std::size_t k = 0; k < phase.iterations; ++k, ++iteration) {
      const double epsilon = std::max(std::pow(config.exploration.decay, static_cast<double>(k)), config.exploration.floor);
      std::vector<std::vector<std::vector<double>>> signals;
      std::vector<EpisodeStats> rows;
      for (std::size_t v = 0; v < v_eps; ++v, ++episode) {
        QueueState s = env.reset(derive_seed(config.seed, "arrivals/train", episode));
        EpisodeStats stats = blank_stats(net);
        stats.episode = episode;
        stats.phase = phase.name;
        stats.iteration = iteration;
        stats.epsilon = epsilon;
        stats.lambda = dual.lambda;
        std::vector<std::vector<double>> m_episode;
        ArrivalBatch b = env.sample_arrivals();
        for (int t = 0; t < config.episode_length; ++t) {
          const Decision d = agents.act(s, b, epsilon, explore_rng);
          const StepOutcome out = env.step(s, d.action, b);
          const ArrivalBatch next = env.sample_arrivals();
          auto m = throughput_signals(out, net);
          const double r = shaped_reward(out.cost_normalized, m, dual.lambda);
          buffer.push(agents.make_transition(s, b, d, r, out.next, next));
          accumulate(stats, out, r);
          m_episode.push_back(std::move(m));
          s = out.next;
          b = next;
        }
        signals.push_back(std::move(m_episode));
        rows.push_back(std::move(stats));
      }

      if (buffer.size() >= agent_cfg.batch_size) agents.update(buffer, replay_rng);

      const std::vector<double> mhat = estimate_mhat(signals, config.gamma);
      double mean_reward = 0.0;
      for (const auto& r : rows) mean_reward += r.reward;
      mean_reward /= static_cast<double>(rows.size());
      dual_update(dual, mhat);
      dual.record(mean_reward);

      bool saved = false;
      if ((iteration + 1) % config.checkpoint_every == 0 && checkpoint_ok(dual, mhat)) {
        agents.save(dir / "checkpoints" / "best");
        ++result.checkpoints_saved;
        saved = true;
      }
      rows.back().mhat = mhat;
      rows.back().checkpoint = saved;
      for (const auto& r : rows) metrics.write(r);

      if (options.log && (iteration + 1) % options.log_every == 0) {
        std::vector<std::int64_t> arrived(nc, 0), delivered(nc, 0);
        double cost = 0.0;
        for (const auto& r : rows) {
          for (std::size_t c = 0; c < nc; ++c) {
            arrived[c] += r.arrivals[c];
            delivered[c] += r.delivered[c];
          }
          cost += r.cost;
        }
        *options.log << phase.name << " iter " << iteration + 1 << " eps " << num(epsilon);
        for (std::size_t c = 0; c < nc; ++c) {
          *options.log << " rel_" << config.commodities[c].name << ' '
                       << num(arrived[c] ? static_cast<double>(delivered[c]) / static_cast<double>(arrived[c]) : 1.0)
                       << " lambda_" << config.commodities[c].name << ' ' << num(dual.lambda[c]);
        }
        *options.log << " cost " << num(cost / static_cast<double>(rows.size())) << (saved ? " [saved]" : "") << '\n';
      }
    }
  }
  agents.save(dir / "checkpoints" / "final");

  result.used_checkpoint = result.checkpoints_saved > 0;
  result.model_dir = dir / "checkpoints" / (result.used_checkpoint ? "best" : "final");
  CdrlAgents tested(net, agent_cfg, 0);
  tested.load(result.model_dir);
  CdrlPolicy policy(tested);
  std::vector<EpisodeStats> test_rows;
  result.test = evaluate_policy(config, net, policy, dual.lambda, &test_rows);
  result.test.model = result.used_checkpoint ? "best" : "final";
  for (auto& r : test_rows) {
    r.episode = episode++;
    r.iteration = iteration;
    metrics.write(r);
  }
  write_summary(dir / "summary.csv", config.commodities, {result.test});

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_manifest(dir, config, "train", seconds,
                 {{"policy", "cdrl"},
                  {"model", result.test.model},
                  {"checkpoints_saved", result.checkpoints_saved},
                  {"iterations", iteration}});
  return result;
}

PolicySummary run_eval(const ExperimentConfig& config, const std::filesystem::path& checkpoint,
                       const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const Network net = config.build_network();
  AgentConfig agent_cfg = config.agent;
  agent_cfg.gamma = config.gamma;
  CdrlAgents agents(net, agent_cfg, 0);
  agents.load(checkpoint);
  CdrlPolicy policy(agents);
  const std::vector<double> lambda = init_lambda(config.commodities, config.dual).lambda;

  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  std::vector<EpisodeStats> rows;
  PolicySummary s = evaluate_policy(config, net, policy, lambda, &rows);
  s.model = checkpoint.filename().string();
  MetricsWriter metrics(dir / "metrics.csv", config.commodities);
  for (std::size_t e = 0; e < rows.size(); ++e) {
    rows[e].episode = e;
    metrics.write(rows[e]);
  }
  write_summary(dir / "summary.csv", config.commodities, {s});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_manifest(dir, config, "eval", seconds, {{"policy", "cdrl"}, {"checkpoint", checkpoint.string()}});
  if (options.log) *options.log << summary_header(config.commodities) << '\n' << summary_row(s) << '\n';
  return s;
}

namespace {

std::unique_ptr<Policy> make_baseline(const std::string& name, const Network& net) {
  if (name == "bp") return std::make_unique<BackpressurePolicy>(net);
  if (name == "umw") return std::make_unique<UmwPolicy>(net);
  throw std::invalid_argument("unknown baseline policy '" + name + "' (expected bp or umw)");
}

}  // namespace

PolicySummary run_baseline(const ExperimentConfig& config, const std::string& policy_name,
                           const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const Network net = config.build_network();
  auto policy = make_baseline(policy_name, net);
  const std::vector<double> lambda = init_lambda(config.commodities, config.dual).lambda;

  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  std::vector<EpisodeStats> rows;
  const PolicySummary s = evaluate_policy(config, net, *policy, lambda, &rows);
  MetricsWriter metrics(dir / "metrics.csv", config.commodities);
  for (std::size_t e = 0; e < rows.size(); ++e) {
    rows[e].episode = e;
    metrics.write(rows[e]);
  }
  write_summary(dir / "summary.csv", config.commodities, {s});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_manifest(dir, config, "baseline", seconds, {{"policy", policy_name}});
  if (options.log) *options.log << summary_header(config.commodities) << '\n' << summary_row(s) << '\n';
  return s;
}

std::vector<PolicySummary> run_sweep(const ExperimentConfig& config, const std::vector<double>& rates,
                                     const std::vector<std::string>& policies, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  std::vector<PolicySummary> out;
  for (double rate : rates) {
    for (const std::string& policy : policies) {
      ExperimentConfig point = config;
      for (Commodity& c : point.commodities) c.mean_rate = rate;
      point.policy = policy;
      point.output_dir = (dir / (policy + "_rate_" + num(rate))).string();
      if (policy == "cdrl") {
        out.push_back(run_training(point, options).test);
      } else {
        out.push_back(run_baseline(point, policy));
      }
      out.back().rate = rate;
      if (options.log) *options.log << summary_row(out.back()) << '\n';
    }
  }
  write_summary(dir / "summary.csv", config.commodities, out);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  nlohmann::json rate_list = rates;
  write_manifest(dir, config, "sweep", seconds, {{"rates", rate_list}, {"policies", policies}});
  return out;
}

}  // namespace cdrl
