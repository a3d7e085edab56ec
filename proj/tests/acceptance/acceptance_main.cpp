// Acceptance suite: one PASS/FAIL line per criterion.
//   cdrl_acceptance            all criteria
//   cdrl_acceptance fast       everything except desk-scale training
//   cdrl_acceptance training   desk-scale training only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "cdrl/harness.hpp"
#include "support/fixtures.hpp"
#include "support/grad_check.hpp"
#include "support/queue_oracle.hpp"

using namespace cdrl;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& id, const std::string& title, const std::function<Verdict()>& body,
            double limit_seconds = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_seconds > 0.0 && s > limit_seconds) {
    v.pass = false;
    v.detail += " (runtime over " + std::to_string(static_cast<int>(limit_seconds)) + " s)";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fs", s);
  std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << " " << title << " (" << buf << ") " << v.detail << std::endl;
  if (!v.pass) ++failures;
}

// Per-process scratch directory, so concurrent runs never share files.
fs::path scratch(const std::string& name) {
  return fs::temp_directory_path() / (name + "_" + std::to_string(::getpid()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Verdict queue_oracle() {
  const Network net = cdrl::testing::line3_network();
  LifetimeEnv env(net);
  std::mt19937_64 rng(2024);
  std::size_t steps = 0;
  for (int seq = 0; seq < 1000; ++seq) {
    QueueState s = env.reset(static_cast<std::uint64_t>(seq));
    for (int t = 0; t < 20; ++t, ++steps) {
      const ArrivalBatch b = env.sample_arrivals();
      const NetAction a = cdrl::testing::random_feasible_action(env, s, b, rng);
      const LifetimeCounts injected = env.inject(s, a.route);
      const StepOutcome out = env.step(s, a, b);
      const auto want = cdrl::testing::oracle_step(net, s.backlog, a);
      if (!(out.next.backlog == want.next) || out.delivered != want.delivered || out.expired != want.expired ||
          out.dropped != want.dropped) {
        return {false, "mismatch in sequence " + std::to_string(seq) + " step " + std::to_string(t)};
      }
      std::int64_t arrived = 0;
      for (auto n : b.counts) arrived += n;
      if (arrived + s.backlog.total() !=
          out.next.backlog.total() + out.total_delivered() + out.total_expired() + out.total_dropped()) {
        return {false, "conservation violated in sequence " + std::to_string(seq)};
      }
      for (NodeId i = 0; i < net.node_count(); ++i) {
        for (std::size_t c = 0; c < net.commodity_count(); ++c) {
          for (int l = 0; l <= net.max_lifetime(); ++l) {
            std::int64_t next = 0;
            for (std::size_t p : net.commodity_paths(c)) next += out.next.backlog.at(i, p, l);
            if (next != cdrl::testing::balance_rhs(net, injected, a, i, c, l)) {
              return {false, "commodity balance violated in sequence " + std::to_string(seq)};
            }
          }
        }
      }
      s = out.next;
    }
  }
  return {true, "1000 sequences, " + std::to_string(steps) + " steps"};
}

Verdict gradients() {
  std::mt19937_64 rng(77);
  double worst_p = 0.0, worst_x = 0.0;
  for (int k = 0; k < 20; ++k) {
    const nn::Mlp net = cdrl::testing::random_mlp(rng, k % 2 == 0);
    const auto r = cdrl::testing::check_gradients(net, rng);
    worst_p = std::max(worst_p, r.params);
    worst_x = std::max(worst_x, r.inputs);
  }
  return {worst_p <= 1e-4 && worst_x <= 1e-4,
          "max rel err params " + fmt(worst_p) + ", inputs " + fmt(worst_x)};
}

Verdict lagrangian_identity() {
  const Network net = cdrl::testing::edge_network();
  LifetimeEnv env(net);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lam(0.0, 5.0), disc(0.5, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> lambda{lam(rng), lam(rng)};
    const double gamma = disc(rng);
    QueueState s = env.reset(static_cast<std::uint64_t>(k));
    double g = 1.0, ret = 0.0, cost = 0.0;
    std::vector<double> m_sum(2, 0.0);
    for (int t = 0; t < 20; ++t) {
      const ArrivalBatch b = env.sample_arrivals();
      const StepOutcome out = env.step(s, cdrl::testing::random_feasible_action(env, s, b, rng), b);
      std::vector<double> m{throughput_signal(out, net, 0), throughput_signal(out, net, 1)};
      ret += g * shaped_reward(out.cost_normalized, m, lambda);
      cost += g * out.cost_normalized;
      for (std::size_t c = 0; c < 2; ++c) m_sum[c] += g * m[c];
      g *= gamma;
      s = out.next;
    }
    const double rhs = -cost + lambda[0] * m_sum[0] + lambda[1] * m_sum[1];
    worst = std::max(worst, std::abs(ret - rhs));
  }
  return {worst <= 1e-9, "max abs diff " + fmt(worst) + " over 100 trajectories"};
}

Verdict dual_properties() {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 3.0);
  const std::vector<Commodity> commodities = cdrl::testing::edge_network().commodities();
  for (int run = 0; run < 100; ++run) {
    DualState s = init_lambda(commodities, DualConfig{});
    for (int k = 0; k < 1000; ++k) {
      const std::vector<double> mhat{noise(rng), noise(rng)};
      dual_update(s, mhat);
      if (s.lambda[0] < 0.0 || s.lambda[1] < 0.0) return {false, "negative multiplier"};
    }
  }
  DualState s = init_lambda({commodities[0]}, DualConfig{});
  const std::vector<double> one{1.0};
  int updates = 0;
  while (s.lambda[0] > 0.0 && updates < 10000) {
    dual_update(s, one);
    ++updates;
  }
  const int expected = static_cast<int>(std::ceil(1.25 * std::sqrt(6.0 * 0.7) / 0.005));
  return {updates == 513 && expected == 513 && s.lambda[0] == 0.0,
          "lambda0 " + fmt(init_lambda({commodities[0]}, DualConfig{}).lambda[0]) + " reached 0 after " +
              std::to_string(updates) + " updates"};
}

Verdict epsilon_schedule() {
  bool mono = true;
  for (std::size_t k = 1; k < 5000; ++k) mono = mono && exploration_epsilon(k) <= exploration_epsilon(k - 1);
  const bool ok = exploration_epsilon(0) == 1.0 && exploration_epsilon(459) == 0.01 && exploration_epsilon(458) > 0.01;
  return {ok && mono, "eps(0)=" + fmt(exploration_epsilon(0)) + " eps(458)=" + fmt(exploration_epsilon(458)) +
                          " eps(459)=" + fmt(exploration_epsilon(459))};
}

Verdict desk_training() {
  const fs::path root = scratch("cdrl_acceptance_training");
  fs::remove_all(root);
  int good = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    ExperimentConfig cfg = default_config();
    cfg.seed = seed;
    cfg.output_dir = (root / ("cdrl_" + std::to_string(seed))).string();
    const TrainingResult r = run_training(cfg);
    cfg.output_dir = (root / ("umw_" + std::to_string(seed))).string();
    const PolicySummary umw = run_baseline(cfg, "umw");
    bool ok = r.test.mean_cost <= umw.mean_cost;
    for (std::size_t c = 0; c < cfg.commodities.size(); ++c) {
      ok = ok && r.test.reliability[c] >= cfg.commodities[c].reliability - 0.02;
    }
    good += ok;
    detail += " | seed " + std::to_string(seed) + (ok ? " ok" : " miss") + ": model " + r.test.model + " rel (" +
              fmt(r.test.reliability[0]) + ", " + fmt(r.test.reliability[1]) + ") cost " + fmt(r.test.mean_cost) +
              " vs umw " + fmt(umw.mean_cost);
    std::cout << "  training seed " << seed << detail.substr(detail.rfind('|') + 1) << std::endl;
  }
  fs::remove_all(root);
  return {good >= 2, std::to_string(good) + "/3 seeds" + detail};
}

Verdict baseline_sanity() {
  ExperimentConfig cfg = default_config();
  const fs::path root = scratch("cdrl_acceptance_baselines");
  fs::remove_all(root);
  cfg.output_dir = root.string();
  const auto rows = run_sweep(cfg, {6, 10}, {"bp", "umw"});
  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    const bool meets = r.reliability[0] >= r.target[0] && r.reliability[1] >= r.target[1];
    if (r.rate == 6.0) ok = ok && meets;
    detail += r.policy + "@" + fmt(r.rate) + " rel (" + fmt(r.reliability[0]) + ", " + fmt(r.reliability[1]) +
              ") cost " + fmt(r.mean_cost) + "; ";
  }
  const auto& bp10 = rows[2];
  detail += std::string("[info, non-blocking] BP at rate 10 ") +
            (bp10.reliability[0] < bp10.target[0] ? "misses" : "meets") + " commodity c1's target";
  fs::remove_all(root);
  return {ok, detail};
}

Verdict determinism() {
  const fs::path root = scratch("cdrl_acceptance_determinism");
  fs::remove_all(root);
  ExperimentConfig cfg = default_config();
  cfg.phases = PhaseLengths{100, 50, 20};
  cfg.dual.window = 5;
  cfg.checkpoint_every = 5;
  cfg.seed = 17;
  std::string csv[2];
  for (int k = 0; k < 2; ++k) {
    cfg.output_dir = (root / std::to_string(k)).string();
    run_training(cfg);
    csv[k] = slurp(fs::path(cfg.output_dir) / "metrics.csv");
  }
  std::string base[2];
  for (int k = 0; k < 2; ++k) {
    cfg.output_dir = (root / ("umw" + std::to_string(k))).string();
    run_baseline(cfg, "umw");
    base[k] = slurp(fs::path(cfg.output_dir) / "metrics.csv");
  }
  fs::remove_all(root);
  const bool ok = !csv[0].empty() && csv[0] == csv[1] && !base[0].empty() && base[0] == base[1];
  return {ok, "training metrics.csv " + std::to_string(csv[0].size()) + " bytes, " +
                  (csv[0] == csv[1] ? "identical" : "different") + "; baseline " +
                  (base[0] == base[1] ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "all";
  const bool fast = mode == "all" || mode == "fast";
  const bool training = mode == "all" || mode == "training";
  if (!fast && !training) {
    std::cerr << "usage: cdrl_acceptance [all|fast|training]\n";
    return 2;
  }
  if (fast) {
    report("AC1", "queue dynamics match the packet-level oracle", queue_oracle, 10.0);
    report("AC2", "analytic gradients match finite differences", gradients, 30.0);
    report("AC3", "discounted reward equals the Lagrangian decomposition", lagrangian_identity, 10.0);
    report("AC4", "dual multipliers stay non-negative and hit zero on schedule", dual_properties);
    report("AC5", "exploration schedule", epsilon_schedule);
  }
  if (training) {
    report("AC6", "desk-scale training beats UMW cost while meeting reliability", desk_training);
  }
  if (fast) {
    report("AC7", "baselines meet reliability targets at low load", baseline_sanity);
    report("AC8", "identical config and seed give byte-identical metrics", determinism);
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
