#include <iostream>

#include "CLI11.hpp"

#include "cdrl/harness.hpp"

using namespace cdrl;

int main(int argc, char** argv) {
  CLI::App app{"Lifetime-queue network simulator with constrained multi-agent RL and BP/UMW baselines"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool paper_scale = false;
  bool quiet = false;
  std::size_t log_every = 10;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "YAML experiment config (default: built-in edge topology)");
    cmd->add_option("--seed", seed, "Master seed (overrides the config)");
    cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
    cmd->add_flag("--paper-scale", paper_scale, "Use 20000/10000/2000 train/improve/test episodes");
    cmd->add_flag("-q,--quiet", quiet, "No progress output");
  };

  auto* train = app.add_subcommand("train", "Train CDRL agents, then test the best checkpoint");
  common(train);
  train->add_option("--log-every", log_every, "Iterations between progress lines")->check(CLI::PositiveNumber);

  std::string checkpoint;
  auto* eval = app.add_subcommand("eval", "Test a saved checkpoint directory without updates");
  common(eval);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint directory (e.g. runs/edge/checkpoints/best)")->required();

  std::string policy;
  auto* baseline = app.add_subcommand("baseline", "Test a non-learning baseline");
  common(baseline);
  baseline->add_option("--policy", policy, "Baseline policy")->check(CLI::IsMember({"bp", "umw"}));

  std::vector<double> rates{6, 8, 10};
  std::vector<std::string> policies{"bp", "umw"};
  auto* sweep = app.add_subcommand("sweep", "Arrival-rate sweep over policies");
  common(sweep);
  sweep->add_option("--rates", rates, "Mean arrival rates applied to every commodity")->delimiter(',');
  sweep->add_option("--policies", policies, "Policies among bp, umw, cdrl")
      ->delimiter(',')
      ->check(CLI::IsMember({"bp", "umw", "cdrl"}));

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (app.get_subcommands().front()->count("--seed")) cfg.seed = seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (paper_scale) apply_paper_scale(cfg);
    RunOptions opts;
    opts.log = quiet ? nullptr : &std::cerr;
    opts.log_every = log_every;

    if (train->parsed()) {
      const TrainingResult r = run_training(cfg, opts);
      std::cout << summary_header(cfg.commodities) << '\n' << summary_row(r.test) << '\n';
      if (!r.used_checkpoint) std::cerr << "no checkpoint passed the criteria; tested the final model\n";
    } else if (eval->parsed()) {
      const PolicySummary s = run_eval(cfg, checkpoint);
      std::cout << summary_header(cfg.commodities) << '\n' << summary_row(s) << '\n';
    } else if (baseline->parsed()) {
      const std::string name = policy.empty() ? cfg.policy : policy;
      const PolicySummary s = run_baseline(cfg, name);
      std::cout << summary_header(cfg.commodities) << '\n' << summary_row(s) << '\n';
    } else if (sweep->parsed()) {
      const auto rows = run_sweep(cfg, rates, policies, opts);
      std::cout << summary_header(cfg.commodities) << '\n';
      for (const auto& r : rows) std::cout << summary_row(r) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
