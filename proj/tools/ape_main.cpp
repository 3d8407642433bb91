// Command-line front end for the APE experiments.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ape/experiment.hpp"
#include "ape/policy_io.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> beta;
  std::optional<long> total_timesteps;
  std::optional<long> n_pairs;
  std::optional<std::string> out;
  bool single_thread = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "experiment config JSON");
  cmd->add_option("--seed", o.seed, "run only this seed");
  cmd->add_option("--beta", o.beta, "observer reward weight");
  cmd->add_flag("--single-thread", o.single_thread, "collect rollouts on one thread");
}

// flag > file > default
ape::ExperimentConfig resolve(const Overrides& o) {
  ape::ExperimentConfig config = o.config_path.empty() ? ape::ExperimentConfig{} : ape::load_config(o.config_path);
  if (o.seed) config.seeds = {*o.seed};
  if (o.beta) config.train.beta = *o.beta;
  if (o.total_timesteps) config.train.total_timesteps = *o.total_timesteps;
  if (o.n_pairs) config.clone.n_pairs = *o.n_pairs;
  if (o.out) config.output_dir = *o.out;
  if (o.single_thread) config.train.threads = 1;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarially trained policy ensembles on a gridworld"};
  app.require_subcommand(1);
  Overrides o;

  std::string mode = "ape";
  std::optional<double> threshold;
  auto* train = app.add_subcommand("train", "train per-seed checkpoints");
  add_common(train, o);
  train->add_option("--mode", mode, "ape | near-optimal | random");
  train->add_option("--out", o.out, "output directory");
  train->add_option("--threshold", threshold, "baseline stop threshold (default: read from the APE run)");
  train->add_option("--total-timesteps", o.total_timesteps, "training budget in ensemble timesteps");

  std::string checkpoint;
  std::string out_dir;
  bool save_dataset = false;
  auto* clone = app.add_subcommand("clone", "collect pairs from a checkpoint and clone it");
  add_common(clone, o);
  clone->add_option("checkpoint", checkpoint, "policy.json of a trained ensemble")->required();
  clone->add_option("--out", out_dir, "output directory (default: next to the checkpoint)");
  clone->add_option("--n-pairs", o.n_pairs, "number of state-action pairs");
  clone->add_flag("--save-dataset", save_dataset, "also write dataset.csv");

  std::vector<std::string> files;
  auto* eval = app.add_subcommand("eval", "exact evaluation, heatmaps and arrow grids");
  add_common(eval, o);
  eval->add_option("policies", files, "policy files")->required();
  eval->add_option("--out", out_dir, "output directory (default: next to each policy)");

  std::string run_dir;
  auto* report = app.add_subcommand("report", "results table across seeds");
  add_common(report, o);
  report->add_option("run_dir", run_dir, "directory written by train")->required();
  report->add_option("--out", out_dir, "results CSV path (default: <run_dir>/results.csv)");

  std::string policy;
  auto* render = app.add_subcommand("render", "print arrow grids and hitting times");
  add_common(render, o);
  render->add_option("policy", policy, "policy file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ape::kExitOk : ape::kExitUsage;
  }

  ape::ExperimentConfig config;
  try {
    config = resolve(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ape::kExitUsage;
  }

  try {
    if (*train) {
      const auto m = ape::parse_mode(mode);
      if (!m) {
        std::cerr << "error: unknown mode '" << mode << "'\n";
        return ape::kExitUsage;
      }
      return ape::cmd_train({config, *m, threshold}, std::cerr);
    }
    if (*clone)
      return ape::cmd_clone({config, checkpoint, out_dir, config.seeds.front(), save_dataset}, std::cerr);
    if (*eval) return ape::cmd_eval({config, {files.begin(), files.end()}, out_dir}, std::cerr);
    if (*report) return ape::cmd_report({config, run_dir, out_dir}, std::cerr);
    if (*render) return ape::cmd_render(config, policy, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ape::kExitFailure;
  }
  return ape::kExitUsage;
}
