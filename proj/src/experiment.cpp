#include "ape/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ape/baselines.hpp"
#include "ape/cloner.hpp"
#include "ape/exact_eval.hpp"
#include "ape/policy_io.hpp"
#include "ape/render.hpp"
#include "ape/trainer.hpp"

namespace ape {

namespace fs = std::filesystem;
using nlohmann::json;

std::string mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::Ape: return "ape";
    case TrainMode::NearOptimal: return "near-optimal";
    case TrainMode::Random: return "random";
  }
  return "ape";
}

std::optional<TrainMode> parse_mode(const std::string& name) {
  for (TrainMode m : {TrainMode::Ape, TrainMode::NearOptimal, TrainMode::Random})
    if (mode_name(m) == name) return m;
  return std::nullopt;
}

fs::path seed_dir(const fs::path& out, TrainMode mode, std::uint64_t seed) {
  return out / mode_name(mode) / ("seed_" + std::to_string(seed));
}

GridSpec grid_for(const ExperimentConfig& config, int width, int height) {
  GridSpec grid = config.grid;
  if (grid.width != width || grid.height != height)
    throw std::invalid_argument("policy is " + std::to_string(width) + "x" + std::to_string(height) +
                                " but the configured grid is " + std::to_string(grid.width) + "x" +
                                std::to_string(grid.height));
  grid.validate();
  return grid;
}

namespace {

bool ensure_writable(const fs::path& dir, std::ostream& log) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    log << "error: cannot create " << dir.string() << ": " << ec.message() << "\n";
    return false;
  }
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) {
      log << "error: " << dir.string() << " is not writable\n";
      return false;
    }
  }
  fs::remove(probe, ec);
  return true;
}

void write_checkpoint(const fs::path& dir, const GridSpec& grid, const EnsembleParams& params,
                      const ValueTable& values, const std::vector<IterationRecord>& log, const json& meta) {
  fs::create_directories(dir);
  save_policy(dir / "policy.json", PolicyDump{grid.width, grid.height, params});
  write_text_file(dir / "values.json", values_to_json(values).dump() + "\n");
  write_text_file(dir / "train_log.csv", training_log_csv(log));
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

// Exact returns of an existing checkpoint.
std::pair<double, double> checkpoint_returns(const fs::path& policy_file, const ExperimentConfig& config) {
  const PolicyDump dump = load_policy(policy_file);
  const GridSpec grid = grid_for(config, dump.width, dump.height);
  return {ensemble_return(dump.params, grid), clone_return(dump.params, grid)};
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

}  // namespace

int cmd_train(const TrainRequest& request, std::ostream& log) {
  const ExperimentConfig& config = request.config;
  try {
    config.validate();
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const fs::path out = config.output_dir;
  if (!ensure_writable(out, log)) return kExitUsage;
  write_text_file(out / ("config_" + mode_name(request.mode) + ".json"), config_to_json(config).dump(2) + "\n");

  int rc = kExitOk;
  for (std::uint64_t seed : config.seeds) {
    TrainConfig tc = config.train;
    tc.seed = seed;
    const fs::path dir = seed_dir(out, request.mode, seed);
    json meta = {{"mode", mode_name(request.mode)}, {"seed", seed}};

    if (request.mode == TrainMode::Ape) {
      const TrainResult res = train(config.grid, tc);
      meta["beta"] = tc.beta;
      meta["diverged"] = res.diverged;
      meta["message"] = res.message;
      meta["iterations"] = res.log.size();
      meta["timesteps"] = res.log.empty() ? 0 : res.log.back().timesteps;
      meta["pe_return"] = ensemble_return(res.params, config.grid);
      meta["clone_return"] = clone_return(res.params, config.grid);
      write_checkpoint(dir, config.grid, res.params, res.values, res.log, meta);
      log << "seed " << seed << ": pe " << fmt(meta["pe_return"].get<double>()) << "  clone "
          << fmt(meta["clone_return"].get<double>()) << (res.diverged ? "  DIVERGED" : "") << "\n";
      if (res.diverged) {
        log << "error: " << res.message << "\n";
        rc = kExitFailure;
      }
      continue;
    }

    StopRule rule;
    rule.target_metric = request.mode == TrainMode::NearOptimal ? StopRule::Metric::EnsembleReturn
                                                                : StopRule::Metric::CloneReturn;
    if (request.threshold) {
      rule.threshold = *request.threshold;
    } else {
      const fs::path companion = seed_dir(out, TrainMode::Ape, seed) / "policy.json";
      if (!fs::exists(companion)) {
        log << "error: no --threshold given and no APE checkpoint at " << companion.string() << "\n";
        return kExitUsage;
      }
      try {
        const auto [pe, clone] = checkpoint_returns(companion, config);
        rule.threshold = request.mode == TrainMode::NearOptimal ? pe : clone;
      } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitUsage;
      }
    }
    try {
      rule.validate(config.grid);
    } catch (const std::exception& e) {
      log << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    const VanillaResult res = train_vanilla(config.grid, tc, rule);
    meta["beta"] = 0.0;
    meta["threshold"] = rule.threshold;
    meta["stop_iteration"] = res.iteration;
    meta["met"] = res.met;
    meta["warning"] = res.warning;
    meta["diverged"] = false;
    meta["message"] = res.message;
    meta["pe_return"] = ensemble_return(res.params, config.grid);
    meta["clone_return"] = clone_return(res.params, config.grid);
    write_checkpoint(dir, config.grid, res.params, res.values, res.log, meta);
    log << "seed " << seed << ": stopped at iteration " << res.iteration << "  pe "
        << fmt(meta["pe_return"].get<double>()) << "  clone " << fmt(meta["clone_return"].get<double>())
        << (res.warning ? "  WARNING: " + res.message : "") << "\n";
  }
  return rc;
}

int cmd_clone(const CloneRequest& request, std::ostream& log) {
  if (!fs::exists(request.checkpoint)) {
    log << "error: checkpoint " << request.checkpoint.string() << " not found\n";
    return kExitUsage;
  }
  PolicyDump dump;
  GridSpec grid;
  try {
    request.config.validate();
    dump = load_policy(request.checkpoint);
    grid = grid_for(request.config, dump.width, dump.height);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const fs::path out = request.out_dir.empty() ? request.checkpoint.parent_path() : request.out_dir;
  if (!ensure_writable(out.empty() ? fs::path(".") : out, log)) return kExitUsage;

  Rng rng{request.seed, 0xC1};
  const CloneDataset data = collect(dump.params, grid, request.config.clone.n_pairs, rng);
  const StatePolicy cloned = behavior_clone(data, grid, request.config.clone.options);
  const StatePolicy oracle = exact_clone(dump.params, grid);

  save_policy(out / "clone.json", dump_state_policy(cloned, grid));
  save_policy(out / "exact_clone.json", dump_state_policy(oracle, grid));
  if (request.save_dataset) save_dataset_csv(out / "dataset.csv", data);

  log << "pairs " << data.size() << "  ensemble " << fmt(ensemble_return(dump.params, grid)) << "  clone "
      << fmt(evaluate(cloned, grid).average_return) << "  exact clone " << fmt(evaluate(oracle, grid).average_return)
      << "\n";
  return kExitOk;
}

int cmd_eval(const EvalRequest& request, std::ostream& log) {
  if (request.policies.empty()) {
    log << "error: no policy files given\n";
    return kExitUsage;
  }
  for (const fs::path& file : request.policies) {
    PolicyDump dump;
    GridSpec grid;
    try {
      dump = load_policy(file);
      grid = grid_for(request.config, dump.width, dump.height);
    } catch (const std::exception& e) {
      log << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    const fs::path dir = request.out_dir.empty() ? file.parent_path() : request.out_dir;
    if (!ensure_writable(dir.empty() ? fs::path(".") : dir, log)) return kExitUsage;
    const fs::path base = dir / file.stem();
    auto write_heatmap = [&](const std::string& suffix, const std::vector<double>& hitting) {
      write_text_file(base.string() + suffix + ".txt", heatmap_ascii(hitting, grid));
      write_text_file(base.string() + suffix + ".pgm", heatmap_pgm(hitting, grid));
    };

    json out = {{"file", file.string()}};
    std::string arrows;
    if (dump.params.n_contexts() == 1) {
      const StatePolicy policy = expert_policy(dump.params, 0);
      const EvalReport report = evaluate(policy, grid);
      out["kind"] = "policy";
      out["report"] = report_to_json(report);
      write_heatmap(".heatmap", report.per_state_hitting_time);
      arrows = arrow_grid(policy, grid);
      log << file.string() << ": return " << fmt(report.average_return) << "\n";
    } else {
      const int n = dump.params.n_contexts();
      std::vector<double> mean_hitting(static_cast<std::size_t>(grid.n_states()), 0.0);
      json experts = json::array();
      for (int c = 0; c < n; ++c) {
        const StatePolicy policy = expert_policy(dump.params, c);
        const EvalReport report = evaluate(policy, grid);
        for (State s = 0; s < grid.n_states(); ++s) mean_hitting[s] += report.per_state_hitting_time[s] / n;
        experts.push_back(report_to_json(report));
        arrows += "expert " + std::to_string(c) + "\n" + arrow_grid(policy, grid) + "\n";
      }
      const EvalReport clone = evaluate(exact_clone(dump.params, grid), grid);
      const double pe = ensemble_return(dump.params, grid);
      out["kind"] = "ensemble";
      out["ensemble_return"] = pe;
      out["ensemble_hitting_time"] = mean_hitting;
      out["experts"] = std::move(experts);
      out["exact_clone"] = report_to_json(clone);
      out["returns_difference"] = clone.average_return - pe;
      write_heatmap(".heatmap", mean_hitting);
      write_heatmap(".clone_heatmap", clone.per_state_hitting_time);
      log << file.string() << ": ensemble " << fmt(pe) << "  exact clone " << fmt(clone.average_return) << "\n";
    }
    write_text_file(base.string() + ".eval.json", out.dump(2) + "\n");
    write_text_file(base.string() + ".arrows.txt", arrows);
  }
  return kExitOk;
}

int cmd_report(const ReportRequest& request, std::ostream& log) {
  if (!fs::is_directory(request.run_dir)) {
    log << "error: run directory " << request.run_dir.string() << " not found\n";
    return kExitUsage;
  }
  std::ostringstream csv;
  csv << "method,pe_return_mean,pe_return_std,clone_return_mean,clone_return_std,returns_difference\n";
  int rows = 0;
  for (TrainMode mode : {TrainMode::Ape, TrainMode::NearOptimal, TrainMode::Random}) {
    const fs::path mode_dir = request.run_dir / mode_name(mode);
    if (!fs::is_directory(mode_dir)) continue;
    std::vector<fs::path> seeds;
    for (const auto& entry : fs::directory_iterator(mode_dir))
      if (entry.is_directory() && entry.path().filename().string().rfind("seed_", 0) == 0) seeds.push_back(entry.path());
    std::sort(seeds.begin(), seeds.end());

    std::vector<double> pe, clone;
    for (const fs::path& dir : seeds) {
      const fs::path policy = dir / "policy.json";
      if (!fs::exists(policy)) {
        log << "warning: skipping incomplete run " << dir.string() << "\n";
        continue;
      }
      try {
        if (fs::exists(dir / "meta.json") && json::parse(read_text_file(dir / "meta.json")).value("diverged", false)) {
          log << "warning: skipping diverged run " << dir.string() << "\n";
          continue;
        }
        const auto [p, c] = checkpoint_returns(policy, request.config);
        pe.push_back(p);
        clone.push_back(c);
      } catch (const std::exception& e) {
        log << "warning: skipping " << dir.string() << ": " << e.what() << "\n";
      }
    }
    if (pe.empty()) continue;
    auto mean = [](const std::vector<double>& x) {
      double t = 0.0;
      for (double v : x) t += v;
      return t / static_cast<double>(x.size());
    };
    auto stddev = [&](const std::vector<double>& x) {
      const double m = mean(x);
      double t = 0.0;
      for (double v : x) t += (v - m) * (v - m);
      return std::sqrt(t / static_cast<double>(x.size()));
    };
    csv << mode_name(mode) << ',' << fmt(mean(pe)) << ',' << fmt(stddev(pe)) << ',' << fmt(mean(clone)) << ','
        << fmt(stddev(clone)) << ',' << fmt(mean(clone) - mean(pe)) << '\n';
    ++rows;
  }
  if (rows == 0) {
    log << "error: no completed runs under " << request.run_dir.string() << "\n";
    return kExitFailure;
  }
  const fs::path out = request.out_file.empty() ? request.run_dir / "results.csv" : request.out_file;
  try {
    write_text_file(out, csv.str());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  log << csv.str();
  return kExitOk;
}

int cmd_render(const ExperimentConfig& config, const fs::path& policy_file, std::ostream& out) {
  PolicyDump dump;
  GridSpec grid;
  try {
    dump = load_policy(policy_file);
    grid = grid_for(config, dump.width, dump.height);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  for (int c = 0; c < dump.params.n_contexts(); ++c) {
    const StatePolicy policy = expert_policy(dump.params, c);
    out << "expert " << c << "\n" << arrow_grid(policy, grid) << "\nhitting time\n"
        << heatmap_ascii(evaluate(policy, grid).per_state_hitting_time, grid) << "\n";
  }
  if (dump.params.n_contexts() > 1) {
    const StatePolicy clone = exact_clone(dump.params, grid);
    out << "exact clone\n" << arrow_grid(clone, grid) << "\nhitting time\n"
        << heatmap_ascii(evaluate(clone, grid).per_state_hitting_time, grid);
  }
  return kExitOk;
}

}  // namespace ape
