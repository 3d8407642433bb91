#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ape/config.hpp"

namespace ape {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

enum class TrainMode { Ape, NearOptimal, Random };

std::string mode_name(TrainMode mode);
std::optional<TrainMode> parse_mode(const std::string& name);

/// Run layout: <out>/<mode>/seed_<n>/{policy.json, values.json, train_log.csv, meta.json}
std::filesystem::path seed_dir(const std::filesystem::path& out, TrainMode mode, std::uint64_t seed);

struct TrainRequest {
  ExperimentConfig config;
  TrainMode mode = TrainMode::Ape;
  /// Baseline stop threshold; when absent it is read from the companion
  /// APE checkpoint of the same seed.
  std::optional<double> threshold;
};

int cmd_train(const TrainRequest& request, std::ostream& log);

struct CloneRequest {
  ExperimentConfig config;
  std::filesystem::path checkpoint;
  std::filesystem::path out_dir;  // defaults to the checkpoint's directory
  std::uint64_t seed = 0;
  bool save_dataset = false;
};

int cmd_clone(const CloneRequest& request, std::ostream& log);

struct EvalRequest {
  ExperimentConfig config;
  std::vector<std::filesystem::path> policies;
  std::filesystem::path out_dir;  // defaults to each policy's directory
};

int cmd_eval(const EvalRequest& request, std::ostream& log);

struct ReportRequest {
  ExperimentConfig config;
  std::filesystem::path run_dir;
  std::filesystem::path out_file;  // defaults to <run_dir>/results.csv
};

int cmd_report(const ReportRequest& request, std::ostream& log);

/// Arrow grids and hitting-time heatmap for one policy file, to `out`.
int cmd_render(const ExperimentConfig& config, const std::filesystem::path& policy, std::ostream& out);

/// Grid for a policy file: the configured grid, checked against the file's size.
GridSpec grid_for(const ExperimentConfig& config, int width, int height);

}  // namespace ape
