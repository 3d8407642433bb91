#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ape/cloner.hpp"
#include "ape/gridworld.hpp"
#include "ape/trainer.hpp"

namespace ape {

struct CloneConfig {
  long n_pairs = 1'000'000;
  CloneOptions options;
};

/// Experiment manifest. JSON layout:
///   {"grid": {...}, "train": {...}, "clone": {...}, "seeds": [...], "output_dir": "..."}
/// Missing keys keep their defaults; unknown keys are rejected.
struct ExperimentConfig {
  GridSpec grid;
  TrainConfig train;
  CloneConfig clone;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::string output_dir = "runs";

  void validate() const;
};

nlohmann::json grid_to_json(const GridSpec& grid);
GridSpec grid_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Throws ParseError naming the offending key.
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace ape
