#pragma once

#include <string>
#include <vector>

#include "ape/gridworld.hpp"
#include "ape/policy_ensemble.hpp"
#include "ape/trainer.hpp"

namespace ape {

/// Early-stopping rule for vanilla policy-gradient baselines. Training
/// improves both metrics, so the rule fires on the first checkpoint whose
/// metric has risen to at least `threshold`.
struct StopRule {
  enum class Metric { EnsembleReturn, CloneReturn };
  Metric target_metric = Metric::EnsembleReturn;
  double threshold = 0.0;

  void validate(const GridSpec& spec) const;
};

struct VanillaResult {
  EnsembleParams params;
  ValueTable values;
  std::vector<IterationRecord> log;
  /// Iteration of the returned checkpoint (0 = untrained initialization).
  long iteration = 0;
  double metric = 0.0;
  bool met = false;
  /// Set when the threshold was never reached; params is then the best
  /// checkpoint seen.
  bool warning = false;
  std::string message;
};

/// Trains with beta forced to 0 and stops at the first checkpoint that
/// satisfies `stop`.
VanillaResult train_vanilla(const GridSpec& spec, TrainConfig config, const StopRule& stop);

/// Returns difference: exact clone return minus exact ensemble return.
/// Negative means the clone does worse than the ensemble.
double gap(const EnsembleParams& params, const GridSpec& spec);

}  // namespace ape
