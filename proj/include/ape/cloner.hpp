#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "ape/gridworld.hpp"
#include "ape/policy_ensemble.hpp"
#include "ape/random.hpp"

namespace ape {

/// State-action pairs from ensemble rollouts. Contexts are not kept.
struct CloneDataset {
  std::vector<std::pair<State, Action>> pairs;

  std::size_t size() const { return pairs.size(); }
  /// counts[s][a]
  std::vector<std::array<long, kNumActions>> counts(int n_states) const;
};

/// Runs ensemble episodes (uniform context per episode) and keeps exactly
/// n_pairs state-action pairs.
CloneDataset collect(const EnsembleParams& params, const GridSpec& spec, long n_pairs, Rng& rng);

struct CloneOptions {
  double lr = 0.01;
  int epochs = 100;
  /// Full-batch optimizer steps taken per epoch.
  int steps_per_epoch = 20;
};

/// Tabular softmax policy fit by full-batch Adam on the mean log-likelihood
/// of the dataset. States absent from the dataset stay uniform.
StatePolicy behavior_clone(const CloneDataset& dataset, const GridSpec& spec, const CloneOptions& options = {});

/// Infinite-data limit of behavior cloning: observer_probs under the exact
/// context posterior at every state.
StatePolicy exact_clone(const EnsembleParams& params, const GridSpec& spec);

/// Undiscounted exact return of exact_clone(params).
double clone_return(const EnsembleParams& params, const GridSpec& spec);

/// CSV with header "state,action" and one row per pair.
void save_dataset_csv(const std::filesystem::path& path, const CloneDataset& dataset);
CloneDataset load_dataset_csv(const std::filesystem::path& path);

}  // namespace ape
