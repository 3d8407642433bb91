#pragma once

#include <vector>

#include "ape/gridworld.hpp"
#include "ape/policy_ensemble.hpp"

namespace ape {

/// Remembers the most recent `capacity` context ids seen at each state and
/// estimates p(c | s) by their frequencies.
class PosteriorBuffer {
 public:
  static constexpr int kDefaultCapacity = 60;

  PosteriorBuffer(int n_states, int n_contexts, int capacity = kDefaultCapacity);

  void record(State s, int c);

  /// Empirical context frequencies at s; uniform when nothing was recorded.
  ContextDistribution estimate(State s) const;
  std::vector<ContextDistribution> estimate_all() const;

  /// Contexts at s from oldest to newest.
  std::vector<int> contents(State s) const;
  int size(State s) const;
  int capacity() const { return capacity_; }
  int n_contexts() const { return n_contexts_; }

 private:
  struct Ring {
    std::vector<int> slots;
    int head = 0;  // next write position
    int count = 0;
  };

  int n_contexts_;
  int capacity_;
  std::vector<Ring> rings_;
};

/// Exact p(c | s) proportional to prior(c) * expected visits of expert c to s
/// within the horizon. Unvisited states get the uniform distribution.
std::vector<ContextDistribution> exact_posterior(const EnsembleParams& params, const GridSpec& spec);

std::vector<ContextDistribution> exact_posterior(const EnsembleParams& params, const GridSpec& spec,
                                                 const std::vector<double>& prior);

/// Expected visit counts [context][state] under each expert.
std::vector<std::vector<double>> occupancy_table(const EnsembleParams& params, const GridSpec& spec);

}  // namespace ape
