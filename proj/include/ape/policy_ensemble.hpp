#pragma once

#include <array>
#include <span>
#include <vector>

#include "ape/gridworld.hpp"
#include "ape/random.hpp"

namespace ape {

using ActionProbs = std::array<double, kNumActions>;

/// Numerically stable softmax over one row of action logits.
ActionProbs softmax(std::span<const double, kNumActions> logits);

/// A flat (memoryless, single-context) tabular policy: one action
/// distribution per state.
class StatePolicy {
 public:
  StatePolicy() = default;
  explicit StatePolicy(int n_states);  // uniform

  int n_states() const { return n_states_; }
  std::span<double, kNumActions> row(State s);
  std::span<const double, kNumActions> row(State s) const;
  double prob(State s, Action a) const { return row(s)[static_cast<int>(a)]; }

  /// Throws std::invalid_argument if a row is not a probability vector.
  void validate(double tol = 1e-9) const;

  static StatePolicy from_rows(const std::vector<ActionProbs>& rows);

 private:
  int n_states_ = 0;
  std::vector<double> probs_;
};

/// Per-context tabular logits, laid out [context][state][action].
/// The context prior is uniform.
class EnsembleParams {
 public:
  EnsembleParams() = default;
  EnsembleParams(int n_contexts, int n_states);  // zero logits

  int n_contexts() const { return n_contexts_; }
  int n_states() const { return n_states_; }

  std::span<double, kNumActions> logits(int c, State s);
  std::span<const double, kNumActions> logits(int c, State s) const;

  std::vector<double>& flat() { return logits_; }
  const std::vector<double>& flat() const { return logits_; }

  double max_abs_logit() const;
  bool all_finite() const;

  friend bool operator==(const EnsembleParams&, const EnsembleParams&) = default;

 private:
  std::size_t offset(int c, State s) const;

  int n_contexts_ = 0;
  int n_states_ = 0;
  std::vector<double> logits_;
};

/// Distribution over ensemble contexts, e.g. p(c | s).
struct ContextDistribution {
  std::vector<double> probs;

  static ContextDistribution uniform(int n_contexts);
  int size() const { return static_cast<int>(probs.size()); }
  void validate(double tol = 1e-9) const;
};

ActionProbs action_probs(const EnsembleParams& params, int c, State s);

Action sample_ensemble_action(const EnsembleParams& params, int c, State s, Rng& rng);

/// Posterior-weighted mixture of the experts' action distributions at s.
ActionProbs observer_probs(const EnsembleParams& params, const ContextDistribution& posterior,
                           State s);

/// Draws c ~ posterior, then a ~ pi_c(.|s). The context is returned so the
/// caller can route the score-function gradient to that expert's logits.
Choice sample_observer_action(const EnsembleParams& params, const ContextDistribution& posterior,
                              State s, Rng& rng);

StatePolicy expert_policy(const EnsembleParams& params, int c);

/// Flat policy given by observer_probs with a per-state posterior.
StatePolicy observer_policy(const EnsembleParams& params,
                            const std::vector<ContextDistribution>& posterior);

}  // namespace ape
