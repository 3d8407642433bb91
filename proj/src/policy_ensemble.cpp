#include "ape/policy_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ape {

ActionProbs softmax(std::span<const double, kNumActions> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  ActionProbs p{};
  double z = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    p[a] = std::exp(logits[a] - m);
    z += p[a];
  }
  for (double& x : p) x /= z;
  return p;
}

namespace {

void check_simplex(std::span<const double> p, double tol, const char* what) {
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative or NaN entry");
    total += x;
  }
  if (std::abs(total - 1.0) > tol)
    throw std::invalid_argument(std::string(what) + ": entries sum to " + std::to_string(total));
}

}  // namespace

StatePolicy::StatePolicy(int n_states)
    : n_states_(n_states),
      probs_(static_cast<std::size_t>(n_states) * kNumActions, 1.0 / kNumActions) {}

std::span<double, kNumActions> StatePolicy::row(State s) {
  return std::span<double, kNumActions>(probs_.data() + static_cast<std::size_t>(s) * kNumActions,
                                        kNumActions);
}

std::span<const double, kNumActions> StatePolicy::row(State s) const {
  return std::span<const double, kNumActions>(
      probs_.data() + static_cast<std::size_t>(s) * kNumActions, kNumActions);
}

void StatePolicy::validate(double tol) const {
  for (State s = 0; s < n_states_; ++s) check_simplex(row(s), tol, "policy row");
}

StatePolicy StatePolicy::from_rows(const std::vector<ActionProbs>& rows) {
  StatePolicy p(static_cast<int>(rows.size()));
  for (State s = 0; s < p.n_states(); ++s) std::copy(rows[s].begin(), rows[s].end(), p.row(s).begin());
  return p;
}

EnsembleParams::EnsembleParams(int n_contexts, int n_states)
    : n_contexts_(n_contexts),
      n_states_(n_states),
      logits_(static_cast<std::size_t>(n_contexts) * n_states * kNumActions, 0.0) {
  if (n_contexts < 1 || n_states < 1)
    throw std::invalid_argument("EnsembleParams: sizes must be positive");
}

std::size_t EnsembleParams::offset(int c, State s) const {
  if (c < 0 || c >= n_contexts_) throw std::out_of_range("context id out of range");
  if (s < 0 || s >= n_states_) throw std::out_of_range("state out of range");
  return (static_cast<std::size_t>(c) * n_states_ + s) * kNumActions;
}

std::span<double, kNumActions> EnsembleParams::logits(int c, State s) {
  return std::span<double, kNumActions>(logits_.data() + offset(c, s), kNumActions);
}

std::span<const double, kNumActions> EnsembleParams::logits(int c, State s) const {
  return std::span<const double, kNumActions>(logits_.data() + offset(c, s), kNumActions);
}

double EnsembleParams::max_abs_logit() const {
  double m = 0.0;
  for (double x : logits_) m = std::max(m, std::abs(x));
  return m;
}

bool EnsembleParams::all_finite() const {
  return std::all_of(logits_.begin(), logits_.end(), [](double x) { return std::isfinite(x); });
}

ContextDistribution ContextDistribution::uniform(int n_contexts) {
  return {std::vector<double>(static_cast<std::size_t>(n_contexts), 1.0 / n_contexts)};
}

void ContextDistribution::validate(double tol) const { check_simplex(probs, tol, "context distribution"); }

ActionProbs action_probs(const EnsembleParams& params, int c, State s) {
  return softmax(params.logits(c, s));
}

Action sample_ensemble_action(const EnsembleParams& params, int c, State s, Rng& rng) {
  const ActionProbs p = action_probs(params, c, s);
  return static_cast<Action>(rng.categorical(p));
}

ActionProbs observer_probs(const EnsembleParams& params, const ContextDistribution& posterior,
                           State s) {
  if (posterior.size() != params.n_contexts())
    throw std::invalid_argument("observer_probs: posterior size does not match ensemble");
  ActionProbs mix{};
  for (int c = 0; c < params.n_contexts(); ++c) {
    const double w = posterior.probs[c];
    if (w == 0.0) continue;
    const ActionProbs p = action_probs(params, c, s);
    for (int a = 0; a < kNumActions; ++a) mix[a] += w * p[a];
  }
  return mix;
}

Choice sample_observer_action(const EnsembleParams& params, const ContextDistribution& posterior,
                              State s, Rng& rng) {
  const auto c = static_cast<int>(rng.categorical(posterior.probs));
  return {sample_ensemble_action(params, c, s, rng), c};
}

StatePolicy expert_policy(const EnsembleParams& params, int c) {
  StatePolicy pol(params.n_states());
  for (State s = 0; s < params.n_states(); ++s) {
    const ActionProbs p = action_probs(params, c, s);
    std::copy(p.begin(), p.end(), pol.row(s).begin());
  }
  return pol;
}

StatePolicy observer_policy(const EnsembleParams& params,
                            const std::vector<ContextDistribution>& posterior) {
  if (static_cast<int>(posterior.size()) != params.n_states())
    throw std::invalid_argument("observer_policy: need one posterior per state");
  StatePolicy pol(params.n_states());
  for (State s = 0; s < params.n_states(); ++s) {
    const ActionProbs p = observer_probs(params, posterior[s], s);
    std::copy(p.begin(), p.end(), pol.row(s).begin());
  }
  return pol;
}

}  // namespace ape
