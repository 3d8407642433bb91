#include "ape/context_posterior.hpp"

#include <stdexcept>

#include "ape/exact_eval.hpp"

namespace ape {

PosteriorBuffer::PosteriorBuffer(int n_states, int n_contexts, int capacity)
    : n_contexts_(n_contexts), capacity_(capacity), rings_(static_cast<std::size_t>(n_states)) {
  if (n_states < 1 || n_contexts < 1 || capacity < 1)
    throw std::invalid_argument("PosteriorBuffer: sizes must be positive");
  for (auto& r : rings_) r.slots.assign(static_cast<std::size_t>(capacity), 0);
}

void PosteriorBuffer::record(State s, int c) {
  if (s < 0 || s >= static_cast<int>(rings_.size())) throw std::out_of_range("record: bad state");
  if (c < 0 || c >= n_contexts_) throw std::out_of_range("record: bad context");
  Ring& r = rings_[s];
  r.slots[r.head] = c;
  r.head = (r.head + 1) % capacity_;
  if (r.count < capacity_) ++r.count;
}

ContextDistribution PosteriorBuffer::estimate(State s) const {
  const Ring& r = rings_.at(static_cast<std::size_t>(s));
  if (r.count == 0) return ContextDistribution::uniform(n_contexts_);
  ContextDistribution d{std::vector<double>(static_cast<std::size_t>(n_contexts_), 0.0)};
  for (int i = 0; i < r.count; ++i) d.probs[r.slots[i]] += 1.0;
  for (double& p : d.probs) p /= r.count;
  return d;
}

std::vector<ContextDistribution> PosteriorBuffer::estimate_all() const {
  std::vector<ContextDistribution> out;
  out.reserve(rings_.size());
  for (State s = 0; s < static_cast<State>(rings_.size()); ++s) out.push_back(estimate(s));
  return out;
}

std::vector<int> PosteriorBuffer::contents(State s) const {
  const Ring& r = rings_.at(static_cast<std::size_t>(s));
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(r.count));
  const int oldest = r.count < capacity_ ? 0 : r.head;
  for (int i = 0; i < r.count; ++i) out.push_back(r.slots[(oldest + i) % capacity_]);
  return out;
}

int PosteriorBuffer::size(State s) const { return rings_.at(static_cast<std::size_t>(s)).count; }

std::vector<std::vector<double>> occupancy_table(const EnsembleParams& params, const GridSpec& spec) {
  std::vector<std::vector<double>> visits;
  visits.reserve(static_cast<std::size_t>(params.n_contexts()));
  for (int c = 0; c < params.n_contexts(); ++c) visits.push_back(occupancy(expert_policy(params, c), spec));
  return visits;
}

std::vector<ContextDistribution> exact_posterior(const EnsembleParams& params, const GridSpec& spec) {
  return exact_posterior(params, spec, std::vector<double>(static_cast<std::size_t>(params.n_contexts()), 1.0));
}

std::vector<ContextDistribution> exact_posterior(const EnsembleParams& params, const GridSpec& spec,
                                                 const std::vector<double>& prior) {
  const int n = params.n_contexts();
  if (static_cast<int>(prior.size()) != n) throw std::invalid_argument("exact_posterior: prior size mismatch");
  const auto visits = occupancy_table(params, spec);
  std::vector<ContextDistribution> out;
  out.reserve(static_cast<std::size_t>(spec.n_states()));
  for (State s = 0; s < spec.n_states(); ++s) {
    ContextDistribution d{std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    double total = 0.0;
    for (int c = 0; c < n; ++c) {
      d.probs[c] = prior[c] * visits[c][s];
      total += d.probs[c];
    }
    if (total > 0.0) {
      for (double& p : d.probs) p /= total;
    } else {
      d = ContextDistribution::uniform(n);
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace ape
