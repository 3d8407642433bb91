#include "ape/exact_eval.hpp"

#include <array>
#include <stdexcept>

namespace ape {

namespace {

using NextTable = std::vector<std::array<State, kNumActions>>;

NextTable next_states(const GridSpec& spec) {
  NextTable next(static_cast<std::size_t>(spec.n_states()));
  for (State s = 0; s < spec.n_states(); ++s) {
    if (s == spec.goal) {
      next[s].fill(s);
      continue;
    }
    for (Action a : kAllActions) next[s][static_cast<int>(a)] = step(spec, s, a).next_state;
  }
  return next;
}

void check_sizes(const StatePolicy& policy, const GridSpec& spec) {
  spec.validate();
  if (policy.n_states() != spec.n_states())
    throw std::invalid_argument("policy has " + std::to_string(policy.n_states()) +
                                " states, grid has " + std::to_string(spec.n_states()));
}

// T backups of V(s) <- sum_a pi(a|s) [cost + gamma V(s')], V(goal) = 0.
std::vector<double> backward(const StatePolicy& policy, const GridSpec& spec, double cost,
                             double gamma) {
  const NextTable next = next_states(spec);
  const int n = spec.n_states();
  std::vector<double> v(n, 0.0), nv(n, 0.0);
  for (int k = 0; k < spec.horizon; ++k) {
    for (State s = 0; s < n; ++s) {
      if (s == spec.goal) {
        nv[s] = 0.0;
        continue;
      }
      const auto row = policy.row(s);
      double acc = 0.0;
      for (int a = 0; a < kNumActions; ++a) acc += row[a] * (cost + gamma * v[next[s][a]]);
      nv[s] = acc;
    }
    v.swap(nv);
  }
  return v;
}

double mean_off_goal(const std::vector<double>& x, const GridSpec& spec) {
  double total = 0.0;
  for (State s = 0; s < spec.n_states(); ++s)
    if (s != spec.goal) total += x[s];
  return total / (spec.n_states() - 1);
}

}  // namespace

std::vector<double> value_backward_induction(const StatePolicy& policy, const GridSpec& spec,
                                             bool discounted) {
  check_sizes(policy, spec);
  return backward(policy, spec, spec.step_reward, discounted ? spec.discount : 1.0);
}

double expected_return(const StatePolicy& policy, const GridSpec& spec, bool discounted) {
  return mean_off_goal(value_backward_induction(policy, spec, discounted), spec);
}

std::vector<double> hitting_time(const StatePolicy& policy, const GridSpec& spec) {
  check_sizes(policy, spec);
  return backward(policy, spec, 1.0, 1.0);
}

StatePolicy regularize(const StatePolicy& policy, double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("regularize: epsilon must be >= 0");
  if (epsilon == 0.0) return policy;
  const double mix = kNumActions * epsilon;
  StatePolicy out = policy;
  for (State s = 0; s < out.n_states(); ++s)
    for (double& p : out.row(s)) p = (1.0 - mix) * p + mix / kNumActions;
  return out;
}

std::vector<double> occupancy(const StatePolicy& policy, const GridSpec& spec) {
  std::vector<double> start(static_cast<std::size_t>(spec.n_states()), 0.0);
  for (State s = 0; s < spec.n_states(); ++s)
    if (s != spec.goal) start[s] = 1.0 / (spec.n_states() - 1);
  return occupancy(policy, spec, start);
}

std::vector<double> occupancy(const StatePolicy& policy, const GridSpec& spec,
                              const std::vector<double>& start) {
  check_sizes(policy, spec);
  if (static_cast<int>(start.size()) != spec.n_states())
    throw std::invalid_argument("occupancy: start distribution has wrong size");
  const NextTable next = next_states(spec);
  const int n = spec.n_states();
  std::vector<double> d = start, nd(n, 0.0), visits(n, 0.0);
  d[spec.goal] = 0.0;
  for (int t = 0; t < spec.horizon; ++t) {
    std::fill(nd.begin(), nd.end(), 0.0);
    for (State s = 0; s < n; ++s) {
      if (s == spec.goal || d[s] == 0.0) continue;
      visits[s] += d[s];
      const auto row = policy.row(s);
      for (int a = 0; a < kNumActions; ++a) nd[next[s][a]] += d[s] * row[a];
    }
    nd[spec.goal] = 0.0;  // absorbed
    d.swap(nd);
  }
  return visits;
}

EvalReport evaluate(const StatePolicy& policy, const GridSpec& spec, bool discounted, double epsilon) {
  const StatePolicy reg = regularize(policy, epsilon);
  EvalReport r;
  r.per_state_value = value_backward_induction(reg, spec, discounted);
  r.average_return = mean_off_goal(r.per_state_value, spec);
  r.per_state_hitting_time = hitting_time(reg, spec);
  r.average_hitting_time = mean_off_goal(r.per_state_hitting_time, spec);
  return r;
}

double ensemble_return(const EnsembleParams& params, const GridSpec& spec, bool discounted,
                       double epsilon) {
  double total = 0.0;
  for (int c = 0; c < params.n_contexts(); ++c)
    total += expected_return(regularize(expert_policy(params, c), epsilon), spec, discounted);
  return total / params.n_contexts();
}

nlohmann::json report_to_json(const EvalReport& report) {
  return {{"per_state_value", report.per_state_value},
          {"average_return", report.average_return},
          {"per_state_hitting_time", report.per_state_hitting_time},
          {"average_hitting_time", report.average_hitting_time}};
}

}  // namespace ape
