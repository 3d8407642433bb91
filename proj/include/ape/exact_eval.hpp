#pragma once

#include <vector>

#include <json.hpp>

#include "ape/gridworld.hpp"
#include "ape/policy_ensemble.hpp"

namespace ape {

/// Noise level mixed into every evaluated policy so hitting times exist.
inline constexpr double kEvalNoise = 1e-9;

/// Finite-horizon values: T backups of
///   V(s) <- sum_a pi(a|s) [r + gamma V(s')],  V(goal) = 0,
/// with gamma = 1 when `discounted` is false.
std::vector<double> value_backward_induction(const StatePolicy& policy, const GridSpec& spec,
                                             bool discounted);

/// Mean value over the non-goal start states (uniform initial distribution).
double expected_return(const StatePolicy& policy, const GridSpec& spec, bool discounted);

/// Expected steps to reach the goal; episodes still running at the horizon
/// count as T. Zero at the goal.
std::vector<double> hitting_time(const StatePolicy& policy, const GridSpec& spec);

/// (1 - 5 eps) * pi + 5 eps * uniform, row by row.
StatePolicy regularize(const StatePolicy& policy, double epsilon = kEvalNoise);

/// Expected number of times each state is acted in during one episode,
/// starting from the uniform non-goal distribution. The goal is absorbing and
/// accumulates nothing, so the entries sum to the average hitting time.
std::vector<double> occupancy(const StatePolicy& policy, const GridSpec& spec);

/// Same, from an arbitrary start distribution over states.
std::vector<double> occupancy(const StatePolicy& policy, const GridSpec& spec,
                              const std::vector<double>& start);

struct EvalReport {
  std::vector<double> per_state_value;
  double average_return = 0.0;
  std::vector<double> per_state_hitting_time;
  double average_hitting_time = 0.0;
};

/// Full report on the regularized policy (undiscounted unless requested).
EvalReport evaluate(const StatePolicy& policy, const GridSpec& spec, bool discounted = false,
                    double epsilon = kEvalNoise);

/// Uniform average of the experts' expected returns.
double ensemble_return(const EnsembleParams& params, const GridSpec& spec, bool discounted = false,
                       double epsilon = kEvalNoise);

nlohmann::json report_to_json(const EvalReport& report);

}  // namespace ape
