#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ape/adam.hpp"
#include "ape/context_posterior.hpp"
#include "ape/gridworld.hpp"
#include "ape/policy_ensemble.hpp"

namespace ape {

/// Reward seen by the observer terms of the objective. Ensemble terms always
/// use the environment reward.
struct ObserverReward {
  enum class Kind { Identity, Zero, Scale };
  Kind kind = Kind::Identity;
  double scale = 1.0;
  /// When set, takes precedence over `kind`: (state, action, env reward) -> reward.
  std::function<double(State, Action, double)> custom;

  double operator()(State s, Action a, double env_reward) const;
};

struct TrainConfig {
  double beta = 0.6;
  double lr_policy = 0.05;
  double lr_value = 0.05;
  double value_weight = 0.5;
  double entropy_start = 0.5;
  double entropy_end = 0.005;
  long batch_timesteps = 4096;
  long total_timesteps = 3'000'000;
  double discount = 0.99;
  int n_contexts = 2;
  std::uint64_t seed = 0;
  int buffer_capacity = PosteriorBuffer::kDefaultCapacity;
  /// Rollout workers. Results depend on (seed, threads) only.
  int threads = 1;
  double divergence_limit = 1e6;
  ObserverReward observer_reward;
  /// Also feed the contexts sampled during observer rollouts into the
  /// posterior buffer.
  bool record_observer_contexts = false;
  /// Standard deviation of the initial logits (0 = uniform experts).
  double init_logit_scale = 0.0;

  void validate() const;
};

/// Linear anneal from entropy_start to entropy_end over total_timesteps.
double entropy_coefficient(const TrainConfig& config, long timesteps);

/// Per-context state values, estimating V^{pi_c} - beta V^{pi_o}.
class ValueTable {
 public:
  ValueTable() = default;
  ValueTable(int n_contexts, int n_states);

  int n_contexts() const { return n_contexts_; }
  int n_states() const { return n_states_; }
  double& at(int c, State s) { return values_[index(c, s)]; }
  double at(int c, State s) const { return values_[index(c, s)]; }
  std::size_t index(int c, State s) const { return static_cast<std::size_t>(c) * n_states_ + s; }

  std::vector<double>& flat() { return values_; }
  const std::vector<double>& flat() const { return values_; }

  friend bool operator==(const ValueTable&, const ValueTable&) = default;

 private:
  int n_contexts_ = 0;
  int n_states_ = 0;
  std::vector<double> values_;
};

nlohmann::json values_to_json(const ValueTable& values);
ValueTable values_from_json(const nlohmann::json& j);

/// sum_{t' >= t} gamma^(t' - t) r_t'
double reward_to_go(const Trajectory& traj, std::size_t t, double discount);

/// Reward-to-go for every step, using `reward(state, action, env_reward)`.
std::vector<double> returns_to_go(const Trajectory& traj, double discount,
                                  const ObserverReward& reward = {});

/// R(t) - V[c][s_t] for an ensemble trajectory.
double advantage_ensemble(const Trajectory& traj, std::size_t t, const ValueTable& values,
                          double discount);

/// -beta * R~(t) - V[c_t][s_t] for an observer trajectory, c_t being the
/// context sampled at that step.
double advantage_observer(const Trajectory& traj, std::size_t t, const ValueTable& values,
                          double beta, double discount, const ObserverReward& reward = {});

struct Batch {
  std::vector<Trajectory> ensemble;
  std::vector<Trajectory> observer;

  long ensemble_steps() const;
  long observer_steps() const;
};

/// G1 + G2 plus the entropy bonus gradient, laid out like EnsembleParams::flat().
///   G1 = 1/N1 sum_j sum_t grad log pi_c(a|s) * (R - V[c][s])
///   G2 = 1/N2 sum_j sum_t grad log pi_{c_t}(a|s) * (-beta R~ - V[c_t][s])
///   H  = coef/N1 sum_j sum_t entropy(pi_c(.|s_t))
std::vector<double> policy_gradient_batch(const EnsembleParams& params, const ValueTable& values,
                                          const Batch& batch, const TrainConfig& config,
                                          double entropy_coef);

struct ValueLoss {
  double loss = 0.0;
  std::vector<double> gradient;  // laid out like ValueTable::flat()
};

/// value_weight * ( 1/N1 sum 1/2 (V[c][s] - R)^2 + 1/N2 sum 1/2 (V[c_t][s] + beta R~)^2 )
ValueLoss value_loss_batch(const ValueTable& values, const Batch& batch, const TrainConfig& config);

struct IterationRecord {
  long iteration = 0;
  long timesteps = 0;
  double pe_return = 0.0;
  double clone_return = 0.0;
  double entropy_coef = 0.0;
  double value_loss = 0.0;
};

std::string training_log_header();
std::string training_log_row(const IterationRecord& rec);
std::string training_log_csv(const std::vector<IterationRecord>& log);

struct TrainResult {
  EnsembleParams params;
  ValueTable values;
  std::vector<IterationRecord> log;
  bool diverged = false;
  std::string message;
};

/// Called after every update; return false to stop training.
using IterationCallback =
    std::function<bool(const IterationRecord&, const EnsembleParams&, const ValueTable&)>;

/// PG-APE. With beta = 0 no observer rollouts are collected and this is
/// vanilla policy gradient with a value baseline.
TrainResult train(const GridSpec& spec, const TrainConfig& config,
                  const IterationCallback& on_iteration = {});

/// Collects whole ensemble episodes (uniform context per episode) until at
/// least `budget` steps have been gathered.
std::vector<Trajectory> collect_ensemble(const EnsembleParams& params, const GridSpec& spec,
                                         long budget, Rng& rng);

/// Observer episodes with the context re-sampled from `posterior` at every state.
std::vector<Trajectory> collect_observer(const EnsembleParams& params, const GridSpec& spec,
                                         const std::vector<ContextDistribution>& posterior,
                                         long budget, Rng& rng);

}  // namespace ape
