#include "ape/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ape/cloner.hpp"
#include "ape/exact_eval.hpp"

namespace ape {

double ObserverReward::operator()(State s, Action a, double env_reward) const {
  if (custom) return custom(s, a, env_reward);
  switch (kind) {
    case Kind::Identity: return env_reward;
    case Kind::Zero: return 0.0;
    case Kind::Scale: return scale * env_reward;
  }
  return env_reward;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("train config: " + msg); };
  if (!(beta >= 0.0)) fail("beta must be >= 0");
  if (!(lr_policy > 0.0) || !(lr_value > 0.0)) fail("learning rates must be positive");
  if (!(value_weight > 0.0)) fail("value_weight must be positive");
  if (!(entropy_end >= 0.0) || !(entropy_start >= entropy_end))
    fail("need entropy_start >= entropy_end >= 0");
  if (batch_timesteps < 1) fail("batch_timesteps must be positive");
  if (total_timesteps < 1) fail("total_timesteps must be positive");
  if (!(discount > 0.0 && discount <= 1.0)) fail("discount must lie in (0, 1]");
  if (n_contexts < 1) fail("n_contexts must be positive");
  if (buffer_capacity < 1) fail("buffer_capacity must be positive");
  if (threads < 1) fail("threads must be positive");
  if (!(divergence_limit > 0.0)) fail("divergence_limit must be positive");
}

double entropy_coefficient(const TrainConfig& config, long timesteps) {
  const double frac =
      std::clamp(static_cast<double>(timesteps) / static_cast<double>(config.total_timesteps), 0.0, 1.0);
  return config.entropy_start + (config.entropy_end - config.entropy_start) * frac;
}

ValueTable::ValueTable(int n_contexts, int n_states)
    : n_contexts_(n_contexts),
      n_states_(n_states),
      values_(static_cast<std::size_t>(n_contexts) * n_states, 0.0) {}

nlohmann::json values_to_json(const ValueTable& values) {
  nlohmann::json rows = nlohmann::json::array();
  for (int c = 0; c < values.n_contexts(); ++c) {
    std::vector<double> row(values.n_states());
    for (State s = 0; s < values.n_states(); ++s) row[s] = values.at(c, s);
    rows.push_back(row);
  }
  return {{"n_contexts", values.n_contexts()}, {"n_states", values.n_states()}, {"values", rows}};
}

ValueTable values_from_json(const nlohmann::json& j) {
  const int n_contexts = j.at("n_contexts").get<int>();
  const int n_states = j.at("n_states").get<int>();
  ValueTable out(n_contexts, n_states);
  const auto& rows = j.at("values");
  if (static_cast<int>(rows.size()) != n_contexts) throw std::invalid_argument("values: wrong context count");
  for (int c = 0; c < n_contexts; ++c) {
    if (static_cast<int>(rows[c].size()) != n_states)
      throw std::invalid_argument("values[" + std::to_string(c) + "]: wrong state count");
    for (State s = 0; s < n_states; ++s) out.at(c, s) = rows[c][s].get<double>();
  }
  return out;
}

double reward_to_go(const Trajectory& traj, std::size_t t, double discount) {
  if (t >= traj.size()) throw std::out_of_range("reward_to_go: step index past end");
  double total = 0.0;
  for (std::size_t k = traj.size(); k-- > t;) total = traj.steps[k].reward + discount * total;
  return total;
}

std::vector<double> returns_to_go(const Trajectory& traj, double discount, const ObserverReward& reward) {
  std::vector<double> out(traj.size());
  double acc = 0.0;
  for (std::size_t k = traj.size(); k-- > 0;) {
    const Step& st = traj.steps[k];
    acc = reward(st.state, st.action, st.reward) + discount * acc;
    out[k] = acc;
  }
  return out;
}

double advantage_ensemble(const Trajectory& traj, std::size_t t, const ValueTable& values,
                          double discount) {
  if (traj.source != Source::Ensemble) throw std::invalid_argument("advantage_ensemble: observer trajectory");
  const Step& st = traj.steps.at(t);
  return reward_to_go(traj, t, discount) - values.at(st.context, st.state);
}

double advantage_observer(const Trajectory& traj, std::size_t t, const ValueTable& values, double beta,
                          double discount, const ObserverReward& reward) {
  if (traj.source != Source::Observer) throw std::invalid_argument("advantage_observer: ensemble trajectory");
  const Step& st = traj.steps.at(t);
  const double ret = returns_to_go(traj, discount, reward)[t];
  return -beta * ret - values.at(st.context, st.state);
}

long Batch::ensemble_steps() const {
  long n = 0;
  for (const auto& t : ensemble) n += static_cast<long>(t.size());
  return n;
}

long Batch::observer_steps() const {
  long n = 0;
  for (const auto& t : observer) n += static_cast<long>(t.size());
  return n;
}

namespace {

// grad += weight * d log pi(a|s) / d logits = weight * (onehot(a) - p)
void add_score(std::span<double> grad, const ActionProbs& p, Action a, double weight) {
  for (int k = 0; k < kNumActions; ++k) grad[k] -= weight * p[k];
  grad[static_cast<int>(a)] += weight;
}

// grad += weight * d H / d logits, H = -sum p log p.
void add_entropy(std::span<double> grad, const ActionProbs& p, double weight) {
  double h = 0.0;
  for (double x : p) h -= x * std::log(x);
  for (int k = 0; k < kNumActions; ++k) grad[k] -= weight * p[k] * (std::log(p[k]) + h);
}

std::span<double> grad_row(std::vector<double>& g, const EnsembleParams& params, int c, State s) {
  const std::size_t off = (static_cast<std::size_t>(c) * params.n_states() + s) * kNumActions;
  return {g.data() + off, kNumActions};
}

}  // namespace

std::vector<double> policy_gradient_batch(const EnsembleParams& params, const ValueTable& values,
                                          const Batch& batch, const TrainConfig& config,
                                          double entropy_coef) {
  std::vector<double> g(params.flat().size(), 0.0);

  if (!batch.ensemble.empty()) {
    const double inv_n = 1.0 / static_cast<double>(batch.ensemble.size());
    for (const Trajectory& traj : batch.ensemble) {
      const std::vector<double> ret = returns_to_go(traj, config.discount);
      for (std::size_t t = 0; t < traj.size(); ++t) {
        const Step& st = traj.steps[t];
        const ActionProbs p = action_probs(params, st.context, st.state);
        auto row = grad_row(g, params, st.context, st.state);
        add_score(row, p, st.action, inv_n * (ret[t] - values.at(st.context, st.state)));
        if (entropy_coef != 0.0) add_entropy(row, p, inv_n * entropy_coef);
      }
    }
  }

  if (!batch.observer.empty()) {
    const double inv_n = 1.0 / static_cast<double>(batch.observer.size());
    for (const Trajectory& traj : batch.observer) {
      const std::vector<double> ret = returns_to_go(traj, config.discount, config.observer_reward);
      for (std::size_t t = 0; t < traj.size(); ++t) {
        const Step& st = traj.steps[t];
        const double adv = -config.beta * ret[t] - values.at(st.context, st.state);
        add_score(grad_row(g, params, st.context, st.state), action_probs(params, st.context, st.state),
                  st.action, inv_n * adv);
      }
    }
  }
  return g;
}

ValueLoss value_loss_batch(const ValueTable& values, const Batch& batch, const TrainConfig& config) {
  ValueLoss out;
  out.gradient.assign(values.flat().size(), 0.0);
  double ens = 0.0, obs = 0.0;

  if (!batch.ensemble.empty()) {
    const double inv_n = 1.0 / static_cast<double>(batch.ensemble.size());
    for (const Trajectory& traj : batch.ensemble) {
      const std::vector<double> ret = returns_to_go(traj, config.discount);
      for (std::size_t t = 0; t < traj.size(); ++t) {
        const Step& st = traj.steps[t];
        const double err = values.at(st.context, st.state) - ret[t];
        ens += 0.5 * err * err * inv_n;
        out.gradient[values.index(st.context, st.state)] += config.value_weight * err * inv_n;
      }
    }
  }
  if (!batch.observer.empty()) {
    const double inv_n = 1.0 / static_cast<double>(batch.observer.size());
    for (const Trajectory& traj : batch.observer) {
      const std::vector<double> ret = returns_to_go(traj, config.discount, config.observer_reward);
      for (std::size_t t = 0; t < traj.size(); ++t) {
        const Step& st = traj.steps[t];
        const double err = values.at(st.context, st.state) + config.beta * ret[t];
        obs += 0.5 * err * err * inv_n;
        out.gradient[values.index(st.context, st.state)] += config.value_weight * err * inv_n;
      }
    }
  }
  out.loss = config.value_weight * (ens + obs);
  return out;
}

std::string training_log_header() {
  return "iteration,timesteps,pe_return,clone_return,entropy_coef,value_loss";
}

std::string training_log_row(const IterationRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%ld,%ld,%.10f,%.10f,%.10f,%.10g", r.iteration, r.timesteps, r.pe_return,
                r.clone_return, r.entropy_coef, r.value_loss);
  return buf;
}

std::string training_log_csv(const std::vector<IterationRecord>& log) {
  std::string out = training_log_header() + "\n";
  for (const auto& r : log) out += training_log_row(r) + "\n";
  return out;
}

std::vector<Trajectory> collect_ensemble(const EnsembleParams& params, const GridSpec& spec, long budget,
                                         Rng& rng) {
  std::vector<Trajectory> out;
  long steps = 0;
  while (steps < budget) {
    const int c = static_cast<int>(rng.below(static_cast<std::size_t>(params.n_contexts())));
    auto sampler = [&](State s, Rng& r) { return Choice{sample_ensemble_action(params, c, s, r), c}; };
    out.push_back(rollout(spec, sampler, rng, Source::Ensemble));
    steps += static_cast<long>(out.back().size());
  }
  return out;
}

std::vector<Trajectory> collect_observer(const EnsembleParams& params, const GridSpec& spec,
                                         const std::vector<ContextDistribution>& posterior, long budget,
                                         Rng& rng) {
  std::vector<Trajectory> out;
  long steps = 0;
  while (steps < budget) {
    auto sampler = [&](State s, Rng& r) { return sample_observer_action(params, posterior[s], s, r); };
    out.push_back(rollout(spec, sampler, rng, Source::Observer));
    steps += static_cast<long>(out.back().size());
  }
  return out;
}

namespace {

enum Phase : std::uint64_t { kEnsemblePhase = 1, kObserverPhase = 2 };

// Splits `budget` across workers, each with its own stream keyed by
// (seed, iteration, phase, worker); results are concatenated in worker order.
template <class Collect>
std::vector<Trajectory> fan_out(const TrainConfig& config, long iteration, Phase phase, long budget,
                                Collect collect) {
  const int workers = config.threads;
  const long share = (budget + workers - 1) / workers;
  std::vector<std::vector<Trajectory>> parts(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    Rng rng{config.seed, static_cast<std::uint64_t>(iteration), phase, static_cast<std::uint64_t>(w)};
    parts[w] = collect(share, rng);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  std::vector<Trajectory> out;
  for (auto& p : parts)
    for (auto& t : p) out.push_back(std::move(t));
  return out;
}

}  // namespace

TrainResult train(const GridSpec& spec, const TrainConfig& config, const IterationCallback& on_iteration) {
  spec.validate();
  config.validate();

  TrainResult result;
  result.params = EnsembleParams(config.n_contexts, spec.n_states());
  result.values = ValueTable(config.n_contexts, spec.n_states());
  EnsembleParams& params = result.params;
  ValueTable& values = result.values;

  if (config.init_logit_scale > 0.0) {
    Rng init{config.seed, 0};
    for (double& z : params.flat()) {
      // Box-Muller
      const double u1 = 1.0 - init.uniform(), u2 = init.uniform();
      z = config.init_logit_scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
    }
  }

  PosteriorBuffer buffer(spec.n_states(), config.n_contexts, config.buffer_capacity);
  Adam policy_opt(params.flat().size(), config.lr_policy);
  Adam value_opt(values.flat().size(), config.lr_value);

  long timesteps = 0;
  for (long iteration = 1; timesteps < config.total_timesteps; ++iteration) {
    const double coef = entropy_coefficient(config, timesteps);

    Batch batch;
    batch.ensemble = fan_out(config, iteration, kEnsemblePhase, config.batch_timesteps,
                             [&](long budget, Rng& rng) { return collect_ensemble(params, spec, budget, rng); });
    for (const Trajectory& traj : batch.ensemble)
      for (const Step& st : traj.steps) buffer.record(st.state, st.context);

    if (config.beta > 0.0) {
      const std::vector<ContextDistribution> posterior = buffer.estimate_all();
      batch.observer = fan_out(config, iteration, kObserverPhase, config.batch_timesteps, [&](long budget, Rng& rng) {
        return collect_observer(params, spec, posterior, budget, rng);
      });
      if (config.record_observer_contexts)
        for (const Trajectory& traj : batch.observer)
          for (const Step& st : traj.steps) buffer.record(st.state, st.context);
    }

    const std::vector<double> grad = policy_gradient_batch(params, values, batch, config, coef);
    const ValueLoss vloss = value_loss_batch(values, batch, config);
    policy_opt.ascend(params.flat(), grad);
    value_opt.descend(values.flat(), vloss.gradient);
    timesteps += batch.ensemble_steps();

    if (!params.all_finite() || params.max_abs_logit() > config.divergence_limit) {
      result.diverged = true;
      result.message = "diverged at iteration " + std::to_string(iteration) + ": logit magnitude exceeds " +
                       std::to_string(config.divergence_limit);
      break;
    }

    IterationRecord rec;
    rec.iteration = iteration;
    rec.timesteps = timesteps;
    rec.pe_return = ensemble_return(params, spec);
    rec.clone_return = clone_return(params, spec);
    rec.entropy_coef = coef;
    rec.value_loss = vloss.loss;
    result.log.push_back(rec);
    if (on_iteration && !on_iteration(rec, params, values)) break;
  }
  return result;
}

}  // namespace ape
