#include <doctest.h>

#include <cmath>
#include <random>

#include "ape/exact_eval.hpp"
#include "ape/random.hpp"
#include "ape/trainer.hpp"
#include "oracles.hpp"

using namespace ape;
using oracle::rtg;
using oracle::surrogate;
using oracle::value_objective;

namespace {

GridSpec small_grid() {
  GridSpec g;
  g.width = 3;
  g.height = 3;
  return g;
}

Trajectory make_traj(std::vector<double> rewards, int context = 0, Source source = Source::Ensemble) {
  Trajectory t;
  t.source = source;
  for (std::size_t i = 0; i < rewards.size(); ++i) t.steps.push_back({1, Action::Stay, rewards[i], context});
  return t;
}

EnsembleParams random_params(int n, int states, std::mt19937_64& gen) {
  EnsembleParams p(n, states);
  std::normal_distribution<double> d(0.0, 1.0);
  for (double& x : p.flat()) x = d(gen);
  return p;
}

ValueTable random_values(int n, int states, std::mt19937_64& gen) {
  ValueTable v(n, states);
  std::normal_distribution<double> d(-5.0, 2.0);
  for (double& x : v.flat()) x = d(gen);
  return v;
}

// Frozen batch of ensemble and observer rollouts on the small grid.
Batch frozen_batch(const EnsembleParams& p, const GridSpec& g) {
  Rng rng(2024);
  Batch b;
  b.ensemble = collect_ensemble(p, g, 200, rng);
  std::vector<ContextDistribution> post(g.n_states(), ContextDistribution{{0.35, 0.65}});
  b.observer = collect_observer(p, g, post, 200, rng);
  return b;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

}  // namespace

TEST_CASE("reward to go") {
  const auto t = make_traj({-1, -1, -1, -1, -1});
  CHECK(reward_to_go(t, 0, 1.0) == -5.0);
  CHECK(reward_to_go(make_traj({-1, -1}), 0, 0.99) == doctest::Approx(-1.99));
  const auto u = make_traj({-1, -2, -3});
  CHECK(reward_to_go(u, 2, 0.99) == -3.0);
  const auto all = returns_to_go(u, 0.9);
  for (std::size_t k = 0; k < 3; ++k) CHECK(all[k] == doctest::Approx(rtg(u, k, 0.9)));
}

TEST_CASE("advantages") {
  ValueTable v(2, 3);
  const auto t = make_traj({-1, -1, -1, -1, -1});
  v.at(0, 1) = -5;
  CHECK(advantage_ensemble(t, 0, v, 1.0) == 0.0);
  const auto t3 = make_traj({-1, -1, -1});
  CHECK(advantage_ensemble(t3, 0, v, 1.0) == 2.0);

  auto obs = make_traj(std::vector<double>(10, -1.0), 1, Source::Observer);
  v.at(1, 1) = 6;
  CHECK(advantage_observer(obs, 0, v, 0.6, 1.0) == doctest::Approx(0.0));
  CHECK(advantage_observer(obs, 0, v, 0.0, 1.0) == -6.0);
  v.at(1, 1) = 0;
  auto good = make_traj({-1}, 1, Source::Observer);
  CHECK(advantage_observer(good, 0, v, 0.6, 1.0) > 0.0);
  CHECK(advantage_observer(good, 0, v, 0.6, 1.0) == doctest::Approx(0.6));
  // A better observer (higher return) gets a smaller advantage.
  auto worse = make_traj({-1, -1, -1}, 1, Source::Observer);
  CHECK(advantage_observer(good, 0, v, 0.6, 1.0) < advantage_observer(worse, 0, v, 0.6, 1.0));
}

TEST_CASE("policy gradient matches central finite differences") {
  const GridSpec g = small_grid();
  std::mt19937_64 gen(5);
  EnsembleParams p = random_params(2, g.n_states(), gen);
  const ValueTable v = random_values(2, g.n_states(), gen);
  const Batch b = frozen_batch(p, g);
  REQUIRE(b.ensemble_steps() > 0);
  REQUIRE(b.observer_steps() > 0);
  TrainConfig cfg;
  const double coef = 0.3;
  const auto grad = policy_gradient_batch(p, v, b, cfg, coef);
  const double h = 1e-5;
  int checked = 0;
  for (std::size_t i = 0; i < p.flat().size(); ++i) {
    const double x = p.flat()[i];
    p.flat()[i] = x + h;
    const double up = surrogate(p, v, b, cfg, coef);
    p.flat()[i] = x - h;
    const double down = surrogate(p, v, b, cfg, coef);
    p.flat()[i] = x;
    const double fd = (up - down) / (2 * h);
    if (std::abs(fd) < 1e-6 && std::abs(grad[i]) < 1e-6) continue;
    CHECK(rel_err(grad[i], fd) <= 1e-4);
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("value gradient matches central finite differences") {
  const GridSpec g = small_grid();
  std::mt19937_64 gen(6);
  const EnsembleParams p = random_params(2, g.n_states(), gen);
  ValueTable v = random_values(2, g.n_states(), gen);
  const Batch b = frozen_batch(p, g);
  TrainConfig cfg;
  const ValueLoss loss = value_loss_batch(v, b, cfg);
  CHECK(loss.loss == doctest::Approx(value_objective(v, b, cfg)).epsilon(1e-12));
  const double h = 1e-4;
  for (std::size_t i = 0; i < v.flat().size(); ++i) {
    const double x = v.flat()[i];
    v.flat()[i] = x + h;
    const double up = value_objective(v, b, cfg);
    v.flat()[i] = x - h;
    const double down = value_objective(v, b, cfg);
    v.flat()[i] = x;
    const double fd = (up - down) / (2 * h);
    if (std::abs(fd) < 1e-9 && loss.gradient[i] == 0.0) continue;
    CHECK(rel_err(loss.gradient[i], fd) <= 1e-6);
  }
}

TEST_CASE("value loss examples") {
  TrainConfig cfg;
  cfg.value_weight = 1.0;
  cfg.discount = 1.0;
  Batch b;
  Trajectory t;
  t.steps.push_back({1, Action::Stay, -4.0, 0});
  b.ensemble.push_back(t);
  ValueTable v(1, 3);
  CHECK(value_loss_batch(v, b, cfg).loss == doctest::Approx(8.0));

  // Values at their regression targets give zero loss.
  v.at(0, 1) = -4.0;
  Trajectory o;
  o.source = Source::Observer;
  o.steps.push_back({2, Action::Stay, -3.0, 0});
  b.observer.push_back(o);
  cfg.beta = 0.6;
  v.at(0, 2) = 0.6 * 3.0;
  const ValueLoss zero = value_loss_batch(v, b, cfg);
  CHECK(zero.loss == doctest::Approx(0.0));
  for (double x : zero.gradient) CHECK(x == doctest::Approx(0.0));
}

TEST_CASE("beta zero reduces to vanilla policy gradient") {
  const GridSpec g = small_grid();
  std::mt19937_64 gen(7);
  const EnsembleParams p = random_params(2, g.n_states(), gen);
  const ValueTable v = random_values(2, g.n_states(), gen);
  Batch b = frozen_batch(p, g);
  TrainConfig cfg;
  cfg.beta = 0.0;
  Batch ens_only = b;
  ens_only.observer.clear();
  const auto full = policy_gradient_batch(p, v, ens_only, cfg, 0.1);

  // Textbook REINFORCE with a state-value baseline.
  std::vector<double> ref(p.flat().size(), 0.0);
  for (const auto& t : b.ensemble)
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto& st = t.steps[k];
      const auto probs = action_probs(p, st.context, st.state);
      const double adv = rtg(t, k, cfg.discount) - v.at(st.context, st.state);
      const std::size_t base = (static_cast<std::size_t>(st.context) * g.n_states() + st.state) * 5;
      double h = 0.0;
      for (double q : probs) h -= q * std::log(q);
      for (int a = 0; a < 5; ++a) {
        const double score = (a == static_cast<int>(st.action)) - probs[a];
        const double dh = -probs[a] * (std::log(probs[a]) + h);
        ref[base + a] += (score * adv + 0.1 * dh) / b.ensemble.size();
      }
    }
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(full[i] == doctest::Approx(ref[i]).epsilon(1e-10));
}

TEST_CASE("zero advantages leave only the entropy gradient") {
  const GridSpec g = small_grid();
  std::mt19937_64 gen(8);
  const EnsembleParams p = random_params(1, g.n_states(), gen);
  Batch b;
  Trajectory t;
  t.steps.push_back({3, Action::Up, 0.0, 0});
  b.ensemble.push_back(t);
  const ValueTable v(1, g.n_states());
  TrainConfig cfg;
  const auto grad = policy_gradient_batch(p, v, b, cfg, 1.0);
  const auto probs = action_probs(p, 0, 3);
  double h = 0.0;
  for (double q : probs) h -= q * std::log(q);
  for (int a = 0; a < 5; ++a) CHECK(grad[3 * 5 + a] == doctest::Approx(-probs[a] * (std::log(probs[a]) + h)));
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (i / 5 != 3) CHECK(grad[i] == 0.0);
}

TEST_CASE("observer reward transforms") {
  CHECK(ObserverReward{}(1, Action::Up, -1.0) == -1.0);
  CHECK(ObserverReward{ObserverReward::Kind::Zero}(1, Action::Up, -1.0) == 0.0);
  CHECK(ObserverReward{ObserverReward::Kind::Scale, 2.0}(1, Action::Up, -1.0) == -2.0);
  ObserverReward custom;
  custom.custom = [](State s, Action, double) { return static_cast<double>(s); };
  CHECK(custom(7, Action::Up, -1.0) == 7.0);

  const GridSpec g = small_grid();
  std::mt19937_64 gen(9);
  const EnsembleParams p = random_params(2, g.n_states(), gen);
  const ValueTable v = random_values(2, g.n_states(), gen);
  const Batch b = frozen_batch(p, g);

  TrainConfig zero;
  zero.observer_reward.kind = ObserverReward::Kind::Zero;
  for (const auto& t : b.observer)
    for (std::size_t k = 0; k < t.size(); ++k)
      CHECK(advantage_observer(t, k, v, 0.6, 0.99, zero.observer_reward) ==
            -v.at(t.steps[k].context, t.steps[k].state));

  // Doubling the observer reward equals doubling beta.
  TrainConfig doubled;
  doubled.observer_reward = {ObserverReward::Kind::Scale, 2.0};
  TrainConfig twice_beta;
  twice_beta.beta = 1.2;
  const auto a = policy_gradient_batch(p, v, b, doubled, 0.0);
  const auto c = policy_gradient_batch(p, v, b, twice_beta, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(c[i]).epsilon(1e-12));
  CHECK(value_loss_batch(v, b, doubled).loss == doctest::Approx(value_loss_batch(v, b, twice_beta).loss));
}

TEST_CASE("entropy schedule") {
  TrainConfig cfg;
  cfg.total_timesteps = 1000;
  CHECK(entropy_coefficient(cfg, 0) == 0.5);
  CHECK(entropy_coefficient(cfg, 500) == doctest::Approx(0.2525));
  CHECK(entropy_coefficient(cfg, 1000) == doctest::Approx(0.005));
  CHECK(entropy_coefficient(cfg, 5000) == doctest::Approx(0.005));
}

TEST_CASE("collection meets the step budget with whole episodes") {
  const GridSpec g = small_grid();
  EnsembleParams p(2, g.n_states());
  Rng rng(3);
  const auto trajs = collect_ensemble(p, g, 500, rng);
  long steps = 0;
  for (const auto& t : trajs) {
    steps += static_cast<long>(t.size());
    CHECK((t.final_state == g.goal || t.size() == 100));
    for (const auto& st : t.steps) CHECK(st.context == t.steps.front().context);
  }
  CHECK(steps >= 500);
  CHECK(steps - static_cast<long>(trajs.back().size()) < 500);
}

TEST_CASE("train: beta zero collects no observer data and is deterministic") {
  GridSpec g;
  g.width = 4;
  g.height = 4;
  TrainConfig cfg;
  cfg.beta = 0.0;
  cfg.total_timesteps = 40'000;
  cfg.batch_timesteps = 1024;
  const TrainResult a = train(g, cfg);
  const TrainResult b = train(g, cfg);
  CHECK_FALSE(a.diverged);
  CHECK(training_log_csv(a.log) == training_log_csv(b.log));
  CHECK(a.params == b.params);
  CHECK(a.values == b.values);
  CHECK(a.log.back().pe_return > a.log.front().pe_return);
  CHECK(a.log.back().timesteps >= cfg.total_timesteps);
}

TEST_CASE("train: multi-threaded runs are reproducible for a fixed thread count") {
  GridSpec g;
  g.width = 4;
  g.height = 4;
  TrainConfig cfg;
  cfg.total_timesteps = 20'000;
  cfg.batch_timesteps = 1024;
  cfg.threads = 3;
  const TrainResult a = train(g, cfg);
  const TrainResult b = train(g, cfg);
  CHECK(training_log_csv(a.log) == training_log_csv(b.log));
  CHECK(a.params == b.params);
}

TEST_CASE("train: the callback can stop early") {
  GridSpec g;
  g.width = 3;
  g.height = 3;
  TrainConfig cfg;
  cfg.total_timesteps = 100'000;
  cfg.batch_timesteps = 512;
  const TrainResult r = train(g, cfg, [](const IterationRecord& rec, const EnsembleParams&, const ValueTable&) {
    return rec.iteration < 3;
  });
  CHECK(r.log.size() == 3);
}

TEST_CASE("train: divergence is flagged") {
  GridSpec g;
  g.width = 3;
  g.height = 3;
  TrainConfig cfg;
  cfg.total_timesteps = 50'000;
  cfg.batch_timesteps = 512;
  cfg.divergence_limit = 0.01;
  const TrainResult r = train(g, cfg);
  CHECK(r.diverged);
  CHECK(r.message.find("diverged") != std::string::npos);
}

TEST_CASE("training log format") {
  IterationRecord r{3, 4096, -9.5, -10.25, 0.5, 1.5};
  CHECK(training_log_header() == "iteration,timesteps,pe_return,clone_return,entropy_coef,value_loss");
  CHECK(training_log_row(r) == "3,4096,-9.5000000000,-10.2500000000,0.5000000000,1.5");
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.beta = -0.1;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.n_contexts = 0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.batch_timesteps = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("value table json round trip") {
  std::mt19937_64 gen(10);
  const ValueTable v = random_values(2, 5, gen);
  CHECK(values_from_json(values_to_json(v)) == v);
}
