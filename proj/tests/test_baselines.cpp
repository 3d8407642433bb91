#include <doctest.h>

#include <cmath>
#include <random>

#include "ape/baselines.hpp"
#include "ape/cloner.hpp"
#include "ape/exact_eval.hpp"

using namespace ape;

namespace {

GridSpec grid(int w, int h) {
  GridSpec g;
  g.width = w;
  g.height = h;
  return g;
}

TrainConfig quick() {
  TrainConfig cfg;
  cfg.total_timesteps = 200'000;
  cfg.batch_timesteps = 1024;
  return cfg;
}

}  // namespace

TEST_CASE("gap of degenerate ensembles is zero") {
  const GridSpec g = grid(3, 3);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> d(0.0, 1.0);
  EnsembleParams one(1, 9);
  for (double& x : one.flat()) x = d(gen);
  CHECK(gap(one, g) == 0.0);

  EnsembleParams twins(2, 9);
  for (State s = 0; s < 9; ++s)
    for (int a = 0; a < 5; ++a) twins.logits(0, s)[a] = twins.logits(1, s)[a] = one.logits(0, s)[a];
  CHECK(std::abs(gap(twins, g)) < 1e-9);
}

TEST_CASE("gap sign: clone worse than ensemble is negative") {
  // Expert 0 goes straight to the goal; expert 1 walks away from it. Their
  // mixture wanders, so the clone does worse than the ensemble average.
  const GridSpec g = grid(4, 1);
  EnsembleParams p(2, 4);
  for (State s = 1; s < 4; ++s) {
    p.logits(0, s)[static_cast<int>(Action::Left)] = 50;
    p.logits(1, s)[static_cast<int>(Action::Right)] = 50;
  }
  const double pe = ensemble_return(p, g);
  CHECK(gap(p, g) == doctest::Approx(clone_return(p, g) - pe));
  CHECK(gap(p, g) < 0.0);
}

TEST_CASE("stop rule validation") {
  const GridSpec g;
  CHECK_NOTHROW(StopRule{StopRule::Metric::EnsembleReturn, -16.0}.validate(g));
  CHECK_NOTHROW(StopRule{StopRule::Metric::CloneReturn, 0.0}.validate(g));
  CHECK_THROWS(StopRule{StopRule::Metric::EnsembleReturn, 1.0}.validate(g));
  CHECK_THROWS(StopRule{StopRule::Metric::EnsembleReturn, -101.0}.validate(g));
}

TEST_CASE("near-optimal rule stops at the first checkpoint reaching the target") {
  const GridSpec g = grid(5, 5);
  const VanillaResult r = train_vanilla(g, quick(), {StopRule::Metric::EnsembleReturn, -8.0});
  REQUIRE(r.met);
  CHECK_FALSE(r.warning);
  CHECK(r.metric >= -8.0);
  CHECK(ensemble_return(r.params, g) == doctest::Approx(r.metric));
  REQUIRE(r.iteration >= 1);
  // The previous checkpoint had not reached the target yet.
  if (r.iteration >= 2) CHECK(r.log[r.iteration - 2].pe_return < -8.0);
  CHECK(std::abs(gap(r.params, g)) <= 1.0);
}

TEST_CASE("random rule tracks the clone return") {
  const GridSpec g = grid(5, 5);
  const VanillaResult r = train_vanilla(g, quick(), {StopRule::Metric::CloneReturn, -20.0});
  REQUIRE(r.met);
  CHECK(clone_return(r.params, g) >= -20.0);
  CHECK(clone_return(r.params, g) == doctest::Approx(r.metric));
}

TEST_CASE("an untrained ensemble can already satisfy a low threshold") {
  const GridSpec g = grid(5, 5);
  const VanillaResult r = train_vanilla(g, quick(), {StopRule::Metric::EnsembleReturn, -100.0});
  CHECK(r.met);
  CHECK(r.iteration == 0);
}

TEST_CASE("an unattainable threshold raises the warning flag") {
  const GridSpec g = grid(3, 3);
  TrainConfig cfg = quick();
  cfg.total_timesteps = 20'000;
  const VanillaResult r = train_vanilla(g, cfg, {StopRule::Metric::EnsembleReturn, 0.0});
  CHECK_FALSE(r.met);
  CHECK(r.warning);
  CHECK_FALSE(r.message.empty());
}

TEST_CASE("beta is forced to zero") {
  const GridSpec g = grid(3, 3);
  TrainConfig cfg = quick();
  cfg.beta = 0.9;
  cfg.total_timesteps = 10'000;
  TrainConfig zero = cfg;
  zero.beta = 0.0;
  const VanillaResult a = train_vanilla(g, cfg, {StopRule::Metric::EnsembleReturn, 0.0});
  const VanillaResult b = train_vanilla(g, zero, {StopRule::Metric::EnsembleReturn, 0.0});
  CHECK(a.params == b.params);
}
