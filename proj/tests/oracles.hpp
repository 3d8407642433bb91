// Reference implementations used only by tests. They share no code with the
// library beyond its plain data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "ape/gridworld.hpp"
#include "ape/policy_ensemble.hpp"
#include "ape/trainer.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// Independent move rule: clip the displaced cell back into the grid.
inline int move(int width, int height, int s, int a) {
  static constexpr int dr[5] = {-1, 1, 0, 0, 0};
  static constexpr int dc[5] = {0, 0, -1, 1, 0};
  int r = s / width + dr[a];
  int c = s % width + dc[a];
  if (r < 0 || r >= height) r = s / width;
  if (c < 0 || c >= width) c = s % width;
  return r * width + c;
}

// One-step transition matrix of a state policy; the goal is absorbing.
inline Matrix transition_matrix(const ape::StatePolicy& pi, const ape::GridSpec& g) {
  const int n = g.n_states();
  Matrix p(n, std::vector<double>(n, 0.0));
  for (int s = 0; s < n; ++s) {
    if (s == g.goal) {
      p[s][s] = 1.0;
      continue;
    }
    for (int a = 0; a < 5; ++a) p[s][move(g.width, g.height, s, a)] += pi.row(s)[a];
  }
  return p;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  Matrix c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Expected return from every state: sum over t < T of gamma^t * reward * P(not at goal at t),
// using explicit powers P^t.
inline std::vector<double> brute_force_values(const ape::StatePolicy& pi, const ape::GridSpec& g,
                                              double gamma, double reward) {
  const int n = g.n_states();
  const Matrix p = transition_matrix(pi, g);
  Matrix power(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) power[i][i] = 1.0;
  std::vector<double> v(n, 0.0);
  double w = 1.0;
  for (int t = 0; t < g.horizon; ++t) {
    for (int s = 0; s < n; ++s) v[s] += w * reward * (1.0 - power[s][g.goal]);
    power = multiply(power, p);
    w *= gamma;
  }
  return v;
}

struct MonteCarlo {
  double mean = 0.0;
  double std_error = 0.0;
};

// Mean episode return from `start` over `episodes` rollouts of pi.
inline MonteCarlo monte_carlo(const ape::StatePolicy& pi, const ape::GridSpec& g, int start, int episodes,
                              double gamma, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  double sum = 0.0, sq = 0.0;
  for (int e = 0; e < episodes; ++e) {
    int s = start;
    double ret = 0.0, w = 1.0;
    for (int t = 0; t < g.horizon && s != g.goal; ++t) {
      std::discrete_distribution<int> d(pi.row(s).begin(), pi.row(s).end());
      s = move(g.width, g.height, s, d(gen));
      ret += w * g.step_reward;
      w *= gamma;
    }
    sum += ret;
    sq += ret * ret;
  }
  const double mean = sum / episodes;
  const double var = sq / episodes - mean * mean;
  return {mean, std::sqrt(var / episodes)};
}

inline ape::StatePolicy random_policy(int n_states, std::mt19937_64& gen) {
  std::vector<ape::ActionProbs> rows(n_states);
  std::gamma_distribution<double> g(1.0, 1.0);
  for (auto& row : rows) {
    double total = 0.0;
    for (double& p : row) total += (p = g(gen) + 1e-3);
    for (double& p : row) p /= total;
  }
  return ape::StatePolicy::from_rows(rows);
}

inline ape::StatePolicy greedy_policy(const ape::GridSpec& g) {
  std::vector<ape::ActionProbs> rows(g.n_states());
  for (int s = 0; s < g.n_states(); ++s) {
    rows[s].fill(0.0);
    const int r = s / g.width, c = s % g.width;
    const int gr = g.goal / g.width, gc = g.goal % g.width;
    const int a = r > gr ? 0 : r < gr ? 1 : c > gc ? 2 : c < gc ? 3 : 4;
    rows[s][a] = 1.0;
  }
  return ape::StatePolicy::from_rows(rows);
}

inline ape::StatePolicy constant_policy(const ape::GridSpec& g, ape::Action a) {
  std::vector<ape::ActionProbs> rows(g.n_states());
  for (auto& row : rows) {
    row.fill(0.0);
    row[static_cast<int>(a)] = 1.0;
  }
  return ape::StatePolicy::from_rows(rows);
}

inline double tv(std::span<const double, 5> a, std::span<const double, 5> b) {
  double d = 0.0;
  for (int i = 0; i < 5; ++i) d += std::abs(a[i] - b[i]);
  return 0.5 * d;
}

inline double log_softmax(std::span<const double, 5> z, int a) {
  double m = z[0];
  for (double x : z) m = std::max(m, x);
  double s = 0.0;
  for (double x : z) s += std::exp(x - m);
  return z[a] - m - std::log(s);
}

inline double entropy(std::span<const double, 5> z) {
  double h = 0.0;
  for (int a = 0; a < 5; ++a) h -= std::exp(log_softmax(z, a)) * log_softmax(z, a);
  return h;
}

// Reference returns-to-go computed by direct summation.
inline double rtg(const ape::Trajectory& t, std::size_t from, double gamma, double scale = 1.0) {
  double r = 0.0, w = 1.0;
  for (std::size_t k = from; k < t.size(); ++k, w *= gamma) r += w * scale * t.steps[k].reward;
  return r;
}

// Sampled surrogate whose gradient the trainer ascends, advantages held fixed.
inline double surrogate(const ape::EnsembleParams& p, const ape::ValueTable& v, const ape::Batch& b, const ape::TrainConfig& cfg, double coef) {
  double j = 0.0;
  for (const auto& t : b.ensemble)
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto& st = t.steps[k];
      const double adv = rtg(t, k, cfg.discount) - v.at(st.context, st.state);
      j += (log_softmax(p.logits(st.context, st.state), static_cast<int>(st.action)) * adv +
            coef * entropy(p.logits(st.context, st.state))) /
           b.ensemble.size();
    }
  for (const auto& t : b.observer)
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto& st = t.steps[k];
      const double adv = -cfg.beta * rtg(t, k, cfg.discount) - v.at(st.context, st.state);
      j += log_softmax(p.logits(st.context, st.state), static_cast<int>(st.action)) * adv / b.observer.size();
    }
  return j;
}

inline double value_objective(const ape::ValueTable& v, const ape::Batch& b, const ape::TrainConfig& cfg) {
  double e = 0.0, o = 0.0;
  for (const auto& t : b.ensemble)
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double d = v.at(t.steps[k].context, t.steps[k].state) - rtg(t, k, cfg.discount);
      e += 0.5 * d * d / b.ensemble.size();
    }
  for (const auto& t : b.observer)
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double d = v.at(t.steps[k].context, t.steps[k].state) + cfg.beta * rtg(t, k, cfg.discount);
      o += 0.5 * d * d / b.observer.size();
    }
  return cfg.value_weight * (e + o);
}

}  // namespace oracle
