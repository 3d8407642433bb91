#pragma once

#include <array>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "ape/random.hpp"

namespace ape {

/// Flat row-major cell index.
using State = int;

enum class Action : int { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4 };

inline constexpr int kNumActions = 5;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Up, Action::Down, Action::Left, Action::Right, Action::Stay};

std::string_view action_name(Action a);

struct Cell {
  int row;
  int col;
};

/// Deterministic W x H navigation grid. Every step costs `step_reward`,
/// including the one that enters the goal; the goal is absorbing and ends
/// the episode.
struct GridSpec {
  int width = 10;
  int height = 10;
  State goal = 0;
  double step_reward = -1.0;
  int horizon = 100;
  double discount = 0.99;

  int n_states() const { return width * height; }
  bool contains(State s) const { return s >= 0 && s < n_states(); }
  Cell cell(State s) const { return {s / width, s % width}; }
  State index(int row, int col) const { return row * width + col; }

  /// Throws std::invalid_argument when any invariant is broken.
  void validate() const;
};

struct Transition {
  State next_state;
  double reward;
  bool done;
};

Transition step(const GridSpec& spec, State s, Action a);

/// Uniform over every cell except the goal.
State initial_state(const GridSpec& spec, Rng& rng);

enum class Source { Ensemble, Observer };

struct Step {
  State state;
  Action action;
  double reward;
  int context = 0;
};

struct Trajectory {
  std::vector<Step> steps;
  State final_state = 0;
  Source source = Source::Ensemble;

  std::size_t size() const { return steps.size(); }
  double total_reward() const;
};

/// What a sampler may return when it also reports the context it used.
struct Choice {
  Action action;
  int context = 0;
};

/// Runs one episode from `start` until the goal is entered or the horizon is
/// reached. `sample(state, rng)` returns an Action or a Choice.
template <class Sampler>
Trajectory rollout(const GridSpec& spec, State start, Sampler&& sample, Rng& rng,
                   Source source = Source::Ensemble) {
  Trajectory traj;
  traj.source = source;
  traj.steps.reserve(static_cast<std::size_t>(spec.horizon));
  State s = start;
  for (int t = 0; t < spec.horizon && s != spec.goal; ++t) {
    Choice choice;
    using R = std::decay_t<decltype(sample(s, rng))>;
    if constexpr (std::is_same_v<R, Choice>) {
      choice = sample(s, rng);
    } else {
      choice = Choice{sample(s, rng), 0};
    }
    const Transition tr = step(spec, s, choice.action);
    traj.steps.push_back({s, choice.action, tr.reward, choice.context});
    s = tr.next_state;
  }
  traj.final_state = s;
  return traj;
}

template <class Sampler>
Trajectory rollout(const GridSpec& spec, Sampler&& sample, Rng& rng,
                   Source source = Source::Ensemble) {
  const State start = initial_state(spec, rng);
  return rollout(spec, start, std::forward<Sampler>(sample), rng, source);
}

/// Greedy shortest-path action toward the goal (Up/Left preferred on ties).
Action shortest_path_action(const GridSpec& spec, State s);

int manhattan_to_goal(const GridSpec& spec, State s);

}  // namespace ape
