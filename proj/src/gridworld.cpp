#include "ape/gridworld.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace ape {

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Up: return "Up";
    case Action::Down: return "Down";
    case Action::Left: return "Left";
    case Action::Right: return "Right";
    case Action::Stay: return "Stay";
  }
  return "?";
}

void GridSpec::validate() const {
  if (width < 1 || height < 1)
    throw std::invalid_argument("grid: width and height must be positive");
  if (!contains(goal))
    throw std::invalid_argument("grid: goal " + std::to_string(goal) + " is outside the grid");
  if (n_states() < 2) throw std::invalid_argument("grid: need at least one non-goal cell");
  if (horizon < 1) throw std::invalid_argument("grid: horizon must be >= 1");
  if (!(discount > 0.0 && discount < 1.0))
    throw std::invalid_argument("grid: discount must lie in (0, 1)");
}

Transition step(const GridSpec& spec, State s, Action a) {
  if (!spec.contains(s)) throw std::invalid_argument("step: state out of range");
  if (s == spec.goal) throw std::invalid_argument("step: episode already terminated at goal");
  auto [row, col] = spec.cell(s);
  switch (a) {
    case Action::Up: row = row > 0 ? row - 1 : row; break;
    case Action::Down: row = row + 1 < spec.height ? row + 1 : row; break;
    case Action::Left: col = col > 0 ? col - 1 : col; break;
    case Action::Right: col = col + 1 < spec.width ? col + 1 : col; break;
    case Action::Stay: break;
    default: throw std::invalid_argument("step: invalid action");
  }
  const State next = spec.index(row, col);
  return {next, spec.step_reward, next == spec.goal};
}

State initial_state(const GridSpec& spec, Rng& rng) {
  const auto k = static_cast<State>(rng.below(static_cast<std::size_t>(spec.n_states() - 1)));
  return k < spec.goal ? k : k + 1;
}

double Trajectory::total_reward() const {
  double total = 0.0;
  for (const auto& st : steps) total += st.reward;
  return total;
}

Action shortest_path_action(const GridSpec& spec, State s) {
  const Cell here = spec.cell(s);
  const Cell target = spec.cell(spec.goal);
  if (here.row > target.row) return Action::Up;
  if (here.col > target.col) return Action::Left;
  if (here.row < target.row) return Action::Down;
  if (here.col < target.col) return Action::Right;
  return Action::Stay;
}

int manhattan_to_goal(const GridSpec& spec, State s) {
  const Cell a = spec.cell(s);
  const Cell b = spec.cell(spec.goal);
  return std::abs(a.row - b.row) + std::abs(a.col - b.col);
}

}  // namespace ape
