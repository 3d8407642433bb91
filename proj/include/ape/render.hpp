#pragma once

#include <string>
#include <vector>

#include "ape/gridworld.hpp"
#include "ape/policy_ensemble.hpp"

namespace ape {

/// Grid of per-state hitting times, one row per grid row. The goal is 'G'.
std::string heatmap_ascii(const std::vector<double>& hitting_time, const GridSpec& spec);

/// Binary (P5) 8-bit PGM of the per-state value -hitting_time, mapped
/// linearly from [-T, 0] to [0, 255] and clamped.
std::string heatmap_pgm(const std::vector<double>& hitting_time, const GridSpec& spec);

/// One character per cell for the most probable action (^ v < > o), then a
/// table of the full action probabilities per state.
std::string arrow_grid(const StatePolicy& policy, const GridSpec& spec);

}  // namespace ape
