#include "ape/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ape {

std::string heatmap_ascii(const std::vector<double>& hitting_time, const GridSpec& spec) {
  std::ostringstream out;
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      const State s = spec.index(row, col);
      char cell[16];
      if (s == spec.goal) {
        std::snprintf(cell, sizeof cell, "%6s", "G");
      } else {
        std::snprintf(cell, sizeof cell, "%6.1f", hitting_time[s]);
      }
      out << cell;
    }
    out << '\n';
  }
  return out.str();
}

std::string heatmap_pgm(const std::vector<double>& hitting_time, const GridSpec& spec) {
  std::string out = "P5\n" + std::to_string(spec.width) + " " + std::to_string(spec.height) + "\n255\n";
  const double T = spec.horizon;
  for (State s = 0; s < spec.n_states(); ++s) {
    const double value = -hitting_time[s];
    const double level = std::clamp((value + T) / T, 0.0, 1.0) * 255.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(level))));
  }
  return out;
}

std::string arrow_grid(const StatePolicy& policy, const GridSpec& spec) {
  static constexpr char kGlyph[kNumActions] = {'^', 'v', '<', '>', 'o'};
  std::ostringstream out;
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      const State s = spec.index(row, col);
      if (s == spec.goal) {
        out << 'G';
        continue;
      }
      const auto p = policy.row(s);
      out << kGlyph[std::max_element(p.begin(), p.end()) - p.begin()];
    }
    out << '\n';
  }
  out << "\nstate row col   Up     Down   Left   Right  Stay\n";
  for (State s = 0; s < spec.n_states(); ++s) {
    if (s == spec.goal) continue;
    const auto [r, c] = spec.cell(s);
    const auto p = policy.row(s);
    char line[128];
    std::snprintf(line, sizeof line, "%5d %3d %3d  %.4f %.4f %.4f %.4f %.4f\n", s, r, c, p[0], p[1], p[2], p[3],
                  p[4]);
    out << line;
  }
  return out.str();
}

}  // namespace ape
