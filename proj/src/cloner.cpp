#include "ape/cloner.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ape/adam.hpp"
#include "ape/context_posterior.hpp"
#include "ape/exact_eval.hpp"
#include "ape/policy_io.hpp"

namespace ape {

std::vector<std::array<long, kNumActions>> CloneDataset::counts(int n_states) const {
  std::vector<std::array<long, kNumActions>> out(static_cast<std::size_t>(n_states));
  for (auto& row : out) row.fill(0);
  for (const auto& [s, a] : pairs) {
    if (s < 0 || s >= n_states) throw std::out_of_range("dataset state out of range");
    ++out[s][static_cast<int>(a)];
  }
  return out;
}

CloneDataset collect(const EnsembleParams& params, const GridSpec& spec, long n_pairs, Rng& rng) {
  if (n_pairs < 1) throw std::invalid_argument("collect: n_pairs must be >= 1");
  CloneDataset data;
  data.pairs.reserve(static_cast<std::size_t>(n_pairs));
  while (static_cast<long>(data.size()) < n_pairs) {
    const int c = static_cast<int>(rng.below(static_cast<std::size_t>(params.n_contexts())));
    const Trajectory traj =
        rollout(spec, [&](State s, Rng& r) { return sample_ensemble_action(params, c, s, r); }, rng);
    for (const Step& st : traj.steps) {
      if (static_cast<long>(data.size()) == n_pairs) break;
      data.pairs.emplace_back(st.state, st.action);
    }
  }
  return data;
}

StatePolicy behavior_clone(const CloneDataset& dataset, const GridSpec& spec, const CloneOptions& options) {
  if (dataset.size() == 0) throw std::invalid_argument("behavior_clone: empty dataset");
  if (!(options.lr > 0.0) || options.epochs < 0 || options.steps_per_epoch < 1)
    throw std::invalid_argument("behavior_clone: bad options");
  const int n = spec.n_states();
  const auto counts = dataset.counts(n);
  const double inv_total = 1.0 / static_cast<double>(dataset.size());

  // Row s of the gradient of mean log-likelihood is (counts_s - n_s * p_s) / N.
  EnsembleParams logits(1, n);
  std::vector<double> grad(logits.flat().size(), 0.0);
  Adam opt(grad.size(), options.lr);
  const long steps = static_cast<long>(options.epochs) * options.steps_per_epoch;
  for (long k = 0; k < steps; ++k) {
    for (State s = 0; s < n; ++s) {
      long visits = 0;
      for (long x : counts[s]) visits += x;
      auto g = std::span<double>(grad.data() + static_cast<std::size_t>(s) * kNumActions, kNumActions);
      if (visits == 0) {
        std::fill(g.begin(), g.end(), 0.0);
        continue;
      }
      const ActionProbs p = softmax(logits.logits(0, s));
      for (int a = 0; a < kNumActions; ++a) g[a] = (counts[s][a] - visits * p[a]) * inv_total;
    }
    opt.ascend(logits.flat(), grad);
  }
  return expert_policy(logits, 0);
}

StatePolicy exact_clone(const EnsembleParams& params, const GridSpec& spec) {
  return observer_policy(params, exact_posterior(params, spec));
}

double clone_return(const EnsembleParams& params, const GridSpec& spec) {
  return expected_return(regularize(exact_clone(params, spec)), spec, false);
}

void save_dataset_csv(const std::filesystem::path& path, const CloneDataset& dataset) {
  std::ostringstream out;
  out << "state,action\n";
  for (const auto& [s, a] : dataset.pairs) out << s << ',' << static_cast<int>(a) << '\n';
  write_text_file(path, out.str());
}

CloneDataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CloneDataset data;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("state", 0) == 0) continue;
    if (line.empty()) continue;
    int s = 0, a = 0;
    char comma = 0;
    std::istringstream row(line);
    if (!(row >> s >> comma >> a) || comma != ',' || a < 0 || a >= kNumActions)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": malformed row \"" + line + "\"");
    data.pairs.emplace_back(s, static_cast<Action>(a));
  }
  return data;
}

}  // namespace ape
