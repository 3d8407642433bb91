#include "ape/baselines.hpp"

#include <stdexcept>

#include "ape/cloner.hpp"
#include "ape/exact_eval.hpp"

namespace ape {

void StopRule::validate(const GridSpec& spec) const {
  if (!(threshold >= -spec.horizon && threshold <= 0.0))
    throw std::invalid_argument("stop rule: threshold must lie in [-T, 0]");
}

namespace {

double metric_of(const StopRule& stop, const EnsembleParams& params, const GridSpec& spec) {
  return stop.target_metric == StopRule::Metric::EnsembleReturn ? ensemble_return(params, spec)
                                                                : clone_return(params, spec);
}

}  // namespace

VanillaResult train_vanilla(const GridSpec& spec, TrainConfig config, const StopRule& stop) {
  stop.validate(spec);
  config.beta = 0.0;

  VanillaResult out;
  out.params = EnsembleParams(config.n_contexts, spec.n_states());
  out.values = ValueTable(config.n_contexts, spec.n_states());
  out.metric = metric_of(stop, out.params, spec);
  if (out.metric >= stop.threshold) {
    out.met = true;
    return out;
  }

  TrainResult run = train(spec, config, [&](const IterationRecord& rec, const EnsembleParams& params,
                                            const ValueTable& values) {
    const double m = stop.target_metric == StopRule::Metric::EnsembleReturn ? rec.pe_return : rec.clone_return;
    if (m > out.metric || m >= stop.threshold) {
      out.metric = m;
      out.params = params;
      out.values = values;
      out.iteration = rec.iteration;
    }
    if (m >= stop.threshold) {
      out.met = true;
      return false;
    }
    return true;
  });
  out.log = std::move(run.log);
  if (run.diverged) out.message = run.message;
  if (!out.met) {
    out.warning = true;
    if (out.message.empty())
      out.message = "stop threshold " + std::to_string(stop.threshold) +
                    " not reached; returning best checkpoint (metric " + std::to_string(out.metric) + ")";
  }
  return out;
}

double gap(const EnsembleParams& params, const GridSpec& spec) {
  return clone_return(params, spec) - ensemble_return(params, spec);
}

}  // namespace ape
