#include "ape/config.hpp"

#include <set>
#include <stdexcept>

#include "ape/policy_io.hpp"

namespace ape {

using nlohmann::json;

void ExperimentConfig::validate() const {
  grid.validate();
  train.validate();
  if (seeds.empty()) throw std::invalid_argument("config: at least one seed is required");
  if (clone.n_pairs < 1) throw std::invalid_argument("config: clone.n_pairs must be >= 1");
  if (!(clone.options.lr > 0.0) || clone.options.epochs < 0 || clone.options.steps_per_epoch < 1)
    throw std::invalid_argument("config: bad clone options");
}

namespace {

// Reads optional fields from one JSON object, rejecting unknown keys.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(path_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ParseError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ParseError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (v.is_number_float()) {
          const double d = v.get<double>();
          if (d != static_cast<double>(static_cast<long long>(d))) throw ParseError("");
          out = static_cast<T>(d);
          return;
        }
        if (!v.is_number_integer()) throw ParseError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ParseError("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      throw ParseError(where(key) + ": wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ParseError(where(k) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json observer_reward_to_json(const ObserverReward& r) {
  switch (r.kind) {
    case ObserverReward::Kind::Identity: return {{"kind", "identity"}};
    case ObserverReward::Kind::Zero: return {{"kind", "zero"}};
    case ObserverReward::Kind::Scale: return {{"kind", "scale"}, {"scale", r.scale}};
  }
  return {{"kind", "identity"}};
}

ObserverReward observer_reward_from_json(const json& j, const std::string& path) {
  Reader r(j, path);
  std::string kind = "identity";
  ObserverReward out;
  r.get("kind", kind);
  r.get("scale", out.scale);
  r.finish();
  if (kind == "identity") {
    out.kind = ObserverReward::Kind::Identity;
  } else if (kind == "zero") {
    out.kind = ObserverReward::Kind::Zero;
  } else if (kind == "scale") {
    out.kind = ObserverReward::Kind::Scale;
  } else {
    throw ParseError(path + ".kind: expected identity, zero or scale");
  }
  return out;
}

}  // namespace

json grid_to_json(const GridSpec& g) {
  return {{"width", g.width},         {"height", g.height},   {"goal", g.goal},
          {"step_reward", g.step_reward}, {"horizon", g.horizon}, {"discount", g.discount}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  Reader r(j, "grid");
  r.get("width", g.width);
  r.get("height", g.height);
  r.get("goal", g.goal);
  r.get("step_reward", g.step_reward);
  r.get("horizon", g.horizon);
  r.get("discount", g.discount);
  r.finish();
  return g;
}

json config_to_json(const ExperimentConfig& c) {
  const TrainConfig& t = c.train;
  json train = {{"beta", t.beta},
                {"lr_policy", t.lr_policy},
                {"lr_value", t.lr_value},
                {"value_weight", t.value_weight},
                {"entropy_start", t.entropy_start},
                {"entropy_end", t.entropy_end},
                {"batch_timesteps", t.batch_timesteps},
                {"total_timesteps", t.total_timesteps},
                {"discount", t.discount},
                {"n_contexts", t.n_contexts},
                {"buffer_capacity", t.buffer_capacity},
                {"threads", t.threads},
                {"divergence_limit", t.divergence_limit},
                {"record_observer_contexts", t.record_observer_contexts},
                {"init_logit_scale", t.init_logit_scale},
                {"observer_reward", observer_reward_to_json(t.observer_reward)}};
  json clone = {{"n_pairs", c.clone.n_pairs},
                {"lr", c.clone.options.lr},
                {"epochs", c.clone.options.epochs},
                {"steps_per_epoch", c.clone.options.steps_per_epoch}};
  return {{"grid", grid_to_json(c.grid)}, {"train", train},          {"clone", clone},
          {"seeds", c.seeds},             {"output_dir", c.output_dir}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Reader top(j, "");
  if (const json* g = top.child("grid")) c.grid = grid_from_json(*g);
  if (const json* tj = top.child("train")) {
    Reader r(*tj, "train");
    TrainConfig& t = c.train;
    r.get("beta", t.beta);
    r.get("lr_policy", t.lr_policy);
    r.get("lr_value", t.lr_value);
    r.get("value_weight", t.value_weight);
    r.get("entropy_start", t.entropy_start);
    r.get("entropy_end", t.entropy_end);
    r.get("batch_timesteps", t.batch_timesteps);
    r.get("total_timesteps", t.total_timesteps);
    r.get("discount", t.discount);
    r.get("n_contexts", t.n_contexts);
    r.get("buffer_capacity", t.buffer_capacity);
    r.get("threads", t.threads);
    r.get("divergence_limit", t.divergence_limit);
    r.get("record_observer_contexts", t.record_observer_contexts);
    r.get("init_logit_scale", t.init_logit_scale);
    if (const json* o = r.child("observer_reward")) t.observer_reward = observer_reward_from_json(*o, "train.observer_reward");
    r.finish();
  }
  if (const json* cj = top.child("clone")) {
    Reader r(*cj, "clone");
    r.get("n_pairs", c.clone.n_pairs);
    r.get("lr", c.clone.options.lr);
    r.get("epochs", c.clone.options.epochs);
    r.get("steps_per_epoch", c.clone.options.steps_per_epoch);
    r.finish();
  }
  if (const json* s = top.child("seeds")) {
    if (!s->is_array()) throw ParseError("seeds: expected an array");
    c.seeds.clear();
    for (std::size_t i = 0; i < s->size(); ++i) {
      if (!(*s)[i].is_number_unsigned() && !((*s)[i].is_number_integer() && (*s)[i].get<long long>() >= 0))
        throw ParseError("seeds[" + std::to_string(i) + "]: expected a nonnegative integer");
      c.seeds.push_back((*s)[i].get<std::uint64_t>());
    }
  }
  top.get("output_dir", c.output_dir);
  top.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": JSON syntax error at byte " + std::to_string(e.byte));
  }
  try {
    return config_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace ape
