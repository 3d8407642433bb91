#include "ape/policy_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ape {

using nlohmann::json;

nlohmann::json policy_to_json(const PolicyDump& dump) {
  const auto& p = dump.params;
  json logits = json::array();
  for (int c = 0; c < p.n_contexts(); ++c) {
    json per_state = json::array();
    for (State s = 0; s < p.n_states(); ++s) {
      const auto row = p.logits(c, s);
      per_state.push_back(json(std::vector<double>(row.begin(), row.end())));
    }
    logits.push_back(std::move(per_state));
  }
  return json{{"n_contexts", p.n_contexts()},
              {"width", dump.width},
              {"height", dump.height},
              {"n_actions", kNumActions},
              {"logits", std::move(logits)}};
}

namespace {

int require_int(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ParseError(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

std::string at(int c, int s = -1, int a = -1) {
  std::string loc = "logits[" + std::to_string(c) + "]";
  if (s >= 0) loc += "[" + std::to_string(s) + "]";
  if (a >= 0) loc += "[" + std::to_string(a) + "]";
  return loc;
}

}  // namespace

PolicyDump policy_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("policy dump: top level must be an object");
  const int n_contexts = require_int(j, "n_contexts");
  const int width = require_int(j, "width");
  const int height = require_int(j, "height");
  const int n_actions = require_int(j, "n_actions");
  if (n_contexts < 1) throw ParseError("n_contexts: must be positive");
  if (width < 1 || height < 1) throw ParseError("width/height: must be positive");
  if (n_actions != kNumActions)
    throw ParseError("n_actions: expected " + std::to_string(kNumActions) + ", got " +
                     std::to_string(n_actions));
  if (!j.contains("logits") || !j["logits"].is_array()) throw ParseError("logits: missing or not an array");
  const json& logits = j["logits"];
  if (static_cast<int>(logits.size()) != n_contexts)
    throw ParseError("logits: expected " + std::to_string(n_contexts) + " contexts, got " +
                     std::to_string(logits.size()));

  PolicyDump dump{width, height, EnsembleParams(n_contexts, width * height)};
  for (int c = 0; c < n_contexts; ++c) {
    const json& per_state = logits[c];
    if (!per_state.is_array() || static_cast<int>(per_state.size()) != width * height)
      throw ParseError(at(c) + ": expected " + std::to_string(width * height) + " states");
    for (State s = 0; s < width * height; ++s) {
      const json& row = per_state[s];
      if (!row.is_array() || row.size() != kNumActions)
        throw ParseError(at(c, s) + ": expected " + std::to_string(kNumActions) + " actions");
      auto out = dump.params.logits(c, s);
      for (int a = 0; a < kNumActions; ++a) {
        if (!row[a].is_number()) throw ParseError(at(c, s, a) + ": not a number");
        out[a] = row[a].get<double>();
        if (!std::isfinite(out[a])) throw ParseError(at(c, s, a) + ": not finite");
      }
    }
  }
  return dump;
}

std::string serialize_policy(const PolicyDump& dump) { return policy_to_json(dump).dump() + "\n"; }

PolicyDump deserialize_policy(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("JSON syntax error at byte ") + std::to_string(e.byte) + ": " + e.what());
  }
  return policy_from_json(j);
}

PolicyDump dump_state_policy(const StatePolicy& policy, const GridSpec& spec) {
  PolicyDump dump{spec.width, spec.height, EnsembleParams(1, policy.n_states())};
  for (State s = 0; s < policy.n_states(); ++s) {
    auto out = dump.params.logits(0, s);
    const auto row = policy.row(s);
    for (int a = 0; a < kNumActions; ++a) out[a] = std::log(std::max(row[a], 1e-300));
  }
  return dump;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PolicyDump load_policy(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return deserialize_policy(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_policy(const std::filesystem::path& path, const PolicyDump& dump) {
  write_text_file(path, serialize_policy(dump));
}

}  // namespace ape
