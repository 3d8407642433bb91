#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ape/gridworld.hpp"
#include "ape/policy_ensemble.hpp"

namespace ape {

/// Raised for malformed input files; the message names the offending location
/// (a JSON path such as "logits[1][3]" or a "file:line" prefix).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Policy dump:
///   {"n_contexts": int, "width": int, "height": int, "n_actions": 5,
///    "logits": [[[real]]]}   indexed [context][state][action]
struct PolicyDump {
  int width = 0;
  int height = 0;
  EnsembleParams params;
};

nlohmann::json policy_to_json(const PolicyDump& dump);
PolicyDump policy_from_json(const nlohmann::json& j);

std::string serialize_policy(const PolicyDump& dump);
PolicyDump deserialize_policy(std::string_view text);

/// A flat policy stored as a single-context dump with logits = log(probs).
PolicyDump dump_state_policy(const StatePolicy& policy, const GridSpec& spec);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

PolicyDump load_policy(const std::filesystem::path& path);
void save_policy(const std::filesystem::path& path, const PolicyDump& dump);

}  // namespace ape
