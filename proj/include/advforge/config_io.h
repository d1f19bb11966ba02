// JSON configuration: attack parameters, evaluator specs and endpoints.

#ifndef ADVFORGE_CONFIG_IO_H_
#define ADVFORGE_CONFIG_IO_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "advforge/core.h"
#include "advforge/evaluators.h"
#include "json.hpp"

namespace advforge {

struct EndpointConfig {
  std::string base_url;
  std::string api_key_env;
  double rate_limit_rps = 0.0;
  int timeout_s = 120;
};

// Everything an `attack run` needs besides the dataset.
struct HarnessConfig {
  AttackConfig attack;
  GoldSpec gold;
  std::map<std::string, EvaluatorSpec> victims;
  std::map<std::string, EndpointConfig> endpoints;
  std::optional<std::string> cache_dir;
  int workers = 4;
};

nlohmann::json to_json(const AttackConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
AttackConfig attack_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EvaluatorSpec& spec);
EvaluatorSpec evaluator_spec_from_json(const std::string& id, const nlohmann::json& j);

nlohmann::json to_json(const LlmPromptedSpec& spec);
LlmPromptedSpec llm_prompted_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GoldSpec& spec);
GoldSpec gold_spec_from_json(const nlohmann::json& j);

HarnessConfig harness_config_from_json(const nlohmann::json& j);
HarnessConfig load_harness_config(const std::filesystem::path& path);

// First 16 hex digits of SHA-256 over the canonical JSON of cfg.
std::string config_fingerprint(const AttackConfig& cfg);

}  // namespace advforge

#endif  // ADVFORGE_CONFIG_IO_H_
