#include "advforge/config_io.h"

#include <set>

#include "advforge/llmclient.h"
#include "advforge/prompt_library.h"

namespace advforge {

using json = nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) {
      throw Error(ErrorCode::kInvalidConfig, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

}  // namespace

json to_json(const AttackConfig& cfg) {
  return {
      {"alpha", cfg.alpha},
      {"tau1_plus", cfg.tau1_plus},
      {"tau1_minus", cfg.tau1_minus},
      {"tau2", cfg.tau2},
      {"victim_budget", cfg.victim_budget},
      {"candidates_per_iter", cfg.candidates_per_iter},
      {"gold_samples_k", cfg.gold_samples_k},
      {"trajectory_cap", cfg.trajectory_cap},
      {"max_iterations", cfg.max_iterations},
      {"stop_threshold", cfg.stop_threshold ? json(*cfg.stop_threshold) : json(nullptr)},
      {"include_criteria", cfg.include_criteria},
      {"random_init_minus", cfg.random_init_minus},
      {"gold_parse_retries", cfg.gold_parse_retries},
      {"max_consecutive_empty", cfg.max_consecutive_empty},
      {"generator",
       {{"endpoint", cfg.generator.endpoint_id},
        {"model", cfg.generator.model},
        {"temperature", cfg.generator.temperature},
        {"max_tokens", cfg.generator.max_tokens}}},
      {"random_seed", cfg.random_seed},
  };
}

AttackConfig attack_config_from_json(const json& j) {
  reject_unknown(j,
                 {"alpha", "tau1_plus", "tau1_minus", "tau2", "victim_budget",
                  "candidates_per_iter", "gold_samples_k", "trajectory_cap", "max_iterations",
                  "stop_threshold", "include_criteria", "random_init_minus",
                  "gold_parse_retries", "max_consecutive_empty", "generator", "random_seed"},
                 "attack config");
  AttackConfig cfg;
  try {
    read(j, "alpha", cfg.alpha);
    read(j, "tau1_plus", cfg.tau1_plus);
    read(j, "tau1_minus", cfg.tau1_minus);
    read(j, "tau2", cfg.tau2);
    read(j, "victim_budget", cfg.victim_budget);
    read(j, "candidates_per_iter", cfg.candidates_per_iter);
    read(j, "gold_samples_k", cfg.gold_samples_k);
    read(j, "trajectory_cap", cfg.trajectory_cap);
    read(j, "max_iterations", cfg.max_iterations);
    if (auto it = j.find("stop_threshold"); it != j.end() && !it->is_null()) {
      cfg.stop_threshold = it->get<double>();
    }
    read(j, "include_criteria", cfg.include_criteria);
    read(j, "random_init_minus", cfg.random_init_minus);
    read(j, "gold_parse_retries", cfg.gold_parse_retries);
    read(j, "max_consecutive_empty", cfg.max_consecutive_empty);
    read(j, "random_seed", cfg.random_seed);
    if (auto it = j.find("generator"); it != j.end()) {
      reject_unknown(*it, {"endpoint", "model", "temperature", "max_tokens"}, "generator");
      read(*it, "endpoint", cfg.generator.endpoint_id);
      read(*it, "model", cfg.generator.model);
      read(*it, "temperature", cfg.generator.temperature);
      read(*it, "max_tokens", cfg.generator.max_tokens);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("attack config: ") + e.what());
  }
  return cfg;
}

json to_json(const LlmPromptedSpec& spec) {
  return {{"endpoint", spec.endpoint_id},   {"model", spec.model},
          {"prompt", spec.prompt_template_id}, {"samples_k", spec.samples_k},
          {"temperature", spec.temperature}, {"max_tokens", spec.max_tokens}};
}

LlmPromptedSpec llm_prompted_from_json(const json& j) {
  reject_unknown(j, {"kind", "endpoint", "model", "prompt", "samples_k", "temperature", "max_tokens"},
                 "llm evaluator");
  LlmPromptedSpec spec;
  try {
    spec.endpoint_id = j.at("endpoint").get<std::string>();
    read(j, "model", spec.model);
    read(j, "prompt", spec.prompt_template_id);
    read(j, "samples_k", spec.samples_k);
    read(j, "temperature", spec.temperature);
    read(j, "max_tokens", spec.max_tokens);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("llm evaluator: ") + e.what());
  }
  return spec;
}

json to_json(const EvaluatorSpec& spec) {
  if (const auto* native = std::get_if<NativeMetricSpec>(&spec.kind)) {
    return {{"kind", "native"}, {"metric", native->metric}};
  }
  if (const auto* remote = std::get_if<RemoteHttpSpec>(&spec.kind)) {
    return {{"kind", "remote"}, {"url", remote->url}, {"timeout_s", remote->timeout_s}};
  }
  json j = to_json(std::get<LlmPromptedSpec>(spec.kind));
  j["kind"] = "llm";
  return j;
}

EvaluatorSpec evaluator_spec_from_json(const std::string& id, const json& j) {
  EvaluatorSpec spec;
  spec.id = id;
  const std::string kind = j.value("kind", "");
  if (kind == "native") {
    reject_unknown(j, {"kind", "metric"}, "victim '" + id + "'");
    spec.kind = NativeMetricSpec{j.value("metric", "")};
  } else if (kind == "remote") {
    reject_unknown(j, {"kind", "url", "timeout_s"}, "victim '" + id + "'");
    RemoteHttpSpec remote;
    remote.url = j.value("url", "");
    read(j, "timeout_s", remote.timeout_s);
    if (remote.url.empty()) throw Error(ErrorCode::kInvalidConfig, "victim '" + id + "' needs a url");
    spec.kind = remote;
  } else if (kind == "llm") {
    spec.kind = llm_prompted_from_json(j);
  } else {
    throw Error(ErrorCode::kInvalidConfig,
                "victim '" + id + "' has unknown kind '" + kind + "' (native|remote|llm)");
  }
  return spec;
}

json to_json(const GoldSpec& spec) {
  json members = json::array();
  for (const auto& m : spec.members) members.push_back(to_json(m));
  return {{"members", members}, {"samples_k", spec.samples_k}, {"parse_retries", spec.parse_retries}};
}

GoldSpec gold_spec_from_json(const json& j) {
  reject_unknown(j, {"members", "samples_k", "parse_retries"}, "gold");
  GoldSpec spec;
  read(j, "samples_k", spec.samples_k);
  read(j, "parse_retries", spec.parse_retries);
  if (auto it = j.find("members"); it != j.end()) {
    for (const auto& m : *it) spec.members.push_back(llm_prompted_from_json(m));
  }
  return spec;
}

HarnessConfig harness_config_from_json(const json& j) {
  reject_unknown(j, {"attack", "gold", "victims", "endpoints", "cache_dir", "workers"},
                 "config file");
  HarnessConfig cfg;
  if (auto it = j.find("attack"); it != j.end()) cfg.attack = attack_config_from_json(*it);
  if (auto it = j.find("gold"); it != j.end()) cfg.gold = gold_spec_from_json(*it);
  if (auto it = j.find("victims"); it != j.end()) {
    for (const auto& [id, spec] : it->items()) {
      cfg.victims.emplace(id, evaluator_spec_from_json(id, spec));
    }
  }
  if (auto it = j.find("endpoints"); it != j.end()) {
    for (const auto& [id, e] : it->items()) {
      reject_unknown(e, {"base_url", "api_key_env", "rate_limit_rps", "timeout_s"},
                     "endpoint '" + id + "'");
      EndpointConfig ep;
      ep.base_url = e.value("base_url", "");
      read(e, "api_key_env", ep.api_key_env);
      read(e, "rate_limit_rps", ep.rate_limit_rps);
      read(e, "timeout_s", ep.timeout_s);
      cfg.endpoints.emplace(id, ep);
    }
  }
  if (auto it = j.find("cache_dir"); it != j.end() && !it->is_null()) {
    cfg.cache_dir = it->get<std::string>();
  }
  read(j, "workers", cfg.workers);
  return cfg;
}

HarnessConfig load_harness_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
  return harness_config_from_json(j);
}

std::string config_fingerprint(const AttackConfig& cfg) {
  return sha256_hex(to_json(cfg).dump()).substr(0, 16);
}

}  // namespace advforge
