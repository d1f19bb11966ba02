#include "advforge/simkit.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <set>

#include "advforge/generator.h"
#include "advforge/metrics.h"

namespace advforge::sim {

using json = nlohmann::json;

namespace {

const std::set<std::string>& rule_names() {
  static const std::set<std::string> kNames = {"keyword", "length", "table", "metric"};
  return kNames;
}

void validate_rule(const LandscapeRule& rule, const std::string& role) {
  if (!rule_names().count(rule.rule)) {
    throw Error(ErrorCode::kInvalidConfig, role + ": unknown rule '" + rule.rule + "'");
  }
  if (rule.rule == "keyword" && rule.keywords.empty()) {
    throw Error(ErrorCode::kInvalidConfig, role + ": keyword rule needs keywords");
  }
  if (rule.rule == "metric" && !metrics::is_metric_name(rule.metric)) {
    throw Error(ErrorCode::kInvalidConfig, role + ": unknown metric '" + rule.metric + "'");
  }
  if (rule.rule == "table") {
    auto bad = [](double v) { return !std::isfinite(v) || v < 0.0 || v > 100.0; };
    if (bad(rule.table_default)) {
      throw Error(ErrorCode::kInvalidConfig, role + ": table default outside [0, 100]");
    }
    for (const auto& [text, v] : rule.table) {
      if (bad(v)) throw Error(ErrorCode::kInvalidConfig, role + ": table value outside [0, 100]");
    }
  }
}

// Shortest decimal that parses back to exactly v.
std::string exact_decimal(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  return std::string(buf, res.ptr);
}

LlmPromptedSpec rating_member(std::string_view endpoint) {
  LlmPromptedSpec spec;
  spec.endpoint_id = std::string(endpoint);
  spec.model = "sim";
  spec.prompt_template_id = std::string(kRatingTemplate);
  spec.samples_k = 1;
  return spec;
}

std::unique_ptr<CompletionBackend> rating_backend(LandscapeRule rule) {
  // The rating prompt is the bare response, so the prompt is the rule input.
  return std::make_unique<FunctionBackend>([rule = std::move(rule)](const CompletionRequest& req) {
    return exact_decimal(apply_rule(rule, req.prompt).value());
  });
}

const Script& script_for(const std::map<std::string, Script>& scripts,
                         const std::vector<std::pair<std::string, std::string>>& contexts,
                         const std::string& prompt) {
  // contexts is sorted longest first so a context that contains another wins.
  for (const auto& [context, id] : contexts) {
    if (prompt.find(context) != std::string::npos) return scripts.at(id);
  }
  if (auto it = scripts.find("*"); it != scripts.end()) return it->second;
  throw Error(ErrorCode::kScriptExhausted, "no script matches the generator prompt");
}

LandscapeRule rule_from_json(const json& j) {
  LandscapeRule r;
  for (const auto& [key, value] : j.items()) {
    if (key == "rule") {
      r.rule = value.get<std::string>();
    } else if (key == "keywords") {
      r.keywords = value.get<std::vector<std::string>>();
    } else if (key == "scores") {
      r.table = value.get<std::map<std::string, double>>();
    } else if (key == "default") {
      r.table_default = value.get<double>();
    } else if (key == "metric") {
      r.metric = value.get<std::string>();
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown landscape key '" + key + "'");
    }
  }
  return r;
}

json rule_to_json(const LandscapeRule& r) {
  json j = {{"rule", r.rule}};
  if (r.rule == "keyword") j["keywords"] = r.keywords;
  if (r.rule == "table") {
    j["scores"] = r.table;
    j["default"] = r.table_default;
  }
  if (r.rule == "metric") j["metric"] = r.metric;
  return j;
}

}  // namespace

void validate_landscape(const SyntheticLandscape& landscape) {
  validate_rule(landscape.gold, "gold");
  validate_rule(landscape.victim, "victim");
  if (landscape.gold.rule == "metric") {
    throw Error(ErrorCode::kInvalidConfig, "gold: the metric rule is only available to the victim");
  }
}

Score apply_rule(const LandscapeRule& rule, std::string_view response,
                 const std::optional<std::string>& reference) {
  if (rule.rule == "keyword") {
    const metrics::TokenSequence tokens = metrics::tokenize(response);
    const std::set<std::string> present(tokens.tokens().begin(), tokens.tokens().end());
    int hits = 0;
    for (const auto& k : rule.keywords) {
      const metrics::TokenSequence kt = metrics::tokenize(k);
      if (kt.size() == 1 && present.count(kt.tokens().front())) ++hits;
    }
    return Score(20.0 + 80.0 * hits / static_cast<double>(rule.keywords.size()));
  }
  if (rule.rule == "length") {
    const double n = static_cast<double>(metrics::tokenize(response).size());
    return Score(std::clamp(100.0 - 2.0 * n, 0.0, 100.0));
  }
  if (rule.rule == "table") {
    auto it = rule.table.find(std::string(response));
    return Score(it == rule.table.end() ? rule.table_default : it->second);
  }
  if (rule.rule == "metric") {
    if (!reference) throw Error(ErrorCode::kMissingReference, "metric rule needs a reference");
    return metrics::score_by_name(rule.metric, response, *reference);
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown rule '" + rule.rule + "'");
}

SimWorld make_sim_world(const Scenario& scenario, std::span<const EvalSample> dataset,
                        LlmClient& client, PromptLibrary& prompts) {
  validate_landscape(scenario.landscape);
  if (scenario.scripts.empty()) throw Error(ErrorCode::kInvalidInput, "scenario has no script");
  for (const auto& [id, script] : scenario.scripts) {
    if (script.empty()) throw Error(ErrorCode::kInvalidInput, "script for '" + id + "' is empty");
  }

  std::vector<std::pair<std::string, std::string>> contexts;
  std::set<std::string> seen_contexts;
  for (const auto& s : dataset) {
    if (!scenario.scripts.count(s.id)) continue;
    if (!seen_contexts.insert(s.context).second) {
      throw Error(ErrorCode::kInvalidInput,
                  "samples with their own script need distinct contexts ('" + s.id + "')");
    }
    contexts.emplace_back(s.context, s.id);
  }
  std::stable_sort(contexts.begin(), contexts.end(), [](const auto& a, const auto& b) {
    return a.first.size() > b.first.size();
  });

  prompts.add(std::string(kRatingTemplate), "{{response}}");

  auto generator = [scripts = scenario.scripts, contexts](const CompletionRequest& req) {
    const Script& script = script_for(scripts, contexts, req.prompt);
    const int i = req.sample_index - 1;
    if (i < 0 || i >= static_cast<int>(script.size())) return std::string("no further ideas");
    return format_candidates(script[static_cast<std::size_t>(i)]);
  };
  client.register_backend(std::string(kGeneratorEndpoint),
                          std::make_unique<FunctionBackend>(std::move(generator)));
  client.register_backend(std::string(kGoldEndpoint), rating_backend(scenario.landscape.gold));

  SimWorld world;
  world.gold.members = {rating_member(kGoldEndpoint)};
  world.generator.endpoint_id = std::string(kGeneratorEndpoint);
  world.generator.model = "sim";

  const LandscapeRule& victim = scenario.landscape.victim;
  if (victim.rule == "metric") {
    world.victim = {victim.metric, NativeMetricSpec{victim.metric}};
  } else {
    client.register_backend(std::string(kVictimEndpoint), rating_backend(victim));
    world.victim = {"sim-" + victim.rule, rating_member(kVictimEndpoint)};
  }
  return world;
}

SimWorld make_sim_world(const SyntheticLandscape& landscape, const Script& script,
                        LlmClient& client, PromptLibrary& prompts) {
  Scenario scenario{landscape, {{"*", script}}};
  return make_sim_world(scenario, {}, client, prompts);
}

json to_json(const Scenario& scenario) {
  json scripts = json::object();
  for (const auto& [id, script] : scenario.scripts) scripts[id] = script;
  json j = {{"landscape",
             {{"gold", rule_to_json(scenario.landscape.gold)},
              {"victim", rule_to_json(scenario.landscape.victim)}}}};
  if (scenario.scripts.size() == 1 && scenario.scripts.count("*")) {
    j["script"] = scenario.scripts.at("*");
  } else {
    j["script"] = scripts;
  }
  return j;
}

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    for (const auto& [key, value] : j.items()) {
      if (key != "landscape" && key != "script") {
        throw Error(ErrorCode::kInvalidConfig, "unknown scenario key '" + key + "'");
      }
    }
    s.landscape.gold = rule_from_json(j.at("landscape").at("gold"));
    s.landscape.victim = rule_from_json(j.at("landscape").at("victim"));
    const json& script = j.at("script");
    if (script.is_array()) {
      s.scripts["*"] = script.get<Script>();
    } else {
      for (const auto& [id, value] : script.items()) s.scripts[id] = value.get<Script>();
    }
    validate_landscape(s.landscape);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return scenario_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
}

}  // namespace advforge::sim
