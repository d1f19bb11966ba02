// Offline stand-ins for the generator, gold and victim so the attack loop can
// run without network access.
//
// Scores come from named landscape rules:
//   keyword  20 + 80 * (fraction of keywords present as tokens)
//   length   clamp(100 - 2 * token_count)
//   table    exact-text lookup with a default
//   metric   a native metric against the sample reference (victim only)
//
// The generator replays a script: request i (1-based iteration) returns the
// i-th candidate list. Past the end it returns text without markers.

#ifndef ADVFORGE_SIMKIT_H_
#define ADVFORGE_SIMKIT_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advforge/core.h"
#include "advforge/evaluators.h"
#include "advforge/llmclient.h"
#include "advforge/prompt_library.h"
#include "json.hpp"

namespace advforge::sim {

struct LandscapeRule {
  std::string rule;  // keyword | length | table | metric
  std::vector<std::string> keywords;
  std::map<std::string, double> table;
  double table_default = 0.0;
  std::string metric;
};

struct SyntheticLandscape {
  LandscapeRule gold;
  LandscapeRule victim;
};

// Candidate lists per iteration.
using Script = std::vector<std::vector<std::string>>;

struct Scenario {
  SyntheticLandscape landscape;
  // Keyed by sample id; "*" applies to samples without their own entry.
  std::map<std::string, Script> scripts;
};

// Throws kInvalidConfig for an unknown rule, a metric rule used for gold, a
// keyword rule without keywords or an out-of-range table value.
void validate_landscape(const SyntheticLandscape& landscape);

// Pure rule application. The metric rule needs a reference (kMissingReference).
Score apply_rule(const LandscapeRule& rule, std::string_view response,
                 const std::optional<std::string>& reference = std::nullopt);

struct SimWorld {
  EvaluatorSpec victim;
  GoldSpec gold;
  GeneratorSettings generator;
};

inline constexpr std::string_view kGeneratorEndpoint = "sim/generator";
inline constexpr std::string_view kGoldEndpoint = "sim/gold";
inline constexpr std::string_view kVictimEndpoint = "sim/victim";
inline constexpr std::string_view kRatingTemplate = "sim/rate";

// Registers the sim backends on client and the rating template on prompts.
// Per-sample scripts are matched to generator prompts by the sample context,
// so samples with their own script need distinct contexts. Throws
// kInvalidInput for an empty script.
SimWorld make_sim_world(const Scenario& scenario, std::span<const EvalSample> dataset,
                        LlmClient& client, PromptLibrary& prompts);

// Single-script convenience for one sample.
SimWorld make_sim_world(const SyntheticLandscape& landscape, const Script& script,
                        LlmClient& client, PromptLibrary& prompts);

nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace advforge::sim

#endif  // ADVFORGE_SIMKIT_H_
