// Uniform evaluator interface E(context, response, reference) -> Score.
//
// Three victim families are supported: native lexical metrics, a remote
// scoring service speaking the /v1/score protocol, and LLM-prompted raters.
// The gold evaluator is always LLM-prompted and stabilized by averaging
// several independently sampled ratings (optionally across several models).

#ifndef ADVFORGE_EVALUATORS_H_
#define ADVFORGE_EVALUATORS_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "advforge/core.h"
#include "advforge/llmclient.h"
#include "advforge/prompt_library.h"

namespace advforge {

struct NativeMetricSpec {
  std::string metric;  // bleu | rouge1 | rouge2 | rougel
  friend bool operator==(const NativeMetricSpec&, const NativeMetricSpec&) = default;
};

struct RemoteHttpSpec {
  std::string url;
  int timeout_s = 60;
  friend bool operator==(const RemoteHttpSpec&, const RemoteHttpSpec&) = default;
};

struct LlmPromptedSpec {
  std::string endpoint_id;
  std::string model;
  // Asset id of the rating prompt; empty selects "gold/<task>".
  std::string prompt_template_id;
  int samples_k = 1;
  double temperature = 1.0;
  int max_tokens = 16;
  friend bool operator==(const LlmPromptedSpec&, const LlmPromptedSpec&) = default;
};

struct EvaluatorSpec {
  std::string id;
  std::variant<NativeMetricSpec, RemoteHttpSpec, LlmPromptedSpec> kind;

  // Only native metrics are reference-based.
  bool needs_reference() const { return std::holds_alternative<NativeMetricSpec>(kind); }

  friend bool operator==(const EvaluatorSpec&, const EvaluatorSpec&) = default;
};

struct GoldSpec {
  std::vector<LlmPromptedSpec> members;
  int samples_k = 8;
  // Extra re-samples for a rating that fails to parse.
  int parse_retries = 2;

  friend bool operator==(const GoldSpec&, const GoldSpec&) = default;
};

std::vector<std::string> validate_gold_spec(const GoldSpec& spec);

// Extracts the last standalone number in text. A ratio such as "8/10" or
// "7 out of 10" is rescaled to 100 * num / den. Throws kParseFailure when
// there is no number or the value falls outside [0, 100].
double parse_rating(std::string_view text);

struct EvaluationContext {
  LlmClient& client;
  const PromptLibrary& prompts;
};

// Builds the rating prompt for an LLM-prompted evaluator.
std::string render_rating_prompt(const LlmPromptedSpec& spec, const EvalSample& sample,
                                 std::string_view response, const PromptLibrary& prompts);

// Scores one response. When victim_queries is given it is incremented by
// exactly one. Errors are re-raised with the evaluator id in the message.
Score evaluate(const EvaluatorSpec& spec, const EvalSample& sample, std::string_view response,
               EvaluationContext& ctx, std::atomic<std::int64_t>* victim_queries = nullptr);

struct GoldRating {
  Score score;
  std::vector<double> ratings;  // every parsed rating, in issue order
  int completions = 0;          // completion requests issued, including re-samples
  int failed = 0;               // rating slots that never parsed
};

// Issues samples_k ratings per member and returns the pooled arithmetic mean.
// Throws kGoldUnavailable when more than half of the slots fail.
GoldRating gold_rate_detailed(const GoldSpec& spec, const EvalSample& sample,
                              std::string_view response, EvaluationContext& ctx);

Score gold_rate(const GoldSpec& spec, const EvalSample& sample, std::string_view response,
                EvaluationContext& ctx);

}  // namespace advforge

#endif  // ADVFORGE_EVALUATORS_H_
