#include "advforge/evaluators.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>

#include "advforge/http_transport.h"
#include "advforge/metrics.h"

namespace advforge {
namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

struct NumberToken {
  double value;
  std::size_t end;
};

// Reads an unsigned integer or decimal at text[pos]; pos must be a digit.
NumberToken read_number(std::string_view text, std::size_t pos) {
  std::size_t end = pos;
  while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
  if (end + 1 < text.size() && text[end] == '.' &&
      std::isdigit(static_cast<unsigned char>(text[end + 1]))) {
    ++end;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
  }
  double value = 0.0;
  std::from_chars(text.data() + pos, text.data() + end, value);
  return {value, end};
}

std::size_t skip_spaces(std::string_view text, std::size_t pos) {
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  return pos;
}

// Recognizes "/ <n>", "out of <n>" or "(out of <n>)" after a number; returns
// the denominator.
std::optional<NumberToken> ratio_denominator(std::string_view text, std::size_t pos) {
  std::size_t p = skip_spaces(text, pos);
  const bool paren = p < text.size() && text[p] == '(';
  if (paren) p = skip_spaces(text, p + 1);
  if (!paren && p < text.size() && text[p] == '/') {
    p = skip_spaces(text, p + 1);
  } else if (text.substr(p, 6) == "out of") {
    p = skip_spaces(text, p + 6);
  } else {
    return std::nullopt;
  }
  if (p >= text.size() || !std::isdigit(static_cast<unsigned char>(text[p]))) {
    return std::nullopt;
  }
  NumberToken den = read_number(text, p);
  if (den.end < text.size() && is_word_char(text[den.end])) return std::nullopt;
  if (paren) {
    const std::size_t close = skip_spaces(text, den.end);
    if (close >= text.size() || text[close] != ')') return std::nullopt;
    den.end = close + 1;
  }
  return den;
}

Error with_id(const std::string& id, const Error& e) {
  return Error(e.code(), "evaluator '" + id + "': " + e.what());
}

std::string template_id_for(const LlmPromptedSpec& spec, TaskKind task) {
  if (!spec.prompt_template_id.empty()) return spec.prompt_template_id;
  return "gold/" + std::string(task_kind_name(task));
}

CompletionRequest rating_request(const LlmPromptedSpec& spec, std::string prompt,
                                 int sample_index) {
  CompletionRequest req;
  req.endpoint_id = spec.endpoint_id;
  req.model = spec.model;
  req.prompt = std::move(prompt);
  req.temperature = spec.temperature;
  req.max_tokens = spec.max_tokens;
  req.sample_index = sample_index;
  return req;
}

}  // namespace

double parse_rating(std::string_view text) {
  std::optional<double> last;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const bool glued_before = i > 0 && (is_word_char(text[i - 1]) || text[i - 1] == '.');
    NumberToken num = read_number(text, i);
    const bool glued_after = num.end < text.size() && is_word_char(text[num.end]);
    if (glued_before || glued_after) {
      i = num.end;
      while (i < text.size() && is_word_char(text[i])) ++i;
      continue;
    }
    const bool negative = i > 0 && text[i - 1] == '-' &&
                          (i < 2 || !std::isalnum(static_cast<unsigned char>(text[i - 2])));
    double value = negative ? -num.value : num.value;
    i = num.end;
    if (auto den = ratio_denominator(text, num.end)) {
      if (den->value > 0.0) value = 100.0 * value / den->value;
      i = den->end;
    }
    last = value;
  }
  if (!last) throw Error(ErrorCode::kParseFailure, "no numeric rating in output");
  if (!std::isfinite(*last) || *last < 0.0 || *last > 100.0) {
    throw Error(ErrorCode::kParseFailure, "rating out of range");
  }
  return *last;
}

std::vector<std::string> validate_gold_spec(const GoldSpec& spec) {
  std::vector<std::string> problems;
  if (spec.members.empty()) problems.emplace_back("gold evaluator needs at least one member");
  if (spec.samples_k < 1) problems.emplace_back("gold samples_k must be >= 1");
  if (spec.parse_retries < 0) problems.emplace_back("gold parse_retries must be >= 0");
  for (const auto& m : spec.members) {
    if (m.endpoint_id.empty()) problems.emplace_back("gold member has no endpoint");
  }
  return problems;
}

std::string render_rating_prompt(const LlmPromptedSpec& spec, const EvalSample& sample,
                                 std::string_view response, const PromptLibrary& prompts) {
  const std::string tpl = prompts.get(template_id_for(spec, sample.task));
  return render_template(tpl, {
                                  {"context", sample.context},
                                  {"response", std::string(response)},
                                  {"reference", sample.reference.value_or("")},
                                  {"answer", sample.answer.value_or("")},
                                  {"task", std::string(task_kind_name(sample.task))},
                              });
}

Score evaluate(const EvaluatorSpec& spec, const EvalSample& sample, std::string_view response,
               EvaluationContext& ctx, std::atomic<std::int64_t>* victim_queries) {
  if (victim_queries) victim_queries->fetch_add(1);
  try {
    if (const auto* native = std::get_if<NativeMetricSpec>(&spec.kind)) {
      if (!sample.reference) {
        throw Error(ErrorCode::kMissingReference,
                    "sample '" + sample.id + "' has no reference for metric " + native->metric);
      }
      return metrics::score_by_name(native->metric, response, *sample.reference);
    }
    if (const auto* remote = std::get_if<RemoteHttpSpec>(&spec.kind)) {
      ScoreRequest req{sample.context, std::string(response), sample.reference,
                       std::string(task_kind_name(sample.task))};
      const double raw = post_score(remote->url, req, std::chrono::seconds(remote->timeout_s));
      return normalize_score(raw, 0.0, 100.0);
    }
    const auto& llm = std::get<LlmPromptedSpec>(spec.kind);
    const std::string prompt = render_rating_prompt(llm, sample, response, ctx.prompts);
    const int k = std::max(1, llm.samples_k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      sum += parse_rating(ctx.client.complete(rating_request(llm, prompt, i)).text);
    }
    return normalize_score(sum / k, 0.0, 100.0);
  } catch (const Error& e) {
    throw with_id(spec.id, e);
  }
}

GoldRating gold_rate_detailed(const GoldSpec& spec, const EvalSample& sample,
                              std::string_view response, EvaluationContext& ctx) {
  if (auto problems = validate_gold_spec(spec); !problems.empty()) {
    throw Error(ErrorCode::kInvalidConfig, problems.front());
  }
  GoldRating out;
  const int k = spec.samples_k;
  for (const LlmPromptedSpec& member : spec.members) {
    const std::string prompt = render_rating_prompt(member, sample, response, ctx.prompts);
    for (int slot = 0; slot < k; ++slot) {
      bool parsed = false;
      for (int attempt = 0; attempt <= spec.parse_retries && !parsed; ++attempt) {
        ++out.completions;
        try {
          const auto result = ctx.client.complete(rating_request(member, prompt, attempt * k + slot));
          out.ratings.push_back(parse_rating(result.text));
          parsed = true;
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kTransport) break;
          if (e.code() != ErrorCode::kParseFailure) throw;
        }
      }
      if (!parsed) ++out.failed;
    }
  }
  const int total = k * static_cast<int>(spec.members.size());
  if (out.ratings.empty() || 2 * out.failed > total) {
    throw Error(ErrorCode::kGoldUnavailable,
                std::to_string(out.failed) + " of " + std::to_string(total) +
                    " gold ratings failed for sample '" + sample.id + "'");
  }
  const auto [lo, hi] = std::minmax_element(out.ratings.begin(), out.ratings.end());
  // Rounding in the sum must not push the mean outside the observed ratings.
  const double mean = std::clamp(
      std::accumulate(out.ratings.begin(), out.ratings.end(), 0.0) / out.ratings.size(), *lo,
      *hi);
  out.score = normalize_score(mean, 0.0, 100.0);
  return out;
}

Score gold_rate(const GoldSpec& spec, const EvalSample& sample, std::string_view response,
                EvaluationContext& ctx) {
  return gold_rate_detailed(spec, sample, response, ctx).score;
}

}  // namespace advforge
