#include "advforge/core.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>

namespace advforge {
namespace {

std::atomic<std::uint64_t> g_clamp_events{0};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kTransport: return "TransportError";
    case ErrorCode::kEndpointUnknown: return "EndpointUnknown";
    case ErrorCode::kDuplicateEndpoint: return "DuplicateEndpoint";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kScriptExhausted: return "ScriptExhausted";
    case ErrorCode::kMissingReference: return "MissingReference";
    case ErrorCode::kParseFailure: return "ParseFailure";
    case ErrorCode::kGoldUnavailable: return "GoldUnavailable";
    case ErrorCode::kEvaluator: return "EvaluatorError";
    case ErrorCode::kContractViolation: return "ContractViolation";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kRuleInapplicable: return "RuleInapplicable";
    case ErrorCode::kDataset: return "DatasetError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

Score::Score(double value) : value_(value) {
  if (!std::isfinite(value) || value < 0.0 || value > 100.0) {
    throw Error(ErrorCode::kInvalidRange,
                "score outside [0, 100]: " + std::to_string(value));
  }
}

FeedbackScore::FeedbackScore(double value) : value_(value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidRange, "feedback score is not finite");
  }
}

TaskKind parse_task_kind(std::string_view name) {
  const std::string n = lower(name);
  if (n == "dialogue" || n == "dialog") return TaskKind::kDialogue;
  if (n == "summarization" || n == "summ" || n == "summary") return TaskKind::kSummarization;
  if (n == "question" || n == "question_eval" || n == "questioneval" || n == "qg") {
    return TaskKind::kQuestionEval;
  }
  throw Error(ErrorCode::kInvalidInput, "unknown task kind '" + std::string(name) + "'");
}

std::string_view task_kind_name(TaskKind task) {
  switch (task) {
    case TaskKind::kDialogue: return "dialogue";
    case TaskKind::kSummarization: return "summarization";
    case TaskKind::kQuestionEval: return "question";
  }
  return "dialogue";
}

Direction parse_direction(std::string_view name) {
  const std::string n = lower(name);
  if (n == "plus" || n == "+" || n == "r+") return Direction::kPlus;
  if (n == "minus" || n == "-" || n == "r-") return Direction::kMinus;
  throw Error(ErrorCode::kInvalidInput, "unknown direction '" + std::string(name) + "'");
}

std::string_view direction_name(Direction direction) {
  return direction == Direction::kPlus ? "plus" : "minus";
}

std::vector<std::string> validate_sample(const EvalSample& sample) {
  std::vector<std::string> problems;
  if (sample.id.empty()) problems.emplace_back("id is empty");
  if (blank(sample.context)) problems.emplace_back("context is empty");
  if (blank(sample.response)) problems.emplace_back("response is empty");
  const bool is_question = sample.task == TaskKind::kQuestionEval;
  if (is_question && !sample.answer) {
    problems.emplace_back("question evaluation sample requires an answer");
  }
  if (!is_question && sample.answer) {
    problems.emplace_back("answer is only allowed for question evaluation samples");
  }
  return problems;
}

double AttackConfig::effective_stop_threshold() const {
  return stop_threshold.value_or(alpha * tau1_plus - tau1_minus);
}

std::vector<ConfigViolation> validate_config(const AttackConfig& cfg) {
  std::vector<ConfigViolation> out;
  auto fail = [&out](std::string field, std::string message) {
    out.push_back({std::move(field), std::move(message)});
  };
  if (!std::isfinite(cfg.alpha) || cfg.alpha <= 0.0) fail("alpha", "alpha must be positive");
  if (!std::isfinite(cfg.tau1_plus) || !std::isfinite(cfg.tau1_minus) ||
      cfg.tau1_minus < 0.0 || cfg.tau1_plus > 100.0) {
    fail("tau1", "tau1 thresholds must lie in [0, 100]");
  }
  if (!(cfg.tau1_minus < cfg.tau1_plus)) fail("tau1", "tau1 ordering");
  if (!std::isfinite(cfg.tau2) || cfg.tau2 <= 0.0 || cfg.tau2 > 100.0) {
    fail("tau2", "tau2 must lie in (0, 100]");
  }
  if (cfg.victim_budget <= 0) fail("victim_budget", "budget must be positive");
  if (cfg.candidates_per_iter <= 0) {
    fail("candidates_per_iter", "candidates_per_iter must be positive");
  }
  if (cfg.gold_samples_k <= 0) fail("gold_samples_k", "gold_samples_k must be positive");
  if (cfg.trajectory_cap <= 0) fail("trajectory_cap", "trajectory_cap must be positive");
  if (cfg.max_iterations <= 0) fail("max_iterations", "max_iterations must be positive");
  if (cfg.stop_threshold && !std::isfinite(*cfg.stop_threshold)) {
    fail("stop_threshold", "stop_threshold must be finite");
  }
  if (cfg.gold_parse_retries < 0) {
    fail("gold_parse_retries", "gold_parse_retries must be non-negative");
  }
  if (cfg.max_consecutive_empty <= 0) {
    fail("max_consecutive_empty", "max_consecutive_empty must be positive");
  }
  if (cfg.generator.temperature < 0.0 || !std::isfinite(cfg.generator.temperature)) {
    fail("generator.temperature", "temperature must be non-negative");
  }
  if (cfg.generator.max_tokens <= 0) {
    fail("generator.max_tokens", "max_tokens must be positive");
  }
  return out;
}

Score normalize_score(double raw, double source_min, double source_max) {
  if (!std::isfinite(raw) || !std::isfinite(source_min) || !std::isfinite(source_max) ||
      !(source_min < source_max)) {
    throw Error(ErrorCode::kInvalidRange, "normalize_score: invalid raw value or range");
  }
  if (raw < source_min || raw > source_max) {
    g_clamp_events.fetch_add(1, std::memory_order_relaxed);
  }
  const double clamped = std::clamp(raw, source_min, source_max);
  if (source_min == 0.0 && source_max == 100.0) return Score(clamped);
  const double scaled = 100.0 * (clamped - source_min) / (source_max - source_min);
  return Score(std::clamp(scaled, 0.0, 100.0));
}

std::uint64_t clamp_event_count() {
  return g_clamp_events.load(std::memory_order_relaxed);
}

}  // namespace advforge
