// Domain types and configuration shared by every advforge module.

#ifndef ADVFORGE_CORE_H_
#define ADVFORGE_CORE_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace advforge {

enum class ErrorCode {
  kInvalidRange,
  kInvalidInput,
  kInvalidConfig,
  kTransport,
  kEndpointUnknown,
  kDuplicateEndpoint,
  kBudgetExceeded,
  kScriptExhausted,
  kMissingReference,
  kParseFailure,
  kGoldUnavailable,
  kEvaluator,
  kContractViolation,
  kNoCandidates,
  kRuleInapplicable,
  kDataset,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A rating on the shared 0..100 scale. Construction rejects anything else.
class Score {
 public:
  constexpr Score() = default;
  explicit Score(double value);

  double value() const noexcept { return value_; }

  friend bool operator==(Score a, Score b) { return a.value_ == b.value_; }
  friend auto operator<=>(Score a, Score b) { return a.value_ <=> b.value_; }

 private:
  double value_ = 0.0;
};

// Optimization objective handed back to the generator. Any finite value.
class FeedbackScore {
 public:
  constexpr FeedbackScore() = default;
  explicit FeedbackScore(double value);

  double value() const noexcept { return value_; }

  friend bool operator==(FeedbackScore a, FeedbackScore b) {
    return a.value_ == b.value_;
  }
  friend auto operator<=>(FeedbackScore a, FeedbackScore b) {
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = 0.0;
};

enum class TaskKind { kDialogue, kSummarization, kQuestionEval };

// kPlus: human-good but victim-low. kMinus: human-bad but victim-high.
enum class Direction { kPlus, kMinus };

// Accepts the canonical names plus the short aliases used in datasets
// ("dialog", "summ", "question", "qg"). Throws kInvalidInput otherwise.
TaskKind parse_task_kind(std::string_view name);
std::string_view task_kind_name(TaskKind task);

Direction parse_direction(std::string_view name);
std::string_view direction_name(Direction direction);

struct EvalSample {
  std::string id;
  TaskKind task = TaskKind::kDialogue;
  std::string context;
  std::string response;
  std::optional<std::string> reference;
  std::optional<std::string> answer;

  friend bool operator==(const EvalSample&, const EvalSample&) = default;
};

// Returns a list of human-readable invariant violations; empty means valid.
std::vector<std::string> validate_sample(const EvalSample& sample);

struct Candidate {
  std::string text;
  Score s_gold;
  Score s_victim;
  FeedbackScore s_fb;
  int iteration = 0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Completion endpoint settings for the generator or an LLM evaluator.
struct GeneratorSettings {
  std::string endpoint_id;
  std::string model;
  double temperature = 1.0;
  int max_tokens = 1024;

  friend bool operator==(const GeneratorSettings&,
                         const GeneratorSettings&) = default;
};

struct AttackConfig {
  double alpha = 1.0;
  double tau1_plus = 70.0;
  double tau1_minus = 30.0;
  double tau2 = 40.0;
  int victim_budget = 300;
  int candidates_per_iter = 4;
  int gold_samples_k = 8;
  int trajectory_cap = 10;
  int max_iterations = 75;
  // Unset means alpha * tau1_plus - tau1_minus.
  std::optional<double> stop_threshold;
  bool include_criteria = true;
  // Start kMinus attacks from another sample's response instead of R0.
  bool random_init_minus = false;
  int gold_parse_retries = 2;
  int max_consecutive_empty = 3;
  GeneratorSettings generator;
  std::uint64_t random_seed = 0;

  double effective_stop_threshold() const;

  friend bool operator==(const AttackConfig&, const AttackConfig&) = default;
};

struct ConfigViolation {
  std::string field;
  std::string message;
};

// Collects every violated invariant rather than stopping at the first.
std::vector<ConfigViolation> validate_config(const AttackConfig& cfg);

// Maps raw onto 0..100 after clamping into [source_min, source_max].
// Clamp events are counted in clamp_event_count().
Score normalize_score(double raw, double source_min, double source_max);

std::uint64_t clamp_event_count();

}  // namespace advforge

#endif  // ADVFORGE_CORE_H_
