// Generation prompt assembly and candidate extraction.

#ifndef ADVFORGE_GENERATOR_H_
#define ADVFORGE_GENERATOR_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advforge/core.h"
#include "advforge/prompt_library.h"

namespace advforge {

inline constexpr std::string_view kResponseMarker = "<RES>";

struct PromptTemplate {
  TaskKind task = TaskKind::kDialogue;
  Direction direction = Direction::kPlus;
  std::string instruction;
  std::optional<std::string> criteria;
  std::string closing;
};

// Reads prompts/<task>/<direction>/{instruction,criteria} and
// prompts/generator/closing. Criteria are attached only when include_criteria
// is set and the asset exists.
PromptTemplate load_prompt_template(const PromptLibrary& prompts, TaskKind task,
                                    Direction direction, bool include_criteria);

struct PromptOptions {
  int trajectory_cap = 10;
  int candidates_per_iter = 4;
};

// Emits instruction, criteria, the sample's context (plus the answer for
// question evaluation), the trajectory as "(response, score)" lines and the
// closing request. trajectory must be ascending by s_fb and no longer than
// trajectory_cap, otherwise kContractViolation.
std::string build_prompt(const PromptTemplate& tpl, const EvalSample& sample,
                         std::span<const Candidate> trajectory, const PromptOptions& options);

// Strings enclosed by consecutive marker pairs, trimmed, empties dropped,
// exact repeats removed. Throws kNoCandidates if nothing is left.
std::vector<std::string> parse_candidates(std::string_view raw);

// Inverse of parse_candidates for marker-free, trimmed, distinct inputs.
std::string format_candidates(std::span<const std::string> candidates);

// One decimal place, as shown to the generator.
std::string format_score(double value);

std::string trim(std::string_view text);

}  // namespace advforge

#endif  // ADVFORGE_GENERATOR_H_
