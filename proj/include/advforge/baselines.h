// Rule-based perturbation baselines.
//
// Invariant rules (synonym replacement, expansion, contraction) try to keep a
// response's quality and so target kPlus. Deterioration rules (jumble, change
// name, negation, question rewrites) try to break it and target kMinus.

#ifndef ADVFORGE_BASELINES_H_
#define ADVFORGE_BASELINES_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "advforge/core.h"
#include "advforge/evaluators.h"
#include "advforge/prompt_library.h"
#include "advforge/report.h"

namespace advforge {

enum class RuleName {
  kSynonymReplace,
  kExpansion,
  kContraction,
  kJumble,
  kChangeName,
  kNegateUtterance,
  kChangeQuestionWord,
  kQuestionToAssertion,
};

std::string_view rule_name(RuleName rule);
RuleName parse_rule_name(std::string_view name);
Direction rule_direction(RuleName rule);
bool rule_requires_question(RuleName rule);

struct PerturbRule {
  RuleName name = RuleName::kSynonymReplace;
  Direction direction = Direction::kPlus;
  std::uint64_t seed = 0;
};

// Pairs the rule with its fixed direction.
PerturbRule make_rule(RuleName name, std::uint64_t seed);

struct Lexicons {
  std::map<std::string, std::vector<std::string>> synonyms;
  // (contracted, expanded), both lowercase.
  std::vector<std::pair<std::string, std::string>> contractions;
  std::vector<std::string> names;

  // Tables are "a<TAB>b" lines, the name list one name per line. Lines
  // starting with '#' are comments.
  static Lexicons parse(const std::string& synonyms, const std::string& contractions,
                        const std::string& names);
  // Reads <asset_dir>/lexicons/{synonyms,contractions,names}.txt.
  static Lexicons load(const std::filesystem::path& asset_dir = default_asset_dir());
};

// Perturbs sample.response. Deterministic in (rule, sample). Throws
// kRuleInapplicable when the rule's trigger is absent and kInvalidInput when
// rule.direction does not match the rule.
std::string perturb(const PerturbRule& rule, const EvalSample& sample, const Lexicons& lexicons);

// Token shuffle used by kJumble: Fisher-Yates driven by SplitMix64(seed),
// swapping i with next() % (i + 1) for i = n-1 .. 1.
std::vector<std::string> jumble_tokens(std::vector<std::string> tokens, std::uint64_t seed);

// Seed for the v-th variant of a rule.
std::uint64_t variant_seed(std::uint64_t rule_seed, int variant);

// Scores up to cfg.victim_budget distinct perturbed variants per sample. A
// sample succeeds when any variant meets the success criteria; the reported
// candidate is the best successful variant, or the best variant overall.
CampaignReport run_baseline_campaign(const PerturbRule& rule, std::span<const EvalSample> dataset,
                                     const EvaluatorSpec& victim, const GoldSpec& gold,
                                     const AttackConfig& cfg, EvaluationContext& ctx,
                                     const Lexicons& lexicons, int workers = 4);

}  // namespace advforge

#endif  // ADVFORGE_BASELINES_H_
