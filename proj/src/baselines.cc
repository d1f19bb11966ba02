#include "advforge/baselines.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <set>
#include <sstream>

#include "advforge/config_io.h"
#include "advforge/generator.h"
#include "advforge/optimizer.h"
#include "advforge/parallel.h"
#include "advforge/rng.h"

namespace advforge {
namespace {

struct RuleInfo {
  RuleName rule;
  std::string_view name;
  Direction direction;
};

constexpr RuleInfo kRules[] = {
    {RuleName::kSynonymReplace, "synonym_replace", Direction::kPlus},
    {RuleName::kExpansion, "expansion", Direction::kPlus},
    {RuleName::kContraction, "contraction", Direction::kPlus},
    {RuleName::kJumble, "jumble", Direction::kMinus},
    {RuleName::kChangeName, "change_name", Direction::kMinus},
    {RuleName::kNegateUtterance, "negate_utterance", Direction::kMinus},
    {RuleName::kChangeQuestionWord, "change_question_word", Direction::kMinus},
    {RuleName::kQuestionToAssertion, "question_to_assertion", Direction::kMinus},
};

const RuleInfo& info(RuleName rule) {
  for (const auto& r : kRules) {
    if (r.rule == rule) return r;
  }
  throw Error(ErrorCode::kInvalidInput, "unknown rule");
}

Error inapplicable(RuleName rule, const std::string& why) {
  return Error(ErrorCode::kRuleInapplicable, std::string(rule_name(rule)) + ": " + why);
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// A word starts with a letter and continues with letters or an apostrophe
// followed by a letter ("don't", "It's").
struct WordSpan {
  std::size_t begin;
  std::size_t end;
};

std::vector<WordSpan> word_spans(std::string_view text) {
  std::vector<WordSpan> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_alpha(text[i])) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < text.size() &&
           (is_alpha(text[i]) || (text[i] == '\'' && i + 1 < text.size() && is_alpha(text[i + 1])))) {
      ++i;
    }
    out.push_back({begin, i});
  }
  return out;
}

// Copies the capitalization pattern of `like` onto `word`.
std::string match_case(std::string_view like, std::string word) {
  if (like.empty() || word.empty()) return word;
  const bool all_upper =
      like.size() > 1 && std::all_of(like.begin(), like.end(), [](char c) {
        return !is_alpha(c) || is_upper(c);
      });
  if (all_upper) {
    for (char& c : word) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  } else if (is_upper(like.front())) {
    word.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(word.front())));
  }
  return word;
}

struct Replacement {
  std::size_t begin;
  std::size_t end;
  std::string text;
};

std::string apply(std::string_view text, std::vector<Replacement> edits) {
  std::sort(edits.begin(), edits.end(),
            [](const Replacement& a, const Replacement& b) { return a.begin < b.begin; });
  std::string out;
  std::size_t pos = 0;
  for (const auto& e : edits) {
    out.append(text.substr(pos, e.begin - pos));
    out.append(e.text);
    pos = e.end;
  }
  out.append(text.substr(pos));
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

const std::vector<std::string>& question_cycle() {
  static const std::vector<std::string> kCycle = {"what", "who", "when", "where", "why", "how"};
  return kCycle;
}

bool is_wh_word(const std::string& w) {
  static const std::set<std::string> kWh = {"what", "who",   "when",  "where", "why",
                                            "how",  "which", "whom",  "whose"};
  return kWh.count(w) > 0;
}

const std::set<std::string>& auxiliaries() {
  static const std::set<std::string> kAux = {
      "am",  "is",    "are",    "was",  "were",  "be",   "been", "do",   "does", "did",
      "can", "could", "will",   "would", "shall", "should", "may", "might", "must",
      "have", "has",  "had"};
  return kAux;
}

const std::map<std::string, std::string>& negative_contractions() {
  static const std::map<std::string, std::string> kNeg = {
      {"don't", "do"},       {"doesn't", "does"},   {"didn't", "did"},     {"isn't", "is"},
      {"aren't", "are"},     {"wasn't", "was"},     {"weren't", "were"},   {"can't", "can"},
      {"cannot", "can"},     {"couldn't", "could"}, {"won't", "will"},     {"wouldn't", "would"},
      {"shouldn't", "should"}, {"haven't", "have"}, {"hasn't", "has"},     {"hadn't", "had"},
      {"mustn't", "must"},   {"mightn't", "might"}, {"shan't", "shall"}};
  return kNeg;
}

bool is_determiner(const std::string& w) {
  static const std::set<std::string> kDet = {"the", "a",  "an",  "this", "that", "these",
                                             "those", "my", "your", "his", "her", "its",
                                             "our",  "their", "some", "any"};
  return kDet.count(w) > 0;
}

std::string strip_trailing(std::string word, std::string_view chars) {
  while (!word.empty() && chars.find(word.back()) != std::string_view::npos) word.pop_back();
  return word;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

// ---- individual rules ------------------------------------------------------

std::string synonym_replace(std::string_view text, const Lexicons& lex, std::uint64_t seed) {
  const auto spans = word_spans(text);
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const std::string w = lower(text.substr(spans[i].begin, spans[i].end - spans[i].begin));
    if (lex.synonyms.count(w)) hits.push_back(i);
  }
  if (hits.empty()) throw inapplicable(RuleName::kSynonymReplace, "no word with a known synonym");
  SplitMix64 rng(seed);
  const std::size_t take = std::min<std::size_t>(2, hits.size());
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.below(hits.size() - i);
    std::swap(hits[i], hits[j]);
  }
  std::vector<Replacement> edits;
  for (std::size_t i = 0; i < take; ++i) {
    const WordSpan& s = spans[hits[i]];
    const std::string_view original = text.substr(s.begin, s.end - s.begin);
    const auto& options = lex.synonyms.at(lower(original));
    edits.push_back({s.begin, s.end, match_case(original, options[rng.below(options.size())])});
  }
  return apply(text, std::move(edits));
}

std::string expand(std::string_view text, const Lexicons& lex) {
  std::map<std::string, std::string> table;
  for (const auto& [contracted, expanded] : lex.contractions) table.emplace(contracted, expanded);
  std::vector<Replacement> edits;
  for (const WordSpan& s : word_spans(text)) {
    const std::string_view original = text.substr(s.begin, s.end - s.begin);
    if (auto it = table.find(lower(original)); it != table.end()) {
      edits.push_back({s.begin, s.end, match_case(original.substr(0, 1), it->second)});
    }
  }
  if (edits.empty()) throw inapplicable(RuleName::kExpansion, "no contraction to expand");
  return apply(text, std::move(edits));
}

std::string contract(std::string_view text, const Lexicons& lex) {
  struct Phrase {
    std::vector<std::string> words;
    std::string contracted;
  };
  std::vector<Phrase> phrases;
  for (const auto& [contracted, expanded] : lex.contractions) {
    phrases.push_back({split_words(expanded), contracted});
  }
  std::stable_sort(phrases.begin(), phrases.end(), [](const Phrase& a, const Phrase& b) {
    return a.words.size() > b.words.size();
  });
  const auto spans = word_spans(text);
  std::vector<Replacement> edits;
  for (std::size_t i = 0; i < spans.size();) {
    bool matched = false;
    for (const Phrase& p : phrases) {
      const std::size_t k = p.words.size();
      if (k == 0 || i + k > spans.size()) continue;
      bool ok = true;
      for (std::size_t m = 0; m < k && ok; ++m) {
        const WordSpan& s = spans[i + m];
        ok = lower(text.substr(s.begin, s.end - s.begin)) == p.words[m];
        if (ok && m > 0) ok = text.substr(spans[i + m - 1].end, s.begin - spans[i + m - 1].end) == " ";
      }
      if (!ok) continue;
      const std::string_view first = text.substr(spans[i].begin, 1);
      edits.push_back({spans[i].begin, spans[i + k - 1].end, match_case(first, p.contracted)});
      i += k;
      matched = true;
      break;
    }
    if (!matched) ++i;
  }
  if (edits.empty()) throw inapplicable(RuleName::kContraction, "no phrase to contract");
  return apply(text, std::move(edits));
}

std::string jumble(std::string_view text, std::uint64_t seed) {
  const std::vector<std::string> tokens = split_words(text);
  const std::set<std::string> distinct(tokens.begin(), tokens.end());
  if (distinct.size() < 2) throw inapplicable(RuleName::kJumble, "fewer than two distinct tokens");
  std::uint64_t s = seed;
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<std::string> shuffled = jumble_tokens(tokens, s);
    if (shuffled != tokens) return join_words(shuffled);
    s = SplitMix64(s).next();
  }
  // Only reachable with astronomically bad luck; fall back to a rotation.
  std::vector<std::string> rotated(tokens.begin() + 1, tokens.end());
  rotated.push_back(tokens.front());
  return join_words(rotated);
}

std::string change_name(std::string_view text, const Lexicons& lex, std::uint64_t seed) {
  if (lex.names.empty()) throw inapplicable(RuleName::kChangeName, "name list is empty");
  const auto spans = word_spans(text);
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const std::string_view w = text.substr(spans[i].begin, spans[i].end - spans[i].begin);
    if (w.size() < 2 || !is_upper(w[0])) continue;
    if (!std::all_of(w.begin() + 1, w.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); })) {
      continue;
    }
    // Skip sentence-initial words.
    std::size_t p = spans[i].begin;
    while (p > 0 && std::isspace(static_cast<unsigned char>(text[p - 1]))) --p;
    if (p == 0) continue;
    const char before = text[p - 1];
    if (before == '.' || before == '!' || before == '?' || before == ':' || before == '"') continue;
    hits.push_back(i);
  }
  if (hits.empty()) throw inapplicable(RuleName::kChangeName, "no capitalized non-initial word");
  SplitMix64 rng(seed);
  std::map<std::string, std::string> mapping;
  std::set<std::string> used;
  std::vector<Replacement> edits;
  for (std::size_t i : hits) {
    const std::string original(text.substr(spans[i].begin, spans[i].end - spans[i].begin));
    auto it = mapping.find(original);
    if (it == mapping.end()) {
      std::string pick;
      for (int tries = 0; tries < 64; ++tries) {
        pick = lex.names[rng.below(lex.names.size())];
        if (pick != original && !used.count(pick)) break;
      }
      if (pick == original) {
        for (const auto& n : lex.names) {
          if (n != original) pick = n;
        }
      }
      used.insert(pick);
      it = mapping.emplace(original, pick).first;
    }
    edits.push_back({spans[i].begin, spans[i].end, it->second});
  }
  return apply(text, std::move(edits));
}

std::string negate(std::string_view text) {
  const auto spans = word_spans(text);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const std::string_view original = text.substr(spans[i].begin, spans[i].end - spans[i].begin);
    const std::string w = lower(original);
    if (auto it = negative_contractions().find(w); it != negative_contractions().end()) {
      return apply(text, {{spans[i].begin, spans[i].end, match_case(original, it->second)}});
    }
    if (!auxiliaries().count(w)) continue;
    if (i + 1 < spans.size()) {
      const WordSpan& next = spans[i + 1];
      if (lower(text.substr(next.begin, next.end - next.begin)) == "not") {
        return apply(text, {{spans[i].end, next.end, ""}});
      }
    }
    return apply(text, {{spans[i].end, spans[i].end, " not"}});
  }
  throw inapplicable(RuleName::kNegateUtterance, "no auxiliary verb");
}

std::string change_question_word(std::string_view text) {
  const auto spans = word_spans(text);
  if (!spans.empty()) {
    const WordSpan& s = spans.front();
    const std::string_view original = text.substr(s.begin, s.end - s.begin);
    const auto& cycle = question_cycle();
    const auto it = std::find(cycle.begin(), cycle.end(), lower(original));
    if (it != cycle.end()) {
      const std::string& next = (it + 1 == cycle.end()) ? cycle.front() : *(it + 1);
      return apply(text, {{s.begin, s.end, match_case(original, next)}});
    }
  }
  throw inapplicable(RuleName::kChangeQuestionWord, "no leading wh-word");
}

std::string question_to_assertion(std::string_view text) {
  std::vector<std::string> words = split_words(text);
  if (words.empty()) throw inapplicable(RuleName::kQuestionToAssertion, "empty question");
  const bool has_mark = text.find('?') != std::string_view::npos;
  words.back() = strip_trailing(words.back(), "?");
  if (words.back().empty()) words.pop_back();
  if (words.empty()) throw inapplicable(RuleName::kQuestionToAssertion, "empty question");

  const bool wh = is_wh_word(lower(words.front()));
  if (wh) {
    words.erase(words.begin());
  } else if (!has_mark || !auxiliaries().count(lower(words.front()))) {
    throw inapplicable(RuleName::kQuestionToAssertion, "no wh-word or inverted auxiliary");
  }
  if (words.empty()) throw inapplicable(RuleName::kQuestionToAssertion, "nothing after wh-word");

  const std::string aux = lower(words.front());
  if (auxiliaries().count(aux) && words.size() >= 2) {
    const std::string aux_word = lower(words.front());
    words.erase(words.begin());
    static const std::set<std::string> kBe = {"am", "is", "are", "was", "were"};
    static const std::set<std::string> kDo = {"do", "does", "did"};
    if (wh && kBe.count(aux)) {
      words.push_back(aux_word);
    } else if (kDo.count(aux)) {
      // do-support disappears in the declarative form.
    } else {
      const std::size_t subject = (is_determiner(lower(words.front())) && words.size() >= 2) ? 2 : 1;
      words.insert(words.begin() + subject, aux_word);
    }
  }
  std::string out = capitalize(join_words(words));
  out = strip_trailing(out, ",;:");
  return out + ".";
}

std::vector<std::pair<std::string, std::string>> read_table(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) continue;
    out.emplace_back(lower(line.substr(0, tab)), lower(line.substr(tab + 1)));
  }
  return out;
}

}  // namespace

std::string_view rule_name(RuleName rule) { return info(rule).name; }

RuleName parse_rule_name(std::string_view name) {
  for (const auto& r : kRules) {
    if (r.name == name) return r.rule;
  }
  throw Error(ErrorCode::kInvalidInput, "unknown rule '" + std::string(name) + "'");
}

Direction rule_direction(RuleName rule) { return info(rule).direction; }

bool rule_requires_question(RuleName rule) {
  return rule == RuleName::kChangeQuestionWord || rule == RuleName::kQuestionToAssertion;
}

PerturbRule make_rule(RuleName name, std::uint64_t seed) {
  return {name, rule_direction(name), seed};
}

Lexicons Lexicons::parse(const std::string& synonyms, const std::string& contractions,
                         const std::string& names_text) {
  Lexicons lex;
  for (auto& [word, synonym] : read_table(synonyms)) {
    if (word != synonym) lex.synonyms[word].push_back(synonym);
  }
  lex.contractions = read_table(contractions);
  std::istringstream names(names_text);
  std::string line;
  while (std::getline(names, line)) {
    line = trim(line);
    if (!line.empty() && line[0] != '#') lex.names.push_back(line);
  }
  return lex;
}

Lexicons Lexicons::load(const std::filesystem::path& asset_dir) {
  const auto dir = asset_dir / "lexicons";
  return parse(read_text_file(dir / "synonyms.txt"), read_text_file(dir / "contractions.txt"),
               read_text_file(dir / "names.txt"));
}

std::vector<std::string> jumble_tokens(std::vector<std::string> tokens, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (std::size_t i = tokens.size(); i-- > 1;) {
    const std::size_t j = rng.below(i + 1);
    std::swap(tokens[i], tokens[j]);
  }
  return tokens;
}

std::uint64_t variant_seed(std::uint64_t rule_seed, int variant) {
  if (variant == 0) return rule_seed;
  return SplitMix64(rule_seed + static_cast<std::uint64_t>(variant)).next();
}

std::string perturb(const PerturbRule& rule, const EvalSample& sample, const Lexicons& lexicons) {
  if (rule.direction != rule_direction(rule.name)) {
    throw Error(ErrorCode::kInvalidInput, std::string(rule_name(rule.name)) + " is a " +
                                              std::string(direction_name(rule_direction(rule.name))) +
                                              " rule");
  }
  if (rule_requires_question(rule.name) && sample.task != TaskKind::kQuestionEval) {
    throw inapplicable(rule.name, "requires a question evaluation sample");
  }
  const std::string_view text = sample.response;
  switch (rule.name) {
    case RuleName::kSynonymReplace: return synonym_replace(text, lexicons, rule.seed);
    case RuleName::kExpansion: return expand(text, lexicons);
    case RuleName::kContraction: return contract(text, lexicons);
    case RuleName::kJumble: return jumble(text, rule.seed);
    case RuleName::kChangeName: return change_name(text, lexicons, rule.seed);
    case RuleName::kNegateUtterance: return negate(text);
    case RuleName::kChangeQuestionWord: return change_question_word(text);
    case RuleName::kQuestionToAssertion: return question_to_assertion(text);
  }
  throw Error(ErrorCode::kInvalidInput, "unknown rule");
}

CampaignReport run_baseline_campaign(const PerturbRule& rule, std::span<const EvalSample> dataset,
                                     const EvaluatorSpec& victim, const GoldSpec& gold,
                                     const AttackConfig& cfg, EvaluationContext& ctx,
                                     const Lexicons& lexicons, int workers) {
  if (dataset.empty()) throw Error(ErrorCode::kInvalidInput, "campaign dataset is empty");
  if (auto problems = validate_config(cfg); !problems.empty()) {
    throw Error(ErrorCode::kInvalidConfig, problems.front().field + ": " + problems.front().message);
  }
  const auto start = std::chrono::steady_clock::now();
  CampaignReport report;
  report.victim_id = victim.id;
  report.method = "baseline:" + std::string(rule_name(rule.name));
  report.config_fingerprint = config_fingerprint(cfg);
  if (!direction_applicable(victim, rule.direction)) {
    report.wall_clock_ms = 0;
    return report;
  }
  report.summary(rule.direction) = DirectionSummary{};

  GoldSpec gold_cfg = gold;
  gold_cfg.samples_k = cfg.gold_samples_k;
  gold_cfg.parse_retries = cfg.gold_parse_retries;

  std::vector<SampleOutcome> outcomes(dataset.size());
  parallel_for(dataset.size(), workers, [&](std::size_t idx) {
    const EvalSample& sample = dataset[idx];
    SampleOutcome& outcome = outcomes[idx];
    outcome.sample_id = sample.id;
    outcome.direction = rule.direction;
    try {
      if (victim.needs_reference() && !sample.reference) {
        throw Error(ErrorCode::kMissingReference, "sample has no reference");
      }
      AttackResult result;
      result.sample_id = sample.id;
      result.direction = rule.direction;
      result.terminated_by = Termination::kBudget;
      std::atomic<std::int64_t> victim_queries{0};
      std::set<std::string> seen = {sample.response};
      std::optional<Candidate> best;
      bool any_success = false;
      for (int v = 0; v < cfg.victim_budget; ++v) {
        PerturbRule variant = rule;
        variant.seed = variant_seed(rule.seed, v);
        std::string text = perturb(variant, sample, lexicons);
        if (!seen.insert(text).second) continue;
        const GoldRating g = gold_rate_detailed(gold_cfg, sample, text, ctx);
        result.gold_queries += g.completions;
        const Score s_victim = evaluate(victim, sample, text, ctx, &victim_queries);
        Candidate c{std::move(text), g.score, s_victim,
                    feedback_score(g.score, s_victim, rule.direction, cfg.alpha), v + 1};
        ++result.all_scored;
        const bool ok = is_success(c.s_gold, c.s_victim, rule.direction, cfg);
        if (!best || (ok && !any_success) || (ok == any_success && ranks_before(c, *best))) {
          best = c;
        }
        any_success = any_success || ok;
      }
      if (!best) {
        throw Error(ErrorCode::kRuleInapplicable,
                    std::string(rule_name(rule.name)) + ": no variant differs from the input");
      }
      result.best = *best;
      result.success = any_success;
      result.victim_queries = static_cast<int>(victim_queries.load());
      outcome.result = result;
    } catch (const Error& e) {
      outcome.error = std::string(error_code_name(e.code())) + ": " + e.what();
    }
  });
  report.per_sample = std::move(outcomes);
  tally(report);
  report.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  return report;
}

}  // namespace advforge
