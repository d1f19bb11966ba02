// Reference-based lexical evaluators (BLEU and ROUGE family).
//
// All functions are pure. Scores are reported on the shared 0..100 scale.

#ifndef ADVFORGE_METRICS_H_
#define ADVFORGE_METRICS_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advforge/core.h"

namespace advforge::metrics {

// Lowercased tokens. Only tokenize() produces these, so no token is empty.
class TokenSequence {
 public:
  TokenSequence() = default;

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  friend TokenSequence tokenize(std::string_view text);
  explicit TokenSequence(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {}

  std::vector<std::string> tokens_;
};

// Lowercases ASCII letters, splits on Unicode whitespace and emits each of
// . , ! ? ; : " ' ( ) as its own token.
TokenSequence tokenize(std::string_view text);

// Sentence BLEU over orders 1..max_n with the closest-reference brevity
// penalty. A zero match count at order >= 2 is smoothed to 1/(total + 1).
Score bleu(const TokenSequence& candidate, std::span<const TokenSequence> references,
           int max_n = 4);

// F1 of clipped n-gram overlap. 0 when either side has fewer than n tokens.
Score rouge_n(const TokenSequence& candidate, const TokenSequence& reference, int n);

// F1 over the longest common subsequence.
Score rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

// Names accepted by score_by_name: bleu, rouge1, rouge2, rougel.
bool is_metric_name(std::string_view name);
Score score_by_name(std::string_view name, std::string_view candidate,
                    std::string_view reference);

}  // namespace advforge::metrics

#endif  // ADVFORGE_METRICS_H_
