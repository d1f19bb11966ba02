#include "advforge/metrics.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>
#include <string_view>

namespace advforge::metrics {
namespace {

bool is_split_punct(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':':
    case '"': case '\'': case '(': case ')':
      return true;
    default:
      return false;
  }
}

// Byte length of the Unicode whitespace sequence starting at text[i], or 0.
std::size_t whitespace_len(std::string_view text, std::size_t i) {
  const auto b = [&](std::size_t k) -> unsigned char {
    return i + k < text.size() ? static_cast<unsigned char>(text[i + k]) : 0;
  };
  const unsigned char c = b(0);
  if (c == ' ' || (c >= 0x09 && c <= 0x0D)) return 1;
  if (c == 0xC2 && (b(1) == 0x85 || b(1) == 0xA0)) return 2;
  if (c == 0xE1 && b(1) == 0x9A && b(2) == 0x80) return 3;  // U+1680
  if (c == 0xE2 && b(1) == 0x80) {
    const unsigned char d = b(2);
    if ((d >= 0x80 && d <= 0x8A) || d == 0xA8 || d == 0xA9 || d == 0xAF) return 3;
  }
  if (c == 0xE2 && b(1) == 0x81 && b(2) == 0x9F) return 3;  // U+205F
  if (c == 0xE3 && b(1) == 0x80 && b(2) == 0x80) return 3;  // U+3000
  return 0;
}

// Tokens mapped to dense ids so n-grams compare as integer spans.
class Interner {
 public:
  std::vector<int> ids(const TokenSequence& seq) {
    std::vector<int> out;
    out.reserve(seq.size());
    for (const auto& t : seq.tokens()) {
      out.push_back(table_.try_emplace(t, static_cast<int>(table_.size())).first->second);
    }
    return out;
  }

 private:
  std::unordered_map<std::string_view, int> table_;
};

struct Gram {
  std::size_t start;
  int count;
};

int compare_spans(const std::vector<int>& a, std::size_t i, const std::vector<int>& b,
                  std::size_t j, int n) {
  for (int k = 0; k < n; ++k) {
    if (a[i + k] != b[j + k]) return a[i + k] < b[j + k] ? -1 : 1;
  }
  return 0;
}

// Distinct n-grams in lexicographic order with their multiplicities.
std::vector<Gram> count_ngrams(const std::vector<int>& ids, int n) {
  std::vector<Gram> out;
  if (static_cast<int>(ids.size()) < n) return out;
  std::vector<std::size_t> starts(ids.size() - n + 1);
  for (std::size_t i = 0; i < starts.size(); ++i) starts[i] = i;
  std::sort(starts.begin(), starts.end(), [&](std::size_t a, std::size_t b) {
    return compare_spans(ids, a, ids, b, n) < 0;
  });
  for (std::size_t s : starts) {
    if (!out.empty() && compare_spans(ids, out.back().start, ids, s, n) == 0) {
      ++out.back().count;
    } else {
      out.push_back({s, 1});
    }
  }
  return out;
}

// For each candidate gram, its count in the reference (0 when absent).
std::vector<int> counts_in(const std::vector<int>& cand_ids, const std::vector<Gram>& cand,
                           const std::vector<int>& ref_ids, const std::vector<Gram>& ref, int n) {
  std::vector<int> out(cand.size(), 0);
  std::size_t i = 0, j = 0;
  while (i < cand.size() && j < ref.size()) {
    const int c = compare_spans(cand_ids, cand[i].start, ref_ids, ref[j].start, n);
    if (c == 0) {
      out[i++] = ref[j++].count;
    } else if (c < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

int clipped_overlap(const std::vector<int>& cand_ids, const std::vector<int>& ref_ids, int n) {
  const auto cand = count_ngrams(cand_ids, n);
  const auto in_ref = counts_in(cand_ids, cand, ref_ids, count_ngrams(ref_ids, n), n);
  int overlap = 0;
  for (std::size_t i = 0; i < cand.size(); ++i) overlap += std::min(cand[i].count, in_ref[i]);
  return overlap;
}

double f1(double overlap, double cand_total, double ref_total) {
  if (overlap <= 0.0 || cand_total <= 0.0 || ref_total <= 0.0) return 0.0;
  const double p = overlap / cand_total;
  const double r = overlap / ref_total;
  return 2.0 * p * r / (p + r);
}

Score to_score(double unit) { return Score(std::clamp(100.0 * unit, 0.0, 100.0)); }

}  // namespace

TokenSequence tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (const std::size_t ws = whitespace_len(text, i)) {
      flush();
      i += ws;
      continue;
    }
    const char c = text[i];
    if (is_split_punct(c)) {
      flush();
      tokens.emplace_back(1, c);
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      current.push_back(c);
    }
    ++i;
  }
  flush();
  return TokenSequence(std::move(tokens));
}

Score bleu(const TokenSequence& candidate, std::span<const TokenSequence> references,
           int max_n) {
  if (max_n < 1) throw Error(ErrorCode::kInvalidInput, "bleu: max_n must be >= 1");
  std::vector<const TokenSequence*> refs;
  for (const auto& r : references) {
    if (!r.empty()) refs.push_back(&r);
  }
  if (refs.empty()) {
    throw Error(ErrorCode::kInvalidInput, "bleu: at least one non-empty reference is required");
  }
  if (candidate.empty()) return Score(0.0);

  Interner interner;
  const std::vector<int> cand_ids = interner.ids(candidate);
  std::vector<std::vector<int>> ref_ids;
  for (const TokenSequence* r : refs) ref_ids.push_back(interner.ids(*r));

  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const std::vector<Gram> cand = count_ngrams(cand_ids, n);
    std::vector<int> max_ref(cand.size(), 0);
    for (const auto& r : ref_ids) {
      const std::vector<int> in_ref = counts_in(cand_ids, cand, r, count_ngrams(r, n), n);
      for (std::size_t i = 0; i < cand.size(); ++i) max_ref[i] = std::max(max_ref[i], in_ref[i]);
    }
    int matches = 0;
    int total = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      total += cand[i].count;
      matches += std::min(cand[i].count, max_ref[i]);
    }
    double precision;
    if (matches > 0) {
      precision = static_cast<double>(matches) / total;
    } else if (n == 1) {
      return Score(0.0);
    } else {
      precision = 1.0 / (total + 1.0);
    }
    log_sum += std::log(precision);
  }

  const double c = static_cast<double>(candidate.size());
  double r = static_cast<double>(refs.front()->size());
  for (const TokenSequence* ref : refs) {
    const double len = static_cast<double>(ref->size());
    const double d = std::abs(len - c);
    const double best = std::abs(r - c);
    if (d < best || (d == best && len < r)) r = len;
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return to_score(bp * std::exp(log_sum / max_n));
}

Score rouge_n(const TokenSequence& candidate, const TokenSequence& reference, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidInput, "rouge_n: n must be >= 1");
  if (static_cast<int>(candidate.size()) < n || static_cast<int>(reference.size()) < n) {
    return Score(0.0);
  }
  Interner interner;
  const std::vector<int> cand_ids = interner.ids(candidate);
  const int overlap = clipped_overlap(cand_ids, interner.ids(reference), n);
  const double cand_total = static_cast<double>(candidate.size() - n + 1);
  const double ref_total = static_cast<double>(reference.size() - n + 1);
  return to_score(f1(overlap, cand_total, ref_total));
}

Score rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
  const auto& a = candidate.tokens();
  const auto& b = reference.tokens();
  if (a.empty() || b.empty()) return Score(0.0);
  std::vector<int> prev(b.size() + 1, 0);
  std::vector<int> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const int lcs = prev[b.size()];
  return to_score(f1(lcs, static_cast<double>(a.size()), static_cast<double>(b.size())));
}

bool is_metric_name(std::string_view name) {
  return name == "bleu" || name == "rouge1" || name == "rouge2" || name == "rougel";
}

Score score_by_name(std::string_view name, std::string_view candidate,
                    std::string_view reference) {
  const TokenSequence cand = tokenize(candidate);
  const TokenSequence ref = tokenize(reference);
  if (name == "bleu") return bleu(cand, std::span<const TokenSequence>(&ref, 1));
  if (name == "rouge1") return rouge_n(cand, ref, 1);
  if (name == "rouge2") return rouge_n(cand, ref, 2);
  if (name == "rougel") return rouge_l(cand, ref);
  throw Error(ErrorCode::kInvalidInput, "unknown metric '" + std::string(name) + "'");
}

}  // namespace advforge::metrics
