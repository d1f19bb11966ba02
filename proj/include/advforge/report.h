// Campaign outcomes and their table/csv/json renderings.

#ifndef ADVFORGE_REPORT_H_
#define ADVFORGE_REPORT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advforge/core.h"
#include "json.hpp"

namespace advforge {

enum class Termination { kThreshold, kBudget, kMaxIterations, kGeneratorExhausted };

std::string_view termination_name(Termination t);
Termination parse_termination(std::string_view name);

struct AttackResult {
  std::string sample_id;
  Direction direction = Direction::kPlus;
  Candidate best;
  int all_scored = 0;
  int victim_queries = 0;
  int gold_queries = 0;
  int generator_calls = 0;
  Termination terminated_by = Termination::kMaxIterations;
  bool success = false;

  friend bool operator==(const AttackResult&, const AttackResult&) = default;
};

// One (sample, direction) cell of a campaign. Exactly one of result/error is
// meaningful: error is non-empty when the attack aborted.
struct SampleOutcome {
  std::string sample_id;
  Direction direction = Direction::kPlus;
  std::optional<AttackResult> result;
  std::string error;

  bool failed() const { return !result.has_value(); }
  bool succeeded() const { return result && result->success; }

  friend bool operator==(const SampleOutcome&, const SampleOutcome&) = default;
};

struct DirectionSummary {
  int attempted = 0;
  int succeeded = 0;

  // 100 * succeeded / attempted in tenths of a percent, rounded half up.
  std::int64_t asr_tenths() const;
  // "60.0"; "0.0" when nothing was attempted.
  std::string asr_percent() const;

  friend bool operator==(const DirectionSummary&, const DirectionSummary&) = default;
};

struct QueryTotals {
  std::int64_t generator = 0;
  std::int64_t gold = 0;
  std::int64_t victim = 0;

  friend bool operator==(const QueryTotals&, const QueryTotals&) = default;
};

struct CampaignReport {
  std::string victim_id;
  std::string method = "adveval";
  // nullopt renders as "--": not requested, or not applicable to the victim.
  std::optional<DirectionSummary> plus;
  std::optional<DirectionSummary> minus;
  std::vector<SampleOutcome> per_sample;
  QueryTotals totals;
  std::string config_fingerprint;
  std::int64_t wall_clock_ms = 0;

  const std::optional<DirectionSummary>& summary(Direction d) const {
    return d == Direction::kPlus ? plus : minus;
  }
  std::optional<DirectionSummary>& summary(Direction d) {
    return d == Direction::kPlus ? plus : minus;
  }
  int failures() const;

  friend bool operator==(const CampaignReport&, const CampaignReport&) = default;
};

// Recomputes per-direction counts from per_sample. Directions whose summary
// is nullopt stay nullopt.
void tally(CampaignReport& report);

enum class ReportFormat { kTable, kCsv, kJson };
ReportFormat parse_report_format(std::string_view name);

std::string render_report(const CampaignReport& report, ReportFormat format);
// Table and csv render one row per victim/method; json renders an array.
std::string render_reports(std::span<const CampaignReport> reports, ReportFormat format);

// "95.0 / 98.0" or "95.0 / --".
std::string asr_cell(const CampaignReport& report);

nlohmann::json to_json(const Candidate& c);
Candidate candidate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AttackResult& r);
AttackResult attack_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SampleOutcome& o);
SampleOutcome sample_outcome_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CampaignReport& r);
CampaignReport campaign_report_from_json(const nlohmann::json& j);

}  // namespace advforge

#endif  // ADVFORGE_REPORT_H_
