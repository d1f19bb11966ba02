// On-disk layout of a campaign output directory:
//
//   <dir>/audit/<sample>.<direction>.jsonl   one line per scored candidate,
//                                            then one terminal line
//   <dir>/report.json                        the CampaignReport
//
// A (sample, direction) whose audit log ends in a terminal line is finished
// and is skipped when the campaign is resumed. Aborted attacks end in a
// failure line instead and are attempted again.

#ifndef ADVFORGE_CAMPAIGN_STORE_H_
#define ADVFORGE_CAMPAIGN_STORE_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "advforge/optimizer.h"
#include "advforge/report.h"

namespace advforge {

class CampaignStore {
 public:
  explicit CampaignStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path audit_path(const std::string& sample_id, Direction direction) const;
  std::filesystem::path report_path() const { return dir_ / "report.json"; }

  // Truncates the audit log and returns a sink appending candidate lines.
  std::function<void(const AuditRecord&)> open_audit(const std::string& sample_id,
                                                     Direction direction) const;
  // Appends the terminal (or failure) line for a finished attack.
  void close_audit(const SampleOutcome& outcome) const;

  std::optional<SampleOutcome> finished_outcome(const std::string& sample_id,
                                                Direction direction) const;
  std::vector<AuditRecord> read_audit(const std::string& sample_id, Direction direction) const;

  void write_report(const CampaignReport& report) const;
  CampaignReport read_report() const;

  // Removes previous audit logs and report (used by --fresh).
  void clear() const;

 private:
  std::filesystem::path dir_;
};

}  // namespace advforge

#endif  // ADVFORGE_CAMPAIGN_STORE_H_
