// JSONL ingestion of evaluation samples and export of adversarial data.

#ifndef ADVFORGE_DATASET_H_
#define ADVFORGE_DATASET_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "advforge/core.h"
#include "advforge/report.h"
#include "json.hpp"

namespace advforge {

nlohmann::json to_json(const EvalSample& sample);
EvalSample sample_from_json(const nlohmann::json& j);

// One object per line: id, task, context, response, reference?, answer?.
// Blank lines are skipped. Malformed or invalid lines and duplicate ids raise
// kDataset with the 1-based line number. An empty file yields an empty list
// and a warning.
std::vector<EvalSample> load_dataset(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings = nullptr);
std::vector<EvalSample> parse_dataset(std::string_view jsonl,
                                      std::vector<std::string>* warnings = nullptr);

void write_dataset(std::span<const EvalSample> samples, const std::filesystem::path& path);

struct AdversarialRecord {
  std::string id;
  Direction direction = Direction::kPlus;
  std::string adversarial_text;
  double s_gold = 0.0;
  double s_victim = 0.0;
  bool success = false;

  friend bool operator==(const AdversarialRecord&, const AdversarialRecord&) = default;
};

AdversarialRecord to_adversarial_record(const AttackResult& result);

// Writes one JSON line per result. Throws kInvalidInput when results is
// empty and kIo when the path cannot be written.
void export_adversarial(std::span<const AttackResult> results, const std::filesystem::path& path);
std::vector<AdversarialRecord> load_adversarial(const std::filesystem::path& path);

// Writes text to path through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace advforge

#endif  // ADVFORGE_DATASET_H_
