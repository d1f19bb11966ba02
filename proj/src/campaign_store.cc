#include "advforge/campaign_store.h"

#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

#include "advforge/dataset.h"
#include "advforge/prompt_library.h"
#include "advforge/rng.h"
#include "json.hpp"

namespace advforge {

using json = nlohmann::json;

namespace {

std::string file_stem(const std::string& sample_id) {
  std::string safe;
  for (char c : sample_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    safe.push_back(ok ? c : '_');
  }
  if (safe.size() > 80) safe.resize(80);
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%08llx",
                static_cast<unsigned long long>(fnv1a64(sample_id) & 0xFFFFFFFFULL));
  return safe + "-" + hash;
}

std::vector<json> read_lines(const std::filesystem::path& path) {
  std::vector<json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error&) {
      // A torn final line from an interrupted run; everything before it stands.
      break;
    }
  }
  return out;
}

void append_line(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path.string());
  out << j.dump() << "\n";
}

}  // namespace

CampaignStore::CampaignStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_ / "audit", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir_.string() + ": " + ec.message());
}

std::filesystem::path CampaignStore::audit_path(const std::string& sample_id,
                                                Direction direction) const {
  return dir_ / "audit" /
         (file_stem(sample_id) + "." + std::string(direction_name(direction)) + ".jsonl");
}

std::function<void(const AuditRecord&)> CampaignStore::open_audit(const std::string& sample_id,
                                                                  Direction direction) const {
  const auto path = audit_path(sample_id, direction);
  auto out = std::make_shared<std::ofstream>(path, std::ios::trunc | std::ios::binary);
  if (!*out) throw Error(ErrorCode::kIo, "cannot open audit log " + path.string());
  return [out](const AuditRecord& r) {
    *out << json{{"type", "candidate"},
                 {"iteration", r.iteration},
                 {"text", r.text},
                 {"s_gold", r.s_gold},
                 {"s_victim", r.s_victim},
                 {"s_fb", r.s_fb},
                 {"victim_queries", r.victim_queries}}
                .dump()
         << "\n";
    out->flush();
  };
}

void CampaignStore::close_audit(const SampleOutcome& outcome) const {
  const auto path = audit_path(outcome.sample_id, outcome.direction);
  append_line(path, {{"type", outcome.failed() ? "failure" : "terminal"},
                     {"outcome", to_json(outcome)}});
}

std::optional<SampleOutcome> CampaignStore::finished_outcome(const std::string& sample_id,
                                                             Direction direction) const {
  const auto path = audit_path(sample_id, direction);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  const auto lines = read_lines(path);
  if (lines.empty() || lines.back().value("type", "") != "terminal") return std::nullopt;
  try {
    SampleOutcome o = sample_outcome_from_json(lines.back().at("outcome"));
    if (o.sample_id != sample_id || o.direction != direction) return std::nullopt;
    return o;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<AuditRecord> CampaignStore::read_audit(const std::string& sample_id,
                                                   Direction direction) const {
  std::vector<AuditRecord> out;
  for (const json& j : read_lines(audit_path(sample_id, direction))) {
    if (j.value("type", "") != "candidate") continue;
    out.push_back({j.at("iteration").get<int>(), j.at("text").get<std::string>(),
                   j.at("s_gold").get<double>(), j.at("s_victim").get<double>(),
                   j.at("s_fb").get<double>(), j.at("victim_queries").get<int>()});
  }
  return out;
}

void CampaignStore::write_report(const CampaignReport& report) const {
  write_file_atomic(report_path(), to_json(report).dump(2) + "\n");
}

CampaignReport CampaignStore::read_report() const {
  try {
    return campaign_report_from_json(json::parse(read_text_file(report_path())));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, report_path().string() + ": " + e.what());
  }
}

void CampaignStore::clear() const {
  std::error_code ec;
  std::filesystem::remove_all(dir_ / "audit", ec);
  std::filesystem::remove(report_path(), ec);
  std::filesystem::create_directories(dir_ / "audit", ec);
}

}  // namespace advforge
