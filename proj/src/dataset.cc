#include "advforge/dataset.h"

#include <fstream>
#include <set>
#include <sstream>

#include "advforge/prompt_library.h"

namespace advforge {

using json = nlohmann::json;

namespace {

std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

}  // namespace

json to_json(const EvalSample& s) {
  return {{"id", s.id},
          {"task", task_kind_name(s.task)},
          {"context", s.context},
          {"response", s.response},
          {"reference", s.reference ? json(*s.reference) : json(nullptr)},
          {"answer", s.answer ? json(*s.answer) : json(nullptr)}};
}

EvalSample sample_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kDataset, "sample must be a JSON object");
  EvalSample s;
  try {
    s.id = j.at("id").get<std::string>();
    s.task = parse_task_kind(j.at("task").get<std::string>());
    s.context = j.at("context").get<std::string>();
    s.response = j.at("response").get<std::string>();
    s.reference = optional_string(j, "reference");
    s.answer = optional_string(j, "answer");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kDataset, e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kDataset, e.what());
  }
  if (auto problems = validate_sample(s); !problems.empty()) {
    throw Error(ErrorCode::kDataset, join(problems));
  }
  return s;
}

std::vector<EvalSample> parse_dataset(std::string_view jsonl, std::vector<std::string>* warnings) {
  std::vector<EvalSample> out;
  std::set<std::string> ids;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      EvalSample s = sample_from_json(json::parse(line));
      if (!ids.insert(s.id).second) {
        throw Error(ErrorCode::kDataset, "duplicate id '" + s.id + "'");
      }
      out.push_back(std::move(s));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kDataset, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kDataset, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty() && warnings) warnings->push_back("dataset is empty");
  return out;
}

std::vector<EvalSample> load_dataset(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kDataset, e.what());
  }
  return parse_dataset(text, warnings);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename into " + path.string() + ": " + ec.message());
}

void write_dataset(std::span<const EvalSample> samples, const std::filesystem::path& path) {
  std::string text;
  for (const auto& s : samples) text += to_json(s).dump() + "\n";
  write_file_atomic(path, text);
}

AdversarialRecord to_adversarial_record(const AttackResult& r) {
  return {r.sample_id, r.direction, r.best.text, r.best.s_gold.value(), r.best.s_victim.value(),
          r.success};
}

void export_adversarial(std::span<const AttackResult> results, const std::filesystem::path& path) {
  if (results.empty()) throw Error(ErrorCode::kInvalidInput, "nothing to export");
  std::string text;
  for (const auto& r : results) {
    const AdversarialRecord rec = to_adversarial_record(r);
    text += json{{"id", rec.id},
                 {"direction", direction_name(rec.direction)},
                 {"adversarial_text", rec.adversarial_text},
                 {"s_gold", rec.s_gold},
                 {"s_victim", rec.s_victim},
                 {"success", rec.success}}
                .dump() +
            "\n";
  }
  write_file_atomic(path, text);
}

std::vector<AdversarialRecord> load_adversarial(const std::filesystem::path& path) {
  std::vector<AdversarialRecord> out;
  std::istringstream in(read_text_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(),
                     parse_direction(j.at("direction").get<std::string>()),
                     j.at("adversarial_text").get<std::string>(), j.at("s_gold").get<double>(),
                     j.at("s_victim").get<double>(), j.at("success").get<bool>()});
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kDataset, path.string() + " line " + std::to_string(line_no) + ": " +
                                           e.what());
    }
  }
  return out;
}

}  // namespace advforge
