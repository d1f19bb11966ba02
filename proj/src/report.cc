#include "advforge/report.h"

#include <algorithm>
#include <sstream>

namespace advforge {

using json = nlohmann::json;

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::kThreshold: return "threshold";
    case Termination::kBudget: return "budget";
    case Termination::kMaxIterations: return "max_iterations";
    case Termination::kGeneratorExhausted: return "generator_exhausted";
  }
  return "max_iterations";
}

Termination parse_termination(std::string_view name) {
  for (Termination t : {Termination::kThreshold, Termination::kBudget,
                        Termination::kMaxIterations, Termination::kGeneratorExhausted}) {
    if (termination_name(t) == name) return t;
  }
  throw Error(ErrorCode::kInvalidInput, "unknown termination '" + std::string(name) + "'");
}

std::int64_t DirectionSummary::asr_tenths() const {
  if (attempted <= 0) return 0;
  const std::int64_t num = 2000LL * succeeded + attempted;
  return num / (2LL * attempted);
}

std::string DirectionSummary::asr_percent() const {
  const std::int64_t t = asr_tenths();
  return std::to_string(t / 10) + "." + std::to_string(t % 10);
}

int CampaignReport::failures() const {
  return static_cast<int>(
      std::count_if(per_sample.begin(), per_sample.end(), [](const auto& o) { return o.failed(); }));
}

void tally(CampaignReport& report) {
  for (Direction d : {Direction::kPlus, Direction::kMinus}) {
    auto& summary = report.summary(d);
    if (!summary) continue;
    *summary = {};
    for (const auto& o : report.per_sample) {
      if (o.direction != d) continue;
      ++summary->attempted;
      if (o.succeeded()) ++summary->succeeded;
    }
  }
  report.totals = {};
  for (const auto& o : report.per_sample) {
    if (!o.result) continue;
    report.totals.generator += o.result->generator_calls;
    report.totals.gold += o.result->gold_queries;
    report.totals.victim += o.result->victim_queries;
  }
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "table") return ReportFormat::kTable;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw Error(ErrorCode::kInvalidInput, "unknown report format '" + std::string(name) + "'");
}

namespace {

std::string cell(const std::optional<DirectionSummary>& s) {
  return s ? s->asr_percent() : "--";
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::optional<DirectionSummary> summary_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return DirectionSummary{j.at("attempted").get<int>(), j.at("succeeded").get<int>()};
}

json summary_to_json(const std::optional<DirectionSummary>& s) {
  if (!s) return nullptr;
  return {{"attempted", s->attempted}, {"succeeded", s->succeeded},
          {"asr_percent", s->asr_percent()}};
}

}  // namespace

std::string asr_cell(const CampaignReport& report) {
  return cell(report.plus) + " / " + cell(report.minus);
}

std::string render_reports(std::span<const CampaignReport> reports, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::kTable: {
      std::size_t victim_w = 6;
      std::size_t method_w = 6;
      for (const auto& r : reports) {
        victim_w = std::max(victim_w, r.victim_id.size());
        method_w = std::max(method_w, r.method.size());
      }
      out << pad("victim", victim_w + 2) << pad("method", method_w + 2) << "ASR R+ / R-\n";
      for (const auto& r : reports) {
        out << pad(r.victim_id, victim_w + 2) << pad(r.method, method_w + 2) << asr_cell(r)
            << "\n";
      }
      break;
    }
    case ReportFormat::kCsv: {
      out << "victim,method,direction,attempted,succeeded,asr_percent\n";
      for (const auto& r : reports) {
        for (Direction d : {Direction::kPlus, Direction::kMinus}) {
          const auto& s = r.summary(d);
          out << csv_field(r.victim_id) << ',' << csv_field(r.method) << ','
              << direction_name(d) << ',';
          if (s) {
            out << s->attempted << ',' << s->succeeded << ',' << s->asr_percent() << "\n";
          } else {
            out << ",,--\n";
          }
        }
      }
      break;
    }
    case ReportFormat::kJson: {
      json arr = json::array();
      for (const auto& r : reports) arr.push_back(to_json(r));
      out << arr.dump(2) << "\n";
      break;
    }
  }
  return out.str();
}

std::string render_report(const CampaignReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return to_json(report).dump(2) + "\n";
  return render_reports(std::span<const CampaignReport>(&report, 1), format);
}

json to_json(const Candidate& c) {
  return {{"text", c.text},
          {"s_gold", c.s_gold.value()},
          {"s_victim", c.s_victim.value()},
          {"s_fb", c.s_fb.value()},
          {"iteration", c.iteration}};
}

Candidate candidate_from_json(const json& j) {
  Candidate c;
  c.text = j.at("text").get<std::string>();
  c.s_gold = Score(j.at("s_gold").get<double>());
  c.s_victim = Score(j.at("s_victim").get<double>());
  c.s_fb = FeedbackScore(j.at("s_fb").get<double>());
  c.iteration = j.at("iteration").get<int>();
  return c;
}

json to_json(const AttackResult& r) {
  return {{"sample_id", r.sample_id},
          {"direction", direction_name(r.direction)},
          {"best", to_json(r.best)},
          {"all_scored", r.all_scored},
          {"victim_queries", r.victim_queries},
          {"gold_queries", r.gold_queries},
          {"generator_calls", r.generator_calls},
          {"terminated_by", termination_name(r.terminated_by)},
          {"success", r.success}};
}

AttackResult attack_result_from_json(const json& j) {
  AttackResult r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.direction = parse_direction(j.at("direction").get<std::string>());
  r.best = candidate_from_json(j.at("best"));
  r.all_scored = j.at("all_scored").get<int>();
  r.victim_queries = j.at("victim_queries").get<int>();
  r.gold_queries = j.at("gold_queries").get<int>();
  r.generator_calls = j.at("generator_calls").get<int>();
  r.terminated_by = parse_termination(j.at("terminated_by").get<std::string>());
  r.success = j.at("success").get<bool>();
  return r;
}

json to_json(const SampleOutcome& o) {
  json j = {{"sample_id", o.sample_id}, {"direction", direction_name(o.direction)}};
  j["result"] = o.result ? to_json(*o.result) : json(nullptr);
  j["error"] = o.error;
  return j;
}

SampleOutcome sample_outcome_from_json(const json& j) {
  SampleOutcome o;
  o.sample_id = j.at("sample_id").get<std::string>();
  o.direction = parse_direction(j.at("direction").get<std::string>());
  if (!j.at("result").is_null()) o.result = attack_result_from_json(j.at("result"));
  o.error = j.value("error", "");
  return o;
}

json to_json(const CampaignReport& r) {
  json per_sample = json::array();
  for (const auto& o : r.per_sample) per_sample.push_back(to_json(o));
  return {{"victim_id", r.victim_id},
          {"method", r.method},
          {"asr", {{"plus", summary_to_json(r.plus)}, {"minus", summary_to_json(r.minus)}}},
          {"cell", asr_cell(r)},
          {"per_sample", per_sample},
          {"totals",
           {{"generator", r.totals.generator}, {"gold", r.totals.gold}, {"victim", r.totals.victim}}},
          {"config_fingerprint", r.config_fingerprint},
          {"wall_clock_ms", r.wall_clock_ms}};
}

CampaignReport campaign_report_from_json(const json& j) {
  CampaignReport r;
  r.victim_id = j.at("victim_id").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.plus = summary_from_json(j.at("asr").at("plus"));
  r.minus = summary_from_json(j.at("asr").at("minus"));
  for (const auto& o : j.at("per_sample")) r.per_sample.push_back(sample_outcome_from_json(o));
  const json& t = j.at("totals");
  r.totals = {t.at("generator").get<std::int64_t>(), t.at("gold").get<std::int64_t>(),
              t.at("victim").get<std::int64_t>()};
  r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  r.wall_clock_ms = j.at("wall_clock_ms").get<std::int64_t>();
  return r;
}

}  // namespace advforge
