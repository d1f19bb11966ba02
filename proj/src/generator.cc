#include "advforge/generator.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

namespace advforge {

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", value);
  std::string out(buf);
  if (out == "-0.0") out = "0.0";
  return out;
}

PromptTemplate load_prompt_template(const PromptLibrary& prompts, TaskKind task,
                                    Direction direction, bool include_criteria) {
  const std::string dir = std::string(task_kind_name(task)) + "/" +
                          std::string(direction_name(direction)) + "/";
  PromptTemplate tpl;
  tpl.task = task;
  tpl.direction = direction;
  tpl.instruction = trim(prompts.get(dir + "instruction"));
  if (include_criteria) {
    if (auto criteria = prompts.find(dir + "criteria")) tpl.criteria = trim(*criteria);
  }
  tpl.closing = trim(prompts.get("generator/closing"));
  return tpl;
}

std::string build_prompt(const PromptTemplate& tpl, const EvalSample& sample,
                         std::span<const Candidate> trajectory, const PromptOptions& options) {
  if (static_cast<int>(trajectory.size()) > options.trajectory_cap) {
    throw Error(ErrorCode::kContractViolation, "trajectory longer than trajectory_cap");
  }
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    if (trajectory[i].s_fb < trajectory[i - 1].s_fb) {
      throw Error(ErrorCode::kContractViolation, "trajectory is not in ascending score order");
    }
  }
  const std::vector<std::pair<std::string, std::string>> vars = {
      {"n", std::to_string(options.candidates_per_iter)},
      {"marker", std::string(kResponseMarker)},
  };

  std::string out = render_template(tpl.instruction, vars);
  out += "\n\n";
  if (tpl.criteria) {
    out += "Evaluation criteria:\n" + *tpl.criteria + "\n\n";
  }
  switch (sample.task) {
    case TaskKind::kDialogue:
      out += "Dialogue context:\n" + sample.context + "\n\n";
      break;
    case TaskKind::kSummarization:
      out += "Article:\n" + sample.context + "\n\n";
      break;
    case TaskKind::kQuestionEval:
      out += "Article:\n" + sample.context + "\n\n";
      out += "Answer:\n" + sample.answer.value_or("") + "\n\n";
      break;
  }
  if (!trajectory.empty()) {
    out += "Previous responses and their scores, in ascending order of score:\n";
    for (const Candidate& c : trajectory) {
      out += "(" + c.text + ", " + format_score(c.s_fb.value()) + ")\n";
    }
    out += "\n";
  }
  out += render_template(tpl.closing, vars);
  out += "\n";
  return out;
}

std::vector<std::string> parse_candidates(std::string_view raw) {
  std::vector<std::string> out;
  std::set<std::string, std::less<>> seen;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = raw.find(kResponseMarker, pos);
    if (open == std::string_view::npos) break;
    const std::size_t body = open + kResponseMarker.size();
    const std::size_t close = raw.find(kResponseMarker, body);
    if (close == std::string_view::npos) break;
    std::string text = trim(raw.substr(body, close - body));
    if (!text.empty() && seen.insert(text).second) out.push_back(std::move(text));
    pos = close + kResponseMarker.size();
  }
  if (out.empty()) throw Error(ErrorCode::kNoCandidates, "generator output has no <RES> blocks");
  return out;
}

std::string format_candidates(std::span<const std::string> candidates) {
  std::string out;
  for (const auto& c : candidates) {
    out += kResponseMarker;
    out += c;
    out += kResponseMarker;
    out += "\n";
  }
  return out;
}

}  // namespace advforge
