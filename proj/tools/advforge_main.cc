// advforge command line.
//
//   advforge attack run --config cfg.json --dataset data.jsonl --victim id --out dir/
//   advforge attack run --sim scenario.json --dataset data.jsonl --out dir/
//   advforge attack report --in dir/ --format table|csv|json
//   advforge baseline run --rule jumble --config cfg.json --dataset data.jsonl --victim id --out dir/
//   advforge metrics score --metric rougel --candidate cand.txt --reference ref.txt
//   advforge export adversarial --in dir/ --out adv.jsonl
//
// Exit codes: 0 success, 1 usage error, 2 sample-level failures, 3 fatal.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "advforge/baselines.h"
#include "advforge/campaign_store.h"
#include "advforge/config_io.h"
#include "advforge/dataset.h"
#include "advforge/http_transport.h"
#include "advforge/llmclient.h"
#include "advforge/metrics.h"
#include "advforge/optimizer.h"
#include "advforge/prompt_library.h"
#include "advforge/report.h"
#include "advforge/simkit.h"
#include "json.hpp"

namespace {

using namespace advforge;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSampleFailures = 2;
constexpr int kExitFatal = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunArgs {
  std::string config;
  std::string dataset;
  std::string victim;
  std::string direction = "both";
  std::string out;
  std::string sim;
  std::string cache_dir;
  std::string assets;
  int workers = 0;
  bool fresh = false;
  std::string format = "table";

  std::optional<int> budget;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<int> gold_k;
  bool random_init_minus = false;
  bool no_criteria = false;

  std::string rule;
};

std::vector<Direction> parse_directions(const std::string& s) {
  if (s == "both") return {Direction::kPlus, Direction::kMinus};
  try {
    return {parse_direction(s)};
  } catch (const Error&) {
    throw UsageError("--direction must be plus, minus or both");
  }
}

// The world an attack runs in: endpoints registered on the client, and the
// resolved victim and gold evaluators.
struct World {
  HarnessConfig config;
  std::unique_ptr<PromptLibrary> prompts;
  std::unique_ptr<LlmClient> client;
  EvaluatorSpec victim;
  std::vector<EvalSample> dataset;
};

std::filesystem::path asset_dir(const RunArgs& args) {
  return args.assets.empty() ? default_asset_dir() : std::filesystem::path(args.assets);
}

World build_world(const RunArgs& args) {
  World w;
  if (!args.config.empty()) {
    w.config = load_harness_config(args.config);
  } else if (args.sim.empty()) {
    throw UsageError("--config is required unless --sim is given");
  }
  AttackConfig& cfg = w.config.attack;
  if (args.budget) cfg.victim_budget = *args.budget;
  if (args.alpha) cfg.alpha = *args.alpha;
  if (args.seed) cfg.random_seed = *args.seed;
  if (args.gold_k) cfg.gold_samples_k = *args.gold_k;
  if (args.random_init_minus) cfg.random_init_minus = true;
  if (args.no_criteria) cfg.include_criteria = false;
  if (args.workers > 0) w.config.workers = args.workers;

  std::vector<std::string> warnings;
  w.dataset = load_dataset(args.dataset, &warnings);
  for (const auto& msg : warnings) std::cerr << "warning: " << msg << "\n";
  if (w.dataset.empty()) throw UsageError("dataset " + args.dataset + " has no samples");

  std::optional<std::filesystem::path> cache_dir;
  if (!args.cache_dir.empty()) {
    cache_dir = args.cache_dir;
  } else if (const char* env = std::getenv("ADVFORGE_CACHE_DIR"); env && *env) {
    cache_dir = env;
  } else if (w.config.cache_dir) {
    cache_dir = *w.config.cache_dir;
  }
  // Sim runs are cheap and must not read stale entries from a shared cache.
  if (!args.sim.empty()) cache_dir.reset();

  w.prompts = std::make_unique<PromptLibrary>(asset_dir(args) / "prompts");
  w.client = std::make_unique<LlmClient>(cache_dir);

  if (!args.sim.empty()) {
    const sim::Scenario scenario = sim::load_scenario(args.sim);
    const sim::SimWorld world = sim::make_sim_world(scenario, w.dataset, *w.client, *w.prompts);
    w.victim = world.victim;
    w.config.gold = world.gold;
    cfg.generator = world.generator;
    return w;
  }

  for (const auto& [id, ep] : w.config.endpoints) {
    HttpEndpointConfig http{ep.base_url, ep.api_key_env, std::chrono::seconds(ep.timeout_s)};
    w.client->register_backend(id, std::make_unique<ChatCompletionsBackend>(http),
                               EndpointOptions{ep.rate_limit_rps});
  }
  if (args.victim.empty()) throw UsageError("--victim is required");
  auto it = w.config.victims.find(args.victim);
  if (it == w.config.victims.end()) {
    std::string known;
    for (const auto& [id, spec] : w.config.victims) known += (known.empty() ? "" : ", ") + id;
    throw UsageError("unknown victim '" + args.victim + "' (configured: " + known + ")");
  }
  w.victim = it->second;
  return w;
}

int exit_code_for(const CampaignReport& report) {
  for (const auto& o : report.per_sample) {
    if (o.failed()) {
      std::cerr << "sample " << o.sample_id << " (" << direction_name(o.direction)
                << ") failed: " << o.error << "\n";
    }
  }
  return report.failures() > 0 ? kExitSampleFailures : kExitOk;
}

int attack_run(const RunArgs& args) {
  World w = build_world(args);
  const std::vector<Direction> directions = parse_directions(args.direction);
  CampaignStore store(args.out);
  if (args.fresh) store.clear();

  EvaluationContext ctx{*w.client, *w.prompts};
  CampaignOptions options;
  options.workers = w.config.workers;
  options.audit = [&store](const EvalSample& s, Direction d) { return store.open_audit(s.id, d); };
  options.resume = [&store](const EvalSample& s, Direction d) {
    return store.finished_outcome(s.id, d);
  };
  options.on_outcome = [&store](const SampleOutcome& o) { store.close_audit(o); };

  CampaignReport report =
      run_campaign(w.dataset, directions, w.victim, w.config.gold, w.config.attack, ctx, options);
  store.write_report(report);
  std::cout << render_report(report, parse_report_format(args.format));
  return exit_code_for(report);
}

int baseline_run(const RunArgs& args) {
  RuleName name;
  try {
    name = parse_rule_name(args.rule);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  World w = build_world(args);
  const PerturbRule rule = make_rule(name, w.config.attack.random_seed);
  const Lexicons lexicons = Lexicons::load(asset_dir(args));
  EvaluationContext ctx{*w.client, *w.prompts};
  CampaignReport report = run_baseline_campaign(rule, w.dataset, w.victim, w.config.gold,
                                                w.config.attack, ctx, lexicons, w.config.workers);
  if (!args.out.empty()) CampaignStore(args.out).write_report(report);
  std::cout << render_report(report, parse_report_format(args.format));
  return exit_code_for(report);
}

std::vector<CampaignReport> read_reports(const std::vector<std::string>& dirs) {
  std::vector<CampaignReport> reports;
  for (const auto& dir : dirs) {
    CampaignStore store(dir);
    if (!std::filesystem::exists(store.report_path())) {
      throw Error(ErrorCode::kIo, "no report.json in " + dir);
    }
    reports.push_back(store.read_report());
  }
  return reports;
}

int attack_report(const std::vector<std::string>& dirs, const std::string& format) {
  const auto reports = read_reports(dirs);
  std::cout << render_reports(reports, parse_report_format(format));
  return kExitOk;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

int metrics_score(const std::string& metric, const std::string& cand_path,
                  const std::string& ref_path) {
  if (!metrics::is_metric_name(metric)) throw UsageError("unknown metric '" + metric + "'");
  const auto cands = read_lines(cand_path);
  const auto refs = read_lines(ref_path);
  if (cands.size() != refs.size()) {
    throw UsageError("candidate and reference files differ in line count (" +
                     std::to_string(cands.size()) + " vs " + std::to_string(refs.size()) + ")");
  }
  for (std::size_t i = 0; i < cands.size(); ++i) {
    std::printf("%.4f\n", metrics::score_by_name(metric, cands[i], refs[i]).value());
  }
  return kExitOk;
}

int export_adversarial_cmd(const std::vector<std::string>& dirs, const std::string& out,
                           bool successful_only) {
  std::vector<AttackResult> results;
  for (const auto& report : read_reports(dirs)) {
    for (const auto& o : report.per_sample) {
      if (!o.result) continue;
      if (successful_only && !o.result->success) continue;
      results.push_back(*o.result);
    }
  }
  export_adversarial(results, out);
  std::cerr << "wrote " << results.size() << " records to " << out << "\n";
  return kExitOk;
}

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "Harness configuration (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--dataset", a.dataset, "Samples (JSONL)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--victim", a.victim, "Victim evaluator id from the config");
  cmd->add_option("--sim", a.sim, "Run against a simulation scenario instead of live endpoints")
      ->check(CLI::ExistingFile);
  cmd->add_option("--workers", a.workers, "Concurrent attacks")->check(CLI::PositiveNumber);
  cmd->add_option("--cache-dir", a.cache_dir, "Completion cache directory");
  cmd->add_option("--assets", a.assets, "Asset directory holding prompts/ and lexicons/");
  cmd->add_option("--format", a.format, "Summary format: table, csv or json");
  cmd->add_option("--budget", a.budget, "Victim query budget per sample");
  cmd->add_option("--alpha", a.alpha, "Gold weight in the feedback score");
  cmd->add_option("--seed", a.seed, "Random seed");
  cmd->add_option("--gold-k", a.gold_k, "Gold ratings per member");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial evaluation of NLG evaluators"};
  app.require_subcommand(1);

  RunArgs run;
  std::vector<std::string> in_dirs;
  std::string report_format = "table";
  std::string metric, cand_path, ref_path, export_out;
  bool successful_only = false;

  CLI::App* attack = app.add_subcommand("attack", "Adversarial attack campaigns");
  attack->require_subcommand(1);
  CLI::App* attack_run_cmd = attack->add_subcommand("run", "Attack every sample of a dataset");
  add_run_options(attack_run_cmd, run);
  attack_run_cmd->add_option("--direction", run.direction, "plus, minus or both");
  attack_run_cmd->add_option("--out", run.out, "Output directory")->required();
  attack_run_cmd->add_flag("--fresh", run.fresh, "Discard previous results in --out");
  attack_run_cmd->add_flag("--random-init-minus", run.random_init_minus,
                           "Start minus attacks from another sample's response");
  attack_run_cmd->add_flag("--no-criteria", run.no_criteria,
                           "Omit evaluation criteria from generation prompts");
  CLI::App* attack_report_cmd = attack->add_subcommand("report", "Render campaign reports");
  attack_report_cmd->add_option("--in", in_dirs, "Campaign output directories")->required();
  attack_report_cmd->add_option("--format", report_format, "table, csv or json");

  CLI::App* baseline = app.add_subcommand("baseline", "Rule-based perturbation baselines");
  baseline->require_subcommand(1);
  CLI::App* baseline_run_cmd = baseline->add_subcommand("run", "Run one rule over a dataset");
  add_run_options(baseline_run_cmd, run);
  baseline_run_cmd->add_option("--rule", run.rule, "Perturbation rule")->required();
  baseline_run_cmd->add_option("--out", run.out, "Output directory for report.json");

  CLI::App* metrics_cmd = app.add_subcommand("metrics", "Reference-based metrics");
  metrics_cmd->require_subcommand(1);
  CLI::App* score_cmd = metrics_cmd->add_subcommand("score", "Score candidates line by line");
  score_cmd->add_option("--metric", metric, "bleu, rouge1, rouge2 or rougel")->required();
  score_cmd->add_option("--candidate", cand_path, "Candidate file")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--reference", ref_path, "Reference file")->required()->check(CLI::ExistingFile);

  CLI::App* export_cmd = app.add_subcommand("export", "Export results");
  export_cmd->require_subcommand(1);
  CLI::App* adv_cmd = export_cmd->add_subcommand("adversarial", "Best adversarial responses as JSONL");
  adv_cmd->add_option("--in", in_dirs, "Campaign output directories")->required();
  adv_cmd->add_option("--out", export_out, "Output JSONL")->required();
  adv_cmd->add_flag("--successful-only", successful_only, "Skip unsuccessful attacks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*attack_run_cmd) return attack_run(run);
    if (*attack_report_cmd) return attack_report(in_dirs, report_format);
    if (*baseline_run_cmd) return baseline_run(run);
    if (*score_cmd) return metrics_score(metric, cand_path, ref_path);
    if (*adv_cmd) return export_adversarial_cmd(in_dirs, export_out, successful_only);
  } catch (const UsageError& e) {
    std::cerr << "advforge: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "advforge: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidConfig ? kExitUsage : kExitFatal;
  } catch (const std::exception& e) {
    std::cerr << "advforge: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitUsage;
}
