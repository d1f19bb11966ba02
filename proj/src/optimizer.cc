#include "advforge/optimizer.h"

#include <algorithm>
#include <atomic>
#include <chrono>

#include "advforge/config_io.h"
#include "advforge/generator.h"
#include "advforge/parallel.h"
#include "advforge/rng.h"

namespace advforge {

FeedbackScore feedback_score(Score s_gold, Score s_victim, Direction direction, double alpha) {
  if (direction == Direction::kPlus) {
    return FeedbackScore(alpha * s_gold.value() - s_victim.value());
  }
  return FeedbackScore(s_victim.value() - alpha * s_gold.value());
}

bool is_success(Score s_gold, Score s_victim, Direction direction, const AttackConfig& cfg) {
  const double g = s_gold.value();
  const double v = s_victim.value();
  if (direction == Direction::kPlus) return g > cfg.tau1_plus && g - v > cfg.tau2;
  return g < cfg.tau1_minus && v - g > cfg.tau2;
}

bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.s_fb != b.s_fb) return a.s_fb > b.s_fb;
  if (a.iteration != b.iteration) return a.iteration < b.iteration;
  return a.text < b.text;
}

TrajectoryPool::TrajectoryPool(int cap) : cap_(cap) {
  if (cap < 1) throw Error(ErrorCode::kInvalidInput, "trajectory cap must be positive");
}

bool TrajectoryPool::insert(const Candidate& candidate) {
  if (!seen_.insert(candidate.text).second) return false;
  const auto pos = std::lower_bound(entries_.begin(), entries_.end(), candidate, ranks_before);
  if (pos - entries_.begin() >= cap_) return false;
  entries_.insert(pos, candidate);
  if (static_cast<int>(entries_.size()) > cap_) entries_.pop_back();
  return true;
}

std::vector<Candidate> TrajectoryPool::ascending() const {
  return {entries_.rbegin(), entries_.rend()};
}

namespace {

class AttackRun {
 public:
  AttackRun(const EvalSample& sample, Direction direction, const EvaluatorSpec& victim,
            const GoldSpec& gold, const AttackConfig& cfg, EvaluationContext& ctx,
            const AttackOptions& options)
      : sample_(sample),
        direction_(direction),
        victim_(victim),
        gold_(gold),
        cfg_(cfg),
        ctx_(ctx),
        options_(options),
        pool_(cfg.trajectory_cap),
        stop_threshold_(cfg.effective_stop_threshold()) {
    gold_.samples_k = cfg.gold_samples_k;
    gold_.parse_retries = cfg.gold_parse_retries;
  }

  AttackResult run() {
    if (auto problems = validate_config(cfg_); !problems.empty()) {
      throw Error(ErrorCode::kInvalidConfig, problems.front().field + ": " + problems.front().message);
    }
    if (victim_.needs_reference() && !sample_.reference) {
      throw Error(ErrorCode::kMissingReference,
                  "victim '" + victim_.id + "' needs a reference for sample '" + sample_.id + "'");
    }
    const PromptTemplate tpl =
        load_prompt_template(ctx_.prompts, sample_.task, direction_, cfg_.include_criteria);
    const PromptOptions prompt_options{cfg_.trajectory_cap, cfg_.candidates_per_iter};

    score(options_.initial_response.value_or(sample_.response), 0);

    std::optional<Termination> reason;
    int consecutive_empty = 0;
    for (int iteration = 1; iteration <= cfg_.max_iterations && !reason; ++iteration) {
      if ((reason = stop_reason())) break;

      const std::vector<Candidate> trajectory = pool_.ascending();
      CompletionRequest req;
      req.endpoint_id = cfg_.generator.endpoint_id;
      req.model = cfg_.generator.model;
      req.prompt = build_prompt(tpl, sample_, trajectory, prompt_options);
      req.temperature = cfg_.generator.temperature;
      req.max_tokens = cfg_.generator.max_tokens;
      req.sample_index = iteration;
      ++result_.generator_calls;
      const std::string raw = ctx_.client.complete(req).text;

      std::vector<std::string> texts;
      try {
        texts = parse_candidates(raw);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoCandidates) throw;
        if (++consecutive_empty >= cfg_.max_consecutive_empty) {
          reason = Termination::kGeneratorExhausted;
        }
        continue;
      }
      consecutive_empty = 0;
      if (static_cast<int>(texts.size()) > cfg_.candidates_per_iter) {
        texts.resize(cfg_.candidates_per_iter);
      }
      for (const std::string& text : texts) {
        if ((reason = stop_reason())) break;
        if (scored_texts_.count(text)) continue;
        score(text, iteration);
      }
    }
    result_.terminated_by = reason ? *reason : stop_reason().value_or(Termination::kMaxIterations);
    result_.sample_id = sample_.id;
    result_.direction = direction_;
    result_.best = *best_;
    result_.victim_queries = static_cast<int>(victim_queries_.load());
    result_.success = is_success(best_->s_gold, best_->s_victim, direction_, cfg_);
    return result_;
  }

 private:
  std::optional<Termination> stop_reason() const {
    if (best_ && best_->s_fb.value() >= stop_threshold_) return Termination::kThreshold;
    if (victim_queries_.load() >= cfg_.victim_budget) return Termination::kBudget;
    return std::nullopt;
  }

  void score(const std::string& text, int iteration) {
    scored_texts_.insert(text);
    const GoldRating gold = gold_rate_detailed(gold_, sample_, text, ctx_);
    result_.gold_queries += gold.completions;
    const Score victim = evaluate(victim_, sample_, text, ctx_, &victim_queries_);
    Candidate c{text, gold.score, victim, feedback_score(gold.score, victim, direction_, cfg_.alpha),
                iteration};
    ++result_.all_scored;
    if (options_.audit) {
      options_.audit({iteration, text, c.s_gold.value(), c.s_victim.value(), c.s_fb.value(),
                      static_cast<int>(victim_queries_.load())});
    }
    if (!best_ || ranks_before(c, *best_)) best_ = c;
    pool_.insert(c);
  }

  const EvalSample& sample_;
  Direction direction_;
  const EvaluatorSpec& victim_;
  GoldSpec gold_;
  const AttackConfig& cfg_;
  EvaluationContext& ctx_;
  const AttackOptions& options_;
  TrajectoryPool pool_;
  double stop_threshold_;
  std::set<std::string, std::less<>> scored_texts_;
  std::optional<Candidate> best_;
  std::atomic<std::int64_t> victim_queries_{0};
  AttackResult result_;
};

}  // namespace

AttackResult attack(const EvalSample& sample, Direction direction, const EvaluatorSpec& victim,
                    const GoldSpec& gold, const AttackConfig& cfg, EvaluationContext& ctx,
                    const AttackOptions& options) {
  return AttackRun(sample, direction, victim, gold, cfg, ctx, options).run();
}

bool direction_applicable(const EvaluatorSpec& victim, Direction direction) {
  return direction == Direction::kPlus || !victim.needs_reference();
}

std::optional<std::string> random_initial_response(std::span<const EvalSample> dataset,
                                                   const EvalSample& sample,
                                                   std::uint64_t seed) {
  std::vector<const EvalSample*> others;
  for (const auto& s : dataset) {
    if (s.id != sample.id && s.response != sample.response) others.push_back(&s);
  }
  if (others.empty()) return std::nullopt;
  SplitMix64 rng(seed ^ fnv1a64(sample.id));
  return others[rng.below(others.size())]->response;
}

CampaignReport run_campaign(std::span<const EvalSample> dataset,
                            std::span<const Direction> directions, const EvaluatorSpec& victim,
                            const GoldSpec& gold, const AttackConfig& cfg,
                            EvaluationContext& ctx, const CampaignOptions& options) {
  if (dataset.empty()) throw Error(ErrorCode::kInvalidInput, "campaign dataset is empty");
  const auto start = std::chrono::steady_clock::now();

  CampaignReport report;
  report.victim_id = victim.id;
  report.config_fingerprint = config_fingerprint(cfg);

  struct Task {
    const EvalSample* sample;
    Direction direction;
  };
  std::vector<Task> tasks;
  for (Direction d : {Direction::kPlus, Direction::kMinus}) {
    if (std::find(directions.begin(), directions.end(), d) == directions.end()) continue;
    if (!direction_applicable(victim, d)) continue;
    report.summary(d) = DirectionSummary{};
  }
  for (const auto& sample : dataset) {
    for (Direction d : {Direction::kPlus, Direction::kMinus}) {
      if (report.summary(d)) tasks.push_back({&sample, d});
    }
  }

  std::vector<SampleOutcome> outcomes(tasks.size());
  parallel_for(tasks.size(), options.workers, [&](std::size_t i) {
    const Task& task = tasks[i];
    if (options.resume) {
      if (auto done = options.resume(*task.sample, task.direction)) {
        outcomes[i] = *std::move(done);
        return;
      }
    }
    SampleOutcome outcome;
    outcome.sample_id = task.sample->id;
    outcome.direction = task.direction;
    AttackOptions attack_options;
    if (options.audit) attack_options.audit = options.audit(*task.sample, task.direction);
    if (task.direction == Direction::kMinus && cfg.random_init_minus) {
      attack_options.initial_response =
          random_initial_response(dataset, *task.sample, cfg.random_seed);
    }
    try {
      outcome.result =
          attack(*task.sample, task.direction, victim, gold, cfg, ctx, attack_options);
    } catch (const Error& e) {
      outcome.error = std::string(error_code_name(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
      outcome.error = e.what();
    }
    if (options.on_outcome) options.on_outcome(outcome);
    outcomes[i] = std::move(outcome);
  });

  report.per_sample = std::move(outcomes);
  tally(report);
  report.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  return report;
}

}  // namespace advforge
