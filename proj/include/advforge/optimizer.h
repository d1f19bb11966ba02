// The attack loop: generate candidates, score them with the gold and victim
// evaluators, fold both scores into a feedback score, keep the best few as the
// trajectory for the next prompt, and stop on threshold, budget, iteration
// limit or an unproductive generator.

#ifndef ADVFORGE_OPTIMIZER_H_
#define ADVFORGE_OPTIMIZER_H_

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "advforge/core.h"
#include "advforge/evaluators.h"
#include "advforge/report.h"

namespace advforge {

// alpha * gold - victim for kPlus, victim - alpha * gold for kMinus.
FeedbackScore feedback_score(Score s_gold, Score s_victim, Direction direction, double alpha);

// kPlus:  gold > tau1_plus  and gold - victim > tau2
// kMinus: gold < tau1_minus and victim - gold > tau2
bool is_success(Score s_gold, Score s_victim, Direction direction, const AttackConfig& cfg);

// Strict weak order used everywhere a "best" candidate is chosen: higher
// s_fb first, then earlier iteration, then lexicographically smaller text.
bool ranks_before(const Candidate& a, const Candidate& b);

// Keeps the cap best candidates ever inserted. Texts are unique.
class TrajectoryPool {
 public:
  explicit TrajectoryPool(int cap = 10);

  // Returns false for a text already inserted or a candidate that does not
  // make the cut.
  bool insert(const Candidate& candidate);

  // Best first.
  const std::vector<Candidate>& entries() const { return entries_; }
  // Worst first, as rendered into the generation prompt.
  std::vector<Candidate> ascending() const;
  std::size_t size() const { return entries_.size(); }
  int cap() const { return cap_; }

 private:
  int cap_;
  std::vector<Candidate> entries_;
  std::set<std::string, std::less<>> seen_;
};

struct AuditRecord {
  int iteration = 0;
  std::string text;
  double s_gold = 0.0;
  double s_victim = 0.0;
  double s_fb = 0.0;
  int victim_queries = 0;  // cumulative, including this candidate
};

struct AttackOptions {
  // Replaces R0 as the starting response (random kMinus initialization).
  std::optional<std::string> initial_response;
  std::function<void(const AuditRecord&)> audit;
};

// Runs one attack. The gold evaluator uses cfg.gold_samples_k and
// cfg.gold_parse_retries. Throws on gold unavailability or generator
// transport failure; callers record those as sample-level failures.
AttackResult attack(const EvalSample& sample, Direction direction, const EvaluatorSpec& victim,
                    const GoldSpec& gold, const AttackConfig& cfg, EvaluationContext& ctx,
                    const AttackOptions& options = {});

struct CampaignOptions {
  int workers = 4;
  // Per (sample, direction) audit sink factory; may be empty.
  std::function<std::function<void(const AuditRecord&)>(const EvalSample&, Direction)> audit;
  // Returns a finished outcome to reuse instead of attacking again.
  std::function<std::optional<SampleOutcome>(const EvalSample&, Direction)> resume;
  // Called after each freshly computed outcome, from worker threads.
  std::function<void(const SampleOutcome&)> on_outcome;
};

// Directions that a victim can be attacked in. Reference-based victims only
// support kPlus.
bool direction_applicable(const EvaluatorSpec& victim, Direction direction);

// Sample for random kMinus initialization: another sample's response chosen
// from the campaign seed and the sample id.
std::optional<std::string> random_initial_response(std::span<const EvalSample> dataset,
                                                   const EvalSample& sample,
                                                   std::uint64_t seed);

CampaignReport run_campaign(std::span<const EvalSample> dataset,
                            std::span<const Direction> directions, const EvaluatorSpec& victim,
                            const GoldSpec& gold, const AttackConfig& cfg,
                            EvaluationContext& ctx, const CampaignOptions& options = {});

}  // namespace advforge

#endif  // ADVFORGE_OPTIMIZER_H_
