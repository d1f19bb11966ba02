#include "sim_loop.h"

#include <string>

#include "advforge/simkit.h"

namespace advforge::testing {

LoopRun run_loop_case(const oracle::LoopCase& c, int gold_samples_k) {
  sim::SyntheticLandscape landscape;
  landscape.gold.rule = "table";
  landscape.gold.table = c.gold;
  landscape.gold.table_default = c.gold_default;
  landscape.victim.rule = "table";
  landscape.victim.table = c.victim;
  landscape.victim.table_default = c.victim_default;

  LlmClient client;
  PromptLibrary prompts(std::string(ADVFORGE_SOURCE_DIR) + "/assets/prompts");
  const sim::SimWorld world = sim::make_sim_world(landscape, c.script, client, prompts);

  AttackConfig cfg;
  cfg.alpha = c.alpha;
  cfg.victim_budget = c.budget;
  cfg.candidates_per_iter = c.per_iteration;
  cfg.max_iterations = c.max_iterations;
  cfg.max_consecutive_empty = c.max_empty;
  cfg.stop_threshold = c.stop_threshold;
  cfg.gold_samples_k = gold_samples_k;
  cfg.generator = world.generator;

  EvalSample sample;
  sample.id = "loop";
  sample.context = "A: say something";
  sample.response = c.r0;

  LoopRun run;
  AttackOptions options;
  options.audit = [&run](const AuditRecord& r) { run.audit.push_back(r); };
  EvaluationContext ctx{client, prompts};
  run.result = attack(sample, c.plus ? Direction::kPlus : Direction::kMinus, world.victim,
                      world.gold, cfg, ctx, options);
  return run;
}

oracle::LoopCase random_loop_case(std::mt19937_64& rng) {
  auto pick = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  const int vocab = pick(3, 25);
  auto word = [&] { return "reply " + std::to_string(pick(0, vocab - 1)); };

  oracle::LoopCase c;
  c.r0 = word();
  for (int i = 0; i < vocab; ++i) {
    const std::string w = "reply " + std::to_string(i);
    if (pick(0, 4) > 0) c.gold[w] = pick(0, 200) / 2.0;
    if (pick(0, 4) > 0) c.victim[w] = pick(0, 200) / 2.0;
  }
  c.gold_default = pick(0, 100);
  c.victim_default = pick(0, 100);
  const int iterations = pick(1, 14);
  for (int i = 0; i < iterations; ++i) {
    std::vector<std::string> batch;
    const int n = pick(0, 3) == 0 ? 0 : pick(1, 6);
    for (int j = 0; j < n; ++j) batch.push_back(word());
    c.script.push_back(batch);
  }
  c.plus = pick(0, 1) == 1;
  const double alphas[] = {0.5, 1.0, 1.5, 2.0};
  c.alpha = alphas[pick(0, 3)];
  c.budget = pick(1, 30);
  c.per_iteration = pick(1, 5);
  c.max_iterations = pick(1, 16);
  c.stop_threshold = pick(-20, 120);
  return c;
}

}  // namespace advforge::testing
