#include "advforge/optimizer.h"

#include <mutex>
#include <random>

#include "advforge/simkit.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "sim_loop.h"
#include "test_util.h"

namespace advforge {
namespace {

Candidate cand(std::string text, double fb, int iteration = 1) {
  return Candidate{std::move(text), Score(50), Score(50), FeedbackScore(fb), iteration};
}

TEST(FeedbackScoreTest, BothDirections) {
  EXPECT_DOUBLE_EQ(feedback_score(Score(90), Score(20), Direction::kPlus, 1.0).value(), 70.0);
  EXPECT_DOUBLE_EQ(feedback_score(Score(90), Score(20), Direction::kMinus, 1.0).value(), -70.0);
  EXPECT_DOUBLE_EQ(feedback_score(Score(10), Score(80), Direction::kMinus, 2.0).value(), 60.0);
  EXPECT_DOUBLE_EQ(feedback_score(Score(10), Score(80), Direction::kPlus, 0.5).value(), -75.0);
}

TEST(IsSuccessTest, StrictBoundaries) {
  AttackConfig cfg;
  EXPECT_FALSE(is_success(Score(70), Score(0), Direction::kPlus, cfg));
  EXPECT_TRUE(is_success(Score(70.5), Score(30), Direction::kPlus, cfg));
  EXPECT_FALSE(is_success(Score(80), Score(40), Direction::kPlus, cfg));
  EXPECT_FALSE(is_success(Score(30), Score(100), Direction::kMinus, cfg));
  EXPECT_TRUE(is_success(Score(29), Score(69.5), Direction::kMinus, cfg));
  EXPECT_FALSE(is_success(Score(20), Score(60), Direction::kMinus, cfg));
}

TEST(IsSuccessTest, MatchesOracleOnGrid) {
  AttackConfig cfg;
  for (int g = 0; g <= 100; ++g) {
    for (int v = 0; v <= 100; ++v) {
      ASSERT_EQ(is_success(Score(g), Score(v), Direction::kPlus, cfg),
                oracle::success_plus(g, v, cfg.tau1_plus, cfg.tau2));
      ASSERT_EQ(is_success(Score(g), Score(v), Direction::kMinus, cfg),
                oracle::success_minus(g, v, cfg.tau1_minus, cfg.tau2));
    }
  }
}

TEST(RanksBeforeTest, TieBreaks) {
  EXPECT_TRUE(ranks_before(cand("z", 10, 5), cand("a", 9, 1)));
  EXPECT_TRUE(ranks_before(cand("z", 10, 1), cand("a", 10, 2)));
  EXPECT_TRUE(ranks_before(cand("a", 10, 2), cand("b", 10, 2)));
  EXPECT_FALSE(ranks_before(cand("a", 10, 2), cand("a", 10, 2)));
}

TEST(TrajectoryPoolTest, KeepsBestUnique) {
  TrajectoryPool pool(3);
  EXPECT_TRUE(pool.insert(cand("a", 1)));
  EXPECT_TRUE(pool.insert(cand("b", 5)));
  EXPECT_FALSE(pool.insert(cand("a", 99)));
  EXPECT_TRUE(pool.insert(cand("c", 3)));
  EXPECT_TRUE(pool.insert(cand("d", 4)));
  EXPECT_FALSE(pool.insert(cand("e", 0)));
  ASSERT_EQ(pool.size(), 3u);
  EXPECT_EQ(pool.entries()[0].text, "b");
  const auto asc = pool.ascending();
  EXPECT_EQ(asc.front().text, "c");
  EXPECT_EQ(asc.back().text, "b");
  EXPECT_THROW(TrajectoryPool(0), Error);
}

oracle::LoopCase basic_case() {
  oracle::LoopCase c;
  c.r0 = "original";
  c.gold = {{"original", 60}, {"a", 70}, {"b", 80}, {"c", 90}};
  c.victim = {{"original", 55}, {"a", 50}, {"b", 45}, {"c", 10}};
  c.script = {{"a", "b"}, {"c"}};
  return c;
}

TEST(AttackTest, ReachesThreshold) {
  const auto run = testing::run_loop_case(basic_case());
  EXPECT_EQ(run.result.best.text, "c");
  EXPECT_EQ(run.result.best.iteration, 2);
  EXPECT_DOUBLE_EQ(run.result.best.s_fb.value(), 80.0);
  EXPECT_EQ(run.result.terminated_by, Termination::kThreshold);
  EXPECT_TRUE(run.result.success);
  EXPECT_EQ(run.result.all_scored, 4);
  EXPECT_EQ(run.result.victim_queries, 4);
  EXPECT_EQ(run.result.generator_calls, 2);
}

TEST(AttackTest, AuditCumulativeQueries) {
  const auto run = testing::run_loop_case(basic_case());
  ASSERT_EQ(run.audit.size(), 4u);
  EXPECT_EQ(run.audit[0].iteration, 0);
  EXPECT_EQ(run.audit[0].text, "original");
  for (std::size_t i = 0; i < run.audit.size(); ++i) {
    EXPECT_EQ(run.audit[i].victim_queries, static_cast<int>(i) + 1);
  }
}

TEST(AttackTest, BudgetCountsOriginal) {
  auto c = basic_case();
  c.budget = 2;
  const auto run = testing::run_loop_case(c);
  EXPECT_EQ(run.result.victim_queries, 2);
  EXPECT_EQ(run.result.terminated_by, Termination::kBudget);
  EXPECT_EQ(run.result.best.text, "a");
}

TEST(AttackTest, GeneratorExhausted) {
  auto c = basic_case();
  c.stop_threshold = 1000;
  const auto run = testing::run_loop_case(c);
  // Two productive iterations then three empty ones.
  EXPECT_EQ(run.result.terminated_by, Termination::kGeneratorExhausted);
  EXPECT_EQ(run.result.generator_calls, 5);
  EXPECT_EQ(run.result.best.text, "c");
}

TEST(AttackTest, MaxIterations) {
  auto c = basic_case();
  c.stop_threshold = 1000;
  c.max_iterations = 1;
  const auto run = testing::run_loop_case(c);
  EXPECT_EQ(run.result.terminated_by, Termination::kMaxIterations);
  EXPECT_EQ(run.result.best.text, "b");
}

TEST(AttackTest, ThresholdOnNonSuccess) {
  // s_fb reaches the default threshold without meeting the gold bound.
  oracle::LoopCase c;
  c.r0 = "x";
  c.gold = {{"x", 50}, {"y", 65}};
  c.victim = {{"x", 50}, {"y", 20}};
  c.script = {{"y"}};
  const auto run = testing::run_loop_case(c);
  EXPECT_EQ(run.result.terminated_by, Termination::kThreshold);
  EXPECT_FALSE(run.result.success);
}

TEST(AttackTest, MinusDirection) {
  oracle::LoopCase c;
  c.plus = false;
  c.r0 = "fine reply";
  c.gold = {{"fine reply", 80}, {"nonsense", 10}, {"off topic", 20}};
  c.victim = {{"fine reply", 70}, {"nonsense", 85}, {"off topic", 40}};
  c.script = {{"off topic", "nonsense"}};
  const auto run = testing::run_loop_case(c);
  EXPECT_EQ(run.result.best.text, "nonsense");
  EXPECT_TRUE(run.result.success);
}

TEST(AttackTest, SkipsRepeatsAndTruncates) {
  oracle::LoopCase c;
  c.r0 = "r";
  c.script = {{"a", "a", "b", "c"}, {"b", "d"}};
  c.per_iteration = 2;
  c.stop_threshold = 1000;
  c.max_iterations = 2;
  const auto run = testing::run_loop_case(c);
  std::vector<std::string> texts;
  for (const auto& r : run.audit) texts.push_back(r.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"r", "a", "b", "d"}));
}

TEST(AttackTest, GoldSamplesCounted) {
  const auto run = testing::run_loop_case(basic_case(), 3);
  EXPECT_EQ(run.result.gold_queries, 12);
}

TEST(AttackTest, MissingReferenceForMetricVictim) {
  LlmClient client;
  PromptLibrary prompts(std::string(ADVFORGE_SOURCE_DIR) + "/assets/prompts");
  sim::SyntheticLandscape land;
  land.gold.rule = "length";
  land.victim.rule = "metric";
  land.victim.metric = "rougel";
  const auto world = sim::make_sim_world(land, {{"a"}}, client, prompts);
  AttackConfig cfg;
  cfg.generator = world.generator;
  EvaluationContext ctx{client, prompts};
  try {
    attack(testing::dialogue("s", "c", "r"), Direction::kPlus, world.victim, world.gold, cfg, ctx);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingReference);
  }
}

TEST(AttackTest, AgreesWithLoopOracle) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 60; ++i) {
    const oracle::LoopCase c = testing::random_loop_case(rng);
    const auto expected = oracle::expected_attack(c);
    const auto run = testing::run_loop_case(c);
    ASSERT_EQ(run.result.best.text, expected.best_text) << "case " << i;
    EXPECT_EQ(run.result.best.iteration, expected.best_iteration) << "case " << i;
    EXPECT_DOUBLE_EQ(run.result.best.s_fb.value(), expected.best_fb) << "case " << i;
    EXPECT_EQ(run.result.all_scored, expected.scored) << "case " << i;
    EXPECT_EQ(termination_name(run.result.terminated_by), expected.terminated_by) << "case " << i;
    EXPECT_LE(run.result.victim_queries, c.budget) << "case " << i;
  }
}

TEST(DirectionApplicableTest, ReferenceVictimsPlusOnly) {
  EvaluatorSpec metric{"bleu", NativeMetricSpec{"bleu"}};
  EvaluatorSpec remote{"r", RemoteHttpSpec{"http://x", 1}};
  EXPECT_TRUE(direction_applicable(metric, Direction::kPlus));
  EXPECT_FALSE(direction_applicable(metric, Direction::kMinus));
  EXPECT_TRUE(direction_applicable(remote, Direction::kMinus));
}

TEST(RandomInitialResponseTest, DeterministicAndForeign) {
  std::vector<EvalSample> data = {testing::dialogue("a", "c", "ra"),
                                  testing::dialogue("b", "c", "rb"),
                                  testing::dialogue("c", "c", "rc")};
  const auto first = random_initial_response(data, data[0], 7);
  ASSERT_TRUE(first.has_value());
  EXPECT_NE(*first, "ra");
  EXPECT_EQ(first, random_initial_response(data, data[0], 7));
  std::vector<EvalSample> alone = {data[0]};
  EXPECT_FALSE(random_initial_response(alone, data[0], 7).has_value());
}

class CampaignTest : public ::testing::Test {
 protected:
  void SetUp() override {
    sim::Scenario scenario;
    scenario.landscape.gold.rule = "table";
    scenario.landscape.gold.table = {{"good", 90}, {"bad", 10}};
    scenario.landscape.gold.table_default = 50;
    scenario.landscape.victim.rule = "table";
    scenario.landscape.victim.table = {{"good", 20}, {"bad", 80}};
    scenario.landscape.victim.table_default = 50;
    scenario.scripts["*"] = {{"good", "bad"}};
    for (int i = 0; i < 5; ++i) {
      data.push_back(testing::dialogue("s" + std::to_string(i), "ctx " + std::to_string(i),
                                       "resp " + std::to_string(i)));
    }
    world = sim::make_sim_world(scenario, data, client, prompts);
    cfg.generator = world.generator;
  }

  LlmClient client;
  PromptLibrary prompts{std::string(ADVFORGE_SOURCE_DIR) + "/assets/prompts"};
  std::vector<EvalSample> data;
  sim::SimWorld world;
  AttackConfig cfg;
};

TEST_F(CampaignTest, BothDirectionsSucceed) {
  EvaluationContext ctx{client, prompts};
  const Direction dirs[] = {Direction::kPlus, Direction::kMinus};
  const auto report = run_campaign(data, dirs, world.victim, world.gold, cfg, ctx);
  ASSERT_EQ(report.per_sample.size(), 10u);
  EXPECT_EQ(report.plus->attempted, 5);
  EXPECT_EQ(report.plus->succeeded, 5);
  EXPECT_EQ(report.minus->succeeded, 5);
  EXPECT_EQ(asr_cell(report), "100.0 / 100.0");
  EXPECT_EQ(report.victim_id, "sim-table");
}

TEST_F(CampaignTest, WorkerCountDoesNotChangeOutcomes) {
  EvaluationContext ctx{client, prompts};
  const Direction dirs[] = {Direction::kPlus, Direction::kMinus};
  CampaignOptions one;
  one.workers = 1;
  CampaignOptions many;
  many.workers = 8;
  auto a = run_campaign(data, dirs, world.victim, world.gold, cfg, ctx, one);
  auto b = run_campaign(data, dirs, world.victim, world.gold, cfg, ctx, many);
  a.wall_clock_ms = b.wall_clock_ms = 0;
  EXPECT_EQ(a, b);
}

TEST_F(CampaignTest, ResumeSkipsFinished) {
  EvaluationContext ctx{client, prompts};
  const Direction dirs[] = {Direction::kPlus};
  SampleOutcome canned;
  canned.sample_id = "s0";
  canned.error = "kept";
  CampaignOptions options;
  std::mutex mu;
  int fresh = 0;
  options.resume = [&](const EvalSample& s, Direction) -> std::optional<SampleOutcome> {
    if (s.id == "s0") return canned;
    return std::nullopt;
  };
  options.on_outcome = [&](const SampleOutcome&) {
    std::lock_guard<std::mutex> lock(mu);
    ++fresh;
  };
  const auto report = run_campaign(data, dirs, world.victim, world.gold, cfg, ctx, options);
  EXPECT_EQ(fresh, 4);
  EXPECT_EQ(report.per_sample[0].error, "kept");
  EXPECT_EQ(report.plus->attempted, 5);
  EXPECT_EQ(report.plus->succeeded, 4);
  EXPECT_FALSE(report.minus.has_value());
}

TEST_F(CampaignTest, FailuresRecordedNotThrown) {
  LlmClient broken;
  broken.register_scripted_backend(std::string(sim::kGoldEndpoint), {});
  broken.register_scripted_backend(std::string(sim::kGeneratorEndpoint), {});
  broken.register_scripted_backend(std::string(sim::kVictimEndpoint), {});
  EvaluationContext ctx{broken, prompts};
  const Direction dirs[] = {Direction::kPlus};
  const auto report = run_campaign(data, dirs, world.victim, world.gold, cfg, ctx);
  EXPECT_EQ(report.failures(), 5);
  EXPECT_EQ(report.plus->attempted, 5);
  EXPECT_EQ(report.plus->succeeded, 0);
  for (const auto& o : report.per_sample) EXPECT_FALSE(o.error.empty());
}

TEST(CampaignValidationTest, EmptyDataset) {
  LlmClient client;
  PromptLibrary prompts;
  EvaluationContext ctx{client, prompts};
  const Direction dirs[] = {Direction::kPlus};
  EXPECT_THROW(run_campaign({}, dirs, EvaluatorSpec{"x", NativeMetricSpec{"bleu"}}, GoldSpec{},
                            AttackConfig{}, ctx),
               Error);
}

}  // namespace
}  // namespace advforge
