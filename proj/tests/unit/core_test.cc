#include "advforge/core.h"

#include <cmath>
#include <limits>

#include "gtest/gtest.h"

namespace advforge {
namespace {

TEST(ScoreTest, AcceptsClosedRange) {
  EXPECT_EQ(Score(0.0).value(), 0.0);
  EXPECT_EQ(Score(100.0).value(), 100.0);
  EXPECT_EQ(Score(57.25).value(), 57.25);
}

TEST(ScoreTest, RejectsOutOfRangeAndNonFinite) {
  for (double bad : {-0.001, 100.0001, std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::infinity()}) {
    try {
      Score s(bad);
      FAIL() << "accepted " << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidRange);
    }
  }
}

TEST(ScoreTest, Ordering) {
  EXPECT_LT(Score(10), Score(20));
  EXPECT_EQ(Score(33), Score(33));
}

TEST(FeedbackScoreTest, AnyFiniteValue) {
  EXPECT_EQ(FeedbackScore(-250.5).value(), -250.5);
  EXPECT_THROW(FeedbackScore(std::numeric_limits<double>::infinity()), Error);
}

TEST(TaskKindTest, Aliases) {
  EXPECT_EQ(parse_task_kind("dialog"), TaskKind::kDialogue);
  EXPECT_EQ(parse_task_kind("Dialogue"), TaskKind::kDialogue);
  EXPECT_EQ(parse_task_kind("summ"), TaskKind::kSummarization);
  EXPECT_EQ(parse_task_kind("question"), TaskKind::kQuestionEval);
  EXPECT_EQ(parse_task_kind("qg"), TaskKind::kQuestionEval);
  EXPECT_THROW(parse_task_kind("translation"), Error);
  EXPECT_EQ(task_kind_name(TaskKind::kSummarization), "summarization");
}

TEST(DirectionTest, RoundTrip) {
  for (Direction d : {Direction::kPlus, Direction::kMinus}) {
    EXPECT_EQ(parse_direction(direction_name(d)), d);
  }
  EXPECT_THROW(parse_direction("sideways"), Error);
}

TEST(EvalSampleTest, QuestionNeedsAnswer) {
  EvalSample s{"q1", TaskKind::kQuestionEval, "Passage.", "What is it?", std::nullopt,
               std::nullopt};
  EXPECT_FALSE(validate_sample(s).empty());
  s.answer = "It";
  EXPECT_TRUE(validate_sample(s).empty());
}

TEST(EvalSampleTest, AnswerOnlyForQuestions) {
  EvalSample s{"d1", TaskKind::kDialogue, "A: hi", "hello", std::nullopt, std::string("x")};
  EXPECT_FALSE(validate_sample(s).empty());
}

TEST(EvalSampleTest, EmptyFields) {
  EvalSample s{"", TaskKind::kDialogue, " ", "", std::nullopt, std::nullopt};
  EXPECT_EQ(validate_sample(s).size(), 3u);
}

TEST(AttackConfigTest, DefaultsAreValid) {
  AttackConfig cfg;
  EXPECT_TRUE(validate_config(cfg).empty());
  EXPECT_EQ(cfg.victim_budget, 300);
  EXPECT_EQ(cfg.gold_samples_k, 8);
  EXPECT_EQ(cfg.trajectory_cap, 10);
  EXPECT_DOUBLE_EQ(cfg.effective_stop_threshold(), 40.0);
}

TEST(AttackConfigTest, StopThresholdFollowsAlpha) {
  AttackConfig cfg;
  cfg.alpha = 2.0;
  EXPECT_DOUBLE_EQ(cfg.effective_stop_threshold(), 110.0);
  cfg.stop_threshold = 12.5;
  EXPECT_DOUBLE_EQ(cfg.effective_stop_threshold(), 12.5);
}

TEST(AttackConfigTest, ReportsEveryViolation) {
  AttackConfig cfg;
  cfg.tau1_plus = 20;
  cfg.tau1_minus = 30;
  cfg.victim_budget = 0;
  cfg.alpha = -1;
  const auto problems = validate_config(cfg);
  ASSERT_EQ(problems.size(), 3u);
  bool ordering = false, budget = false;
  for (const auto& p : problems) {
    ordering = ordering || p.message == "tau1 ordering";
    budget = budget || p.message == "budget must be positive";
  }
  EXPECT_TRUE(ordering);
  EXPECT_TRUE(budget);
}

TEST(NormalizeScoreTest, LinearMapAndClamp) {
  EXPECT_DOUBLE_EQ(normalize_score(0.5, 0.0, 1.0).value(), 50.0);
  EXPECT_DOUBLE_EQ(normalize_score(3.0, 1.0, 5.0).value(), 50.0);
  const auto before = clamp_event_count();
  EXPECT_DOUBLE_EQ(normalize_score(7.0, 1.0, 5.0).value(), 100.0);
  EXPECT_DOUBLE_EQ(normalize_score(-2.0, 1.0, 5.0).value(), 0.0);
  EXPECT_EQ(clamp_event_count(), before + 2);
}

TEST(NormalizeScoreTest, IdentityOnHundredScale) {
  for (double v : {0.0, 0.1, 33.333333333333336, 82.5, 99.99999999, 100.0}) {
    EXPECT_EQ(normalize_score(v, 0.0, 100.0).value(), v);
  }
}

}  // namespace
}  // namespace advforge
