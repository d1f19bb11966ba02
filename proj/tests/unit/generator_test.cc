#include "advforge/generator.h"

#include <random>
#include <set>

#include "gtest/gtest.h"
#include "test_util.h"

namespace advforge {
namespace {

PromptLibrary assets() { return PromptLibrary(std::string(ADVFORGE_SOURCE_DIR) + "/assets/prompts"); }

Candidate cand(std::string text, double fb) {
  return Candidate{std::move(text), Score(50), Score(50), FeedbackScore(fb), 1};
}

TEST(ParseCandidatesTest, ExtractsMarkedBlocks) {
  const auto out = parse_candidates("Here you go:\n<RES> first </RES>\n<RES>second<RES>");
  // "</RES>" is not the marker, so the first pair spans "first </RES>\n".
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], "first </RES>");
}

TEST(ParseCandidatesTest, PairsInOrder) {
  EXPECT_EQ(parse_candidates("<RES>a<RES> junk <RES> b <RES><RES>c<RES>"),
            (std::vector<std::string>{"a", "b", "c"}));
}

TEST(ParseCandidatesTest, DropsEmptiesAndRepeats) {
  EXPECT_EQ(parse_candidates("<RES>  <RES><RES>x<RES><RES>x<RES><RES>y<RES>"),
            (std::vector<std::string>{"x", "y"}));
}

TEST(ParseCandidatesTest, UnpairedTrailingMarkerIgnored) {
  EXPECT_EQ(parse_candidates("<RES>x<RES><RES>dangling"), (std::vector<std::string>{"x"}));
}

TEST(ParseCandidatesTest, NothingUsable) {
  for (const char* raw : {"", "no markers here", "<RES>only one", "<RES>\n\t<RES>"}) {
    try {
      parse_candidates(raw);
      FAIL() << raw;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNoCandidates);
    }
  }
}

TEST(FormatCandidatesTest, RoundTripRandom) {
  std::mt19937 rng(3);
  const std::string alphabet = "abc XYZ,.!?'\n\t-";
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> items;
    std::set<std::string> seen;
    const int n = 1 + static_cast<int>(rng() % 6);
    while (static_cast<int>(items.size()) < n) {
      std::string s;
      const int len = 1 + static_cast<int>(rng() % 12);
      for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
      s = trim(s);
      if (s.empty() || !seen.insert(s).second) continue;
      items.push_back(s);
    }
    EXPECT_EQ(parse_candidates(format_candidates(items)), items);
  }
}

TEST(FormatScoreTest, OneDecimal) {
  EXPECT_EQ(format_score(40), "40.0");
  EXPECT_EQ(format_score(-12.34), "-12.3");
  EXPECT_EQ(format_score(-0.04), "0.0");
  EXPECT_EQ(format_score(99.96), "100.0");
}

TEST(PromptTemplateTest, LoadsAssets) {
  const PromptLibrary prompts = assets();
  const auto plus = load_prompt_template(prompts, TaskKind::kDialogue, Direction::kPlus, true);
  EXPECT_FALSE(plus.instruction.empty());
  EXPECT_TRUE(plus.criteria.has_value());
  EXPECT_FALSE(plus.closing.empty());
  const auto no_criteria =
      load_prompt_template(prompts, TaskKind::kDialogue, Direction::kPlus, false);
  EXPECT_FALSE(no_criteria.criteria.has_value());
  for (TaskKind t : {TaskKind::kDialogue, TaskKind::kSummarization, TaskKind::kQuestionEval}) {
    for (Direction d : {Direction::kPlus, Direction::kMinus}) {
      EXPECT_NO_THROW(load_prompt_template(prompts, t, d, true));
    }
  }
}

class BuildPromptTest : public ::testing::Test {
 protected:
  PromptTemplate tpl{TaskKind::kDialogue, Direction::kPlus, "Write {{n}} responses in {{marker}}.",
                     std::string("Be relevant."), "Wrap each in {{marker}}...{{marker}}."};
  EvalSample sample = testing::dialogue("d", "A: hello there", "hi");
};

TEST_F(BuildPromptTest, Layout) {
  const std::vector<Candidate> traj = {cand("worse", -10), cand("better", 25.25)};
  const std::string p = build_prompt(tpl, sample, traj, {10, 3});
  EXPECT_EQ(p,
            "Write 3 responses in <RES>.\n\n"
            "Evaluation criteria:\nBe relevant.\n\n"
            "Dialogue context:\nA: hello there\n\n"
            "Previous responses and their scores, in ascending order of score:\n"
            "(worse, -10.0)\n(better, 25.2)\n\n"
            "Wrap each in <RES>...<RES>.\n");
}

TEST_F(BuildPromptTest, QuestionIncludesAnswer) {
  const auto q = testing::question("q", "The sky is blue.", "What colour?", "blue");
  const std::string p = build_prompt(tpl, q, {}, {});
  EXPECT_NE(p.find("Article:\nThe sky is blue."), std::string::npos);
  EXPECT_NE(p.find("Answer:\nblue"), std::string::npos);
  EXPECT_EQ(p.find("Previous responses"), std::string::npos);
}

TEST_F(BuildPromptTest, Contracts) {
  const std::vector<Candidate> descending = {cand("a", 5), cand("b", 1)};
  EXPECT_THROW(build_prompt(tpl, sample, descending, {}), Error);
  const std::vector<Candidate> three = {cand("a", 1), cand("b", 2), cand("c", 3)};
  try {
    build_prompt(tpl, sample, three, {2, 4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContractViolation);
  }
}

}  // namespace
}  // namespace advforge
