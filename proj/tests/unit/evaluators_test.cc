#include "advforge/evaluators.h"

#include <fstream>

#include "gtest/gtest.h"
#include "httplib.h"
#include "advforge/http_transport.h"
#include "json.hpp"
#include "stub_score_server.h"
#include "test_util.h"

namespace advforge {
namespace {

using nlohmann::json;

PromptLibrary assets() { return PromptLibrary(std::string(ADVFORGE_SOURCE_DIR) + "/assets/prompts"); }

LlmPromptedSpec member(std::string endpoint) {
  LlmPromptedSpec m;
  m.endpoint_id = std::move(endpoint);
  m.model = "judge";
  return m;
}

class EvaluatorsTest : public ::testing::Test {
 protected:
  LlmClient client;
  PromptLibrary prompts = assets();
  EvaluationContext ctx{client, prompts};
  EvalSample sample = testing::dialogue("d1", "A: how was the trip?", "great, thanks",
                                        std::string("it was great"));
};

TEST(ParseRatingTest, GoldenCases) {
  std::ifstream in(std::string(ADVFORGE_FIXTURE_DIR) + "/parse_rating_cases.json");
  const json cases = json::parse(in);
  ASSERT_GE(cases.size(), 20u);
  for (const auto& c : cases) {
    const std::string text = c.at("text");
    if (c.value("error", false)) {
      try {
        parse_rating(text);
        ADD_FAILURE() << "parsed: " << text;
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kParseFailure) << text;
      }
    } else {
      EXPECT_EQ(parse_rating(text), c.at("rating").get<double>()) << text;
    }
  }
}

TEST_F(EvaluatorsTest, NativeMetricIdentity) {
  EvaluatorSpec spec{"rl", NativeMetricSpec{"rougel"}};
  EXPECT_DOUBLE_EQ(evaluate(spec, sample, "it was great", ctx).value(), 100.0);
}

TEST_F(EvaluatorsTest, NativeMetricNeedsReference) {
  EvaluatorSpec spec{"rl", NativeMetricSpec{"rougel"}};
  sample.reference.reset();
  try {
    evaluate(spec, sample, "x", ctx);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingReference);
    EXPECT_NE(std::string(e.what()).find("rl"), std::string::npos);
  }
}

TEST_F(EvaluatorsTest, LlmPromptedParsesOutput) {
  client.register_scripted_backend("judge", {"87"});
  EvaluatorSpec spec{"llm", member("judge")};
  EXPECT_DOUBLE_EQ(evaluate(spec, sample, "anything", ctx).value(), 87.0);
}

TEST_F(EvaluatorsTest, LlmPromptedParseFailureCarriesId) {
  client.register_scripted_backend("judge", {"no idea"});
  EvaluatorSpec spec{"my-judge", member("judge")};
  try {
    evaluate(spec, sample, "anything", ctx);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseFailure);
    EXPECT_NE(std::string(e.what()).find("my-judge"), std::string::npos);
  }
}

TEST_F(EvaluatorsTest, VictimCounterCountsCalls) {
  std::atomic<std::int64_t> queries{0};
  EvaluatorSpec spec{"rl", NativeMetricSpec{"rouge1"}};
  for (int i = 0; i < 5; ++i) evaluate(spec, sample, "great", ctx, &queries);
  EXPECT_EQ(queries.load(), 5);
}

TEST_F(EvaluatorsTest, RatingPromptUsesTaskTemplate) {
  const std::string prompt = render_rating_prompt(member("j"), sample, "great, thanks", prompts);
  EXPECT_NE(prompt.find("A: how was the trip?"), std::string::npos);
  EXPECT_NE(prompt.find("great, thanks"), std::string::npos);
  EXPECT_EQ(prompt.find("{{"), std::string::npos);
}

TEST_F(EvaluatorsTest, RatingPromptCustomTemplate) {
  prompts.add("custom", "[{{task}}] {{response}} | {{reference}}");
  LlmPromptedSpec m = member("j");
  m.prompt_template_id = "custom";
  EXPECT_EQ(render_rating_prompt(m, sample, "r", prompts), "[dialogue] r | it was great");
}

TEST_F(EvaluatorsTest, GoldMean) {
  client.register_scripted_backend("judge", {"80", "90", "85", "75", "80", "90", "85", "75"});
  GoldSpec gold{{member("judge")}, 8, 2};
  EXPECT_DOUBLE_EQ(gold_rate(gold, sample, "resp", ctx).value(), 82.5);
}

TEST_F(EvaluatorsTest, GoldSingleSample) {
  client.register_scripted_backend("judge", {"70"});
  GoldSpec gold{{member("judge")}, 1, 2};
  EXPECT_DOUBLE_EQ(gold_rate(gold, sample, "resp", ctx).value(), 70.0);
}

TEST_F(EvaluatorsTest, GoldEnsemblePoolsMembers) {
  client.register_scripted_backend("a", {"60", "60"});
  client.register_scripted_backend("b", {"80", "80"});
  GoldSpec gold{{member("a"), member("b")}, 2, 2};
  EXPECT_DOUBLE_EQ(gold_rate(gold, sample, "resp", ctx).value(), 70.0);
}

TEST_F(EvaluatorsTest, GoldDistinctSampleIndices) {
  std::vector<int> seen;
  client.register_backend("judge", std::make_unique<FunctionBackend>([&](const CompletionRequest& r) {
                            seen.push_back(r.sample_index);
                            return std::string("50");
                          }));
  GoldSpec gold{{member("judge")}, 4, 2};
  gold_rate(gold, sample, "resp", ctx);
  EXPECT_EQ(seen, (std::vector<int>{0, 1, 2, 3}));
}

TEST_F(EvaluatorsTest, GoldResamplesUnparseable) {
  // Slot 1 fails once and is re-sampled.
  client.register_scripted_backend("judge", {"40", "hmm", "60"});
  GoldSpec gold{{member("judge")}, 2, 2};
  const GoldRating r = gold_rate_detailed(gold, sample, "resp", ctx);
  EXPECT_DOUBLE_EQ(r.score.value(), 50.0);
  EXPECT_EQ(r.completions, 3);
  EXPECT_EQ(r.failed, 0);
}

TEST_F(EvaluatorsTest, GoldToleratesMinorityFailures) {
  client.register_scripted_backend("judge", {"40", "x", "x", "x", "60"});
  GoldSpec gold{{member("judge")}, 3, 2};
  const GoldRating r = gold_rate_detailed(gold, sample, "resp", ctx);
  EXPECT_EQ(r.failed, 1);
  EXPECT_DOUBLE_EQ(r.score.value(), 50.0);
}

TEST_F(EvaluatorsTest, GoldUnavailableWhenMostFail) {
  client.register_scripted_backend("judge", std::vector<std::string>(20, "cannot say"));
  GoldSpec gold{{member("judge")}, 4, 1};
  try {
    gold_rate(gold, sample, "resp", ctx);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGoldUnavailable);
  }
}

TEST_F(EvaluatorsTest, GoldMeanWithinRatingRange) {
  std::vector<std::string> script;
  for (int i = 0; i < 8; ++i) script.push_back("33.3");
  client.register_scripted_backend("judge", script);
  GoldSpec gold{{member("judge")}, 8, 0};
  EXPECT_EQ(gold_rate(gold, sample, "resp", ctx).value(), 33.3);
}

TEST(GoldSpecTest, Validation) {
  EXPECT_FALSE(validate_gold_spec(GoldSpec{}).empty());
  GoldSpec ok{{member("x")}, 8, 2};
  EXPECT_TRUE(validate_gold_spec(ok).empty());
  ok.samples_k = 0;
  EXPECT_FALSE(validate_gold_spec(ok).empty());
}

class RemoteVictimTest : public EvaluatorsTest {
 protected:
  testing::StubScoreServer server;
};

TEST_F(RemoteVictimTest, ProtocolFixtures) {
  std::ifstream in(std::string(ADVFORGE_FIXTURE_DIR) + "/protocol/score_cases.json");
  const json cases = json::parse(in);
  int checked = 0;
  for (const auto& c : cases) {
    if (c.contains("raw_body") || !c.at("body").contains("response") ||
        !c.at("body").at("response").is_string()) {
      continue;  // Bodies the adapter cannot produce; covered by the raw test below.
    }
    const json& body = c.at("body");
    EvalSample s;
    s.id = c.at("name");
    s.task = parse_task_kind(body.at("task").get<std::string>());
    s.context = body.at("context");
    s.response = body.at("response");
    if (!body.at("reference").is_null()) s.reference = body.at("reference").get<std::string>();
    EvaluatorSpec spec{"remote", RemoteHttpSpec{server.url() + c.at("query").get<std::string>(), 5}};
    const int status = c.at("status");
    if (status == 200) {
      EXPECT_DOUBLE_EQ(evaluate(spec, s, s.response, ctx).value(), c.at("score").get<double>())
          << s.id;
    } else {
      try {
        evaluate(spec, s, s.response, ctx);
        ADD_FAILURE() << s.id;
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kEvaluator) << s.id;
        EXPECT_NE(std::string(e.what()).find(std::to_string(status)), std::string::npos) << s.id;
      }
    }
    ++checked;
  }
  EXPECT_GE(checked, 7);
}

TEST_F(RemoteVictimTest, StubAnswersEveryFixtureStatus) {
  std::ifstream in(std::string(ADVFORGE_FIXTURE_DIR) + "/protocol/score_cases.json");
  const json cases = json::parse(in);
  httplib::Client http("127.0.0.1", server.port());
  for (const auto& c : cases) {
    const std::string body = c.contains("raw_body") ? c.at("raw_body").get<std::string>()
                                                    : c.at("body").dump();
    auto res = http.Post("/v1/score" + c.at("query").get<std::string>(), body, "application/json");
    ASSERT_TRUE(res) << c.at("name");
    EXPECT_EQ(res->status, c.at("status").get<int>()) << c.at("name");
    if (res->status == 200) {
      const double score = json::parse(res->body).at("score");
      EXPECT_GE(score, 0.0);
      EXPECT_LE(score, 100.0);
    }
  }
}

TEST_F(EvaluatorsTest, RemoteUnreachableIsTransport) {
  int port;
  {
    testing::StubScoreServer gone;
    port = gone.port();
  }
  EvaluatorSpec spec{"remote", RemoteHttpSpec{"http://127.0.0.1:" + std::to_string(port), 2}};
  try {
    evaluate(spec, sample, "x", ctx);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransport);
  }
}

TEST(ScoreRequestJsonTest, NullReference) {
  const json j = json::parse(score_request_json({"c", "r", std::nullopt, "dialogue"}));
  EXPECT_TRUE(j.at("reference").is_null());
  EXPECT_EQ(j.at("context"), "c");
  EXPECT_EQ(j.at("response"), "r");
  EXPECT_EQ(j.at("task"), "dialogue");
}

}  // namespace
}  // namespace advforge
