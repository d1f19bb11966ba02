#include "advforge/http_transport.h"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

namespace advforge {

using json = nlohmann::json;

ParsedUrl parse_base_url(const std::string& full) {
  std::string url = full;
  std::string query;
  if (const std::size_t q = url.find('?'); q != std::string::npos) {
    query = url.substr(q);
    url.resize(q);
  }
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidInput, "url needs a scheme: " + url);
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  ParsedUrl parsed;
  parsed.origin = url.substr(0, path_start);
  parsed.query = query;
  if (path_start != std::string::npos) {
    parsed.path_prefix = url.substr(path_start);
    while (!parsed.path_prefix.empty() && parsed.path_prefix.back() == '/') {
      parsed.path_prefix.pop_back();
    }
  }
  return parsed;
}

namespace {

httplib::Client make_client(const ParsedUrl& url, std::chrono::seconds timeout) {
  httplib::Client client(url.origin);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  return client;
}

}  // namespace

ChatCompletionsBackend::ChatCompletionsBackend(HttpEndpointConfig config)
    : config_(std::move(config)) {}

std::string ChatCompletionsBackend::complete(const CompletionRequest& request) {
  const ParsedUrl url = parse_base_url(config_.base_url);
  auto client = make_client(url, config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const json body = {
      {"model", request.model},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
      {"n", 1},
  };
  auto res = client.Post(url.path_prefix + "/v1/chat/completions", headers, body.dump(),
                         "application/json");
  if (!res) {
    throw Error(ErrorCode::kTransport,
                "chat completion request failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw Error(ErrorCode::kTransport, "chat completion HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kEvaluator, "chat completion HTTP " + std::to_string(res->status) +
                                           ": " + res->body.substr(0, 200));
  }
  try {
    const json parsed = json::parse(res->body);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kEvaluator, std::string("malformed chat completion body: ") + e.what());
  }
}

std::string score_request_json(const ScoreRequest& request) {
  json body = {{"context", request.context},
               {"response", request.response},
               {"reference", nullptr},
               {"task", request.task}};
  if (request.reference) body["reference"] = *request.reference;
  return body.dump();
}

double post_score(const std::string& base_url, const ScoreRequest& request,
                  std::chrono::seconds timeout) {
  const ParsedUrl url = parse_base_url(base_url);
  auto client = make_client(url, timeout);
  auto res = client.Post(url.path_prefix + "/v1/score" + url.query, score_request_json(request),
                         "application/json");
  if (!res) {
    throw Error(ErrorCode::kTransport, "score request failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 422) {
    throw Error(ErrorCode::kEvaluator, "score endpoint rejected input (422): " + res->body);
  }
  if (res->status == 404) {
    throw Error(ErrorCode::kEvaluator, "score endpoint does not know this scorer (404)");
  }
  if (res->status == 503) {
    throw Error(ErrorCode::kEvaluator, "score endpoint model unavailable (503)");
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kEvaluator, "score endpoint HTTP " + std::to_string(res->status));
  }
  try {
    const json parsed = json::parse(res->body);
    const json& score = parsed.at("score");
    if (!score.is_number()) throw Error(ErrorCode::kEvaluator, "score field is not a number");
    return score.get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kEvaluator, std::string("malformed score body: ") + e.what());
  }
}

}  // namespace advforge
