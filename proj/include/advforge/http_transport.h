// HTTP wire protocols: outbound chat completions and the victim score
// endpoint (POST <url>/v1/score).

#ifndef ADVFORGE_HTTP_TRANSPORT_H_
#define ADVFORGE_HTTP_TRANSPORT_H_

#include <chrono>
#include <optional>
#include <string>

#include "advforge/llmclient.h"

namespace advforge {

struct HttpEndpointConfig {
  // Scheme, host, optional port and optional path prefix,
  // e.g. "https://api.example.com" or "http://127.0.0.1:8000/proxy".
  std::string base_url;
  // Name of the environment variable holding the bearer token; may be empty.
  std::string api_key_env;
  std::chrono::seconds timeout{120};
};

// POSTs {model, messages:[{role:user, content:prompt}], temperature,
// max_tokens, n:1} to <base_url>/v1/chat/completions and returns
// choices[0].message.content.
class ChatCompletionsBackend : public CompletionBackend {
 public:
  explicit ChatCompletionsBackend(HttpEndpointConfig config);
  std::string complete(const CompletionRequest& request) override;
  bool uses_network() const override { return true; }

 private:
  HttpEndpointConfig config_;
};

struct ScoreRequest {
  std::string context;
  std::string response;
  std::optional<std::string> reference;
  std::string task;
};

std::string score_request_json(const ScoreRequest& request);

// Sends one scoring request to <base_url>/v1/score and returns the raw
// "score" field. A query string on base_url is kept, so
// "http://host:8811?scorer=x" posts to /v1/score?scorer=x. Connection
// failures raise kTransport; HTTP errors and malformed bodies raise kEvaluator.
double post_score(const std::string& base_url, const ScoreRequest& request,
                  std::chrono::seconds timeout = std::chrono::seconds(60));

struct ParsedUrl {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // "" or "/prefix" without trailing slash
  std::string query;        // "" or "?..." (e.g. "?scorer=bleurt")
};

ParsedUrl parse_base_url(const std::string& url);

}  // namespace advforge

#endif  // ADVFORGE_HTTP_TRANSPORT_H_
