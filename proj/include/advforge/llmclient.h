// Chat-completion access for the generator and LLM-prompted evaluators.
//
// LlmClient routes each request to a registered backend, applies per-endpoint
// rate limiting and bounded retries, and memoizes results in a
// content-addressed cache (in memory, and on disk when a directory is given).
// It is the only component that talks to completion endpoints.

#ifndef ADVFORGE_LLMCLIENT_H_
#define ADVFORGE_LLMCLIENT_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advforge/core.h"

namespace advforge {

struct CompletionRequest {
  std::string endpoint_id;
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 256;
  // Distinguishes repeated stochastic samples of the same prompt.
  int sample_index = 0;

  // Hex SHA-256 over every field.
  std::string cache_key() const;
};

struct CompletionResult {
  std::string text;  // verbatim model output
  bool cached = false;
  std::int64_t latency_ms = 0;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  // Throws Error(kTransport) for failures worth retrying.
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual bool uses_network() const { return false; }
};

// Pops responses in order. Throws kScriptExhausted once empty.
class ScriptedBackend : public CompletionBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> script);
  std::string complete(const CompletionRequest& request) override;
  std::size_t remaining() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> script_;
};

class FunctionBackend : public CompletionBackend {
 public:
  using Fn = std::function<std::string(const CompletionRequest&)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const CompletionRequest& request) override { return fn_(request); }

 private:
  Fn fn_;
};

// Caller-owned ceiling on the number of complete() calls.
class CallBudget {
 public:
  explicit CallBudget(std::int64_t limit) : limit_(limit) {}
  // Throws kBudgetExceeded when depleted.
  void consume();
  std::int64_t used() const { return used_.load(); }
  std::int64_t limit() const { return limit_; }

 private:
  std::int64_t limit_;
  std::atomic<std::int64_t> used_{0};
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1000};
};

struct EndpointOptions {
  // Requests per second; 0 disables limiting.
  double rate_limit_rps = 0.0;
};

class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

  std::optional<std::string> lookup(const std::string& key);
  // Disk entries are written to a temp file and renamed into place.
  void store(const std::string& key, const std::string& text);

  const std::optional<std::filesystem::path>& dir() const { return dir_; }
  std::filesystem::path entry_path(const std::string& key) const;

 private:
  std::optional<std::filesystem::path> dir_;
  std::mutex mu_;
  std::map<std::string, std::string> memory_;
};

class LlmClient {
 public:
  explicit LlmClient(std::optional<std::filesystem::path> cache_dir = std::nullopt,
                     RetryPolicy retry = {});
  ~LlmClient();

  LlmClient(const LlmClient&) = delete;
  LlmClient& operator=(const LlmClient&) = delete;

  // Throws kDuplicateEndpoint if endpoint_id is taken.
  void register_backend(std::string endpoint_id, std::unique_ptr<CompletionBackend> backend,
                        EndpointOptions options = {});
  void register_scripted_backend(std::string endpoint_id, std::vector<std::string> script);
  bool has_endpoint(std::string_view endpoint_id) const;

  CompletionResult complete(const CompletionRequest& request, CallBudget* budget = nullptr);

  // Requests that reached a network-backed transport, including retries.
  std::uint64_t network_calls() const { return network_calls_.load(); }
  // Backend invocations (cache misses) for one endpoint, including retries.
  std::uint64_t backend_calls(std::string_view endpoint_id) const;
  std::uint64_t cache_hits() const { return cache_hits_.load(); }

  ResponseCache& cache() { return cache_; }

 private:
  struct Endpoint;
  Endpoint& endpoint(std::string_view endpoint_id) const;
  void wait_for_slot(Endpoint& ep);

  ResponseCache cache_;
  RetryPolicy retry_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Endpoint>, std::less<>> endpoints_;
  std::atomic<std::uint64_t> network_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
};

std::string sha256_hex(std::string_view data);

}  // namespace advforge

#endif  // ADVFORGE_LLMCLIENT_H_
