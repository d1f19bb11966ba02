#include "advforge/llmclient.h"

#include <openssl/sha.h>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <thread>

#include "advforge/prompt_library.h"
#include "json.hpp"

namespace advforge {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char byte : digest) {
    out.push_back(kHex[byte >> 4]);
    out.push_back(kHex[byte & 0xF]);
  }
  return out;
}

std::string CompletionRequest::cache_key() const {
  char temp[32];
  std::snprintf(temp, sizeof(temp), "%.17g", temperature);
  const json fields = json::array({endpoint_id, model, prompt, temp, max_tokens, sample_index});
  return sha256_hex(fields.dump());
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> script)
    : script_(script.begin(), script.end()) {}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  std::lock_guard lock(mu_);
  if (script_.empty()) {
    throw Error(ErrorCode::kScriptExhausted,
                "scripted endpoint '" + request.endpoint_id + "' has no responses left");
  }
  std::string next = std::move(script_.front());
  script_.pop_front();
  return next;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return script_.size();
}

void CallBudget::consume() {
  std::int64_t current = used_.load();
  do {
    if (current >= limit_) {
      throw Error(ErrorCode::kBudgetExceeded,
                  "call budget of " + std::to_string(limit_) + " exhausted");
    }
  } while (!used_.compare_exchange_weak(current, current + 1));
}

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
  return *dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) {
  {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (!dir_) return std::nullopt;
  const auto path = entry_path(key);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  try {
    const json entry = json::parse(read_text_file(path));
    if (entry.value("key", "") != key) return std::nullopt;
    std::string text = entry.at("text").get<std::string>();
    std::lock_guard lock(mu_);
    memory_.emplace(key, text);
    return text;
  } catch (const std::exception&) {
    // Truncated or foreign file: treat as a miss and let store() replace it.
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const std::string& text) {
  {
    std::lock_guard lock(mu_);
    memory_[key] = text;
  }
  if (!dir_) return;
  const auto path = entry_path(key);
  std::filesystem::create_directories(path.parent_path());
  const json entry = {{"key", key}, {"text", text},
                      {"timestamp", static_cast<std::int64_t>(std::time(nullptr))}};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write cache entry " + tmp.string());
    out << entry.dump();
  }
  std::filesystem::rename(tmp, path);
}

struct LlmClient::Endpoint {
  std::unique_ptr<CompletionBackend> backend;
  EndpointOptions options;
  std::mutex slot_mu;
  Clock::time_point next_slot{};
  std::atomic<std::uint64_t> calls{0};
};

LlmClient::LlmClient(std::optional<std::filesystem::path> cache_dir, RetryPolicy retry)
    : cache_(std::move(cache_dir)), retry_(retry) {}

LlmClient::~LlmClient() = default;

void LlmClient::register_backend(std::string endpoint_id,
                                 std::unique_ptr<CompletionBackend> backend,
                                 EndpointOptions options) {
  std::lock_guard lock(mu_);
  if (endpoints_.count(endpoint_id)) {
    throw Error(ErrorCode::kDuplicateEndpoint,
                "endpoint '" + endpoint_id + "' is already registered");
  }
  auto ep = std::make_unique<Endpoint>();
  ep->backend = std::move(backend);
  ep->options = options;
  endpoints_.emplace(std::move(endpoint_id), std::move(ep));
}

void LlmClient::register_scripted_backend(std::string endpoint_id,
                                          std::vector<std::string> script) {
  register_backend(std::move(endpoint_id), std::make_unique<ScriptedBackend>(std::move(script)));
}

bool LlmClient::has_endpoint(std::string_view endpoint_id) const {
  std::lock_guard lock(mu_);
  return endpoints_.find(endpoint_id) != endpoints_.end();
}

LlmClient::Endpoint& LlmClient::endpoint(std::string_view endpoint_id) const {
  std::lock_guard lock(mu_);
  auto it = endpoints_.find(endpoint_id);
  if (it == endpoints_.end()) {
    throw Error(ErrorCode::kEndpointUnknown,
                "endpoint '" + std::string(endpoint_id) + "' is not registered");
  }
  return *it->second;
}

std::uint64_t LlmClient::backend_calls(std::string_view endpoint_id) const {
  return endpoint(endpoint_id).calls.load();
}

void LlmClient::wait_for_slot(Endpoint& ep) {
  if (ep.options.rate_limit_rps <= 0.0) return;
  const auto interval = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(1.0 / ep.options.rate_limit_rps));
  Clock::time_point slot;
  {
    std::lock_guard lock(ep.slot_mu);
    slot = std::max(Clock::now(), ep.next_slot);
    ep.next_slot = slot + interval;
  }
  std::this_thread::sleep_until(slot);
}

CompletionResult LlmClient::complete(const CompletionRequest& request, CallBudget* budget) {
  Endpoint& ep = endpoint(request.endpoint_id);
  if (budget) budget->consume();

  const auto start = Clock::now();
  const std::string key = request.cache_key();
  if (auto hit = cache_.lookup(key)) {
    cache_hits_.fetch_add(1);
    return {*std::move(hit), true, 0};
  }

  auto backoff = retry_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    wait_for_slot(ep);
    ep.calls.fetch_add(1);
    if (ep.backend->uses_network()) network_calls_.fetch_add(1);
    try {
      std::string text = ep.backend->complete(request);
      cache_.store(key, text);
      const auto elapsed =
          std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
      return {std::move(text), false, elapsed.count()};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTransport) throw;
      if (attempt >= retry_.max_retries) {
        throw Error(ErrorCode::kTransport,
                    "endpoint '" + request.endpoint_id + "' failed after " +
                        std::to_string(attempt + 1) + " attempts: " + e.what());
      }
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace advforge
