#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pomaudit/model_spec.hpp"

namespace pomaudit {

// One provider call attempt. Providers never retry internally; the gateway
// drives the retry loop off `transient`.
struct ProviderResult {
  bool ok = false;
  std::string text;
  std::optional<TokenUsage> usage;
  int http_status = 0;
  std::string body_excerpt;
  bool transient = false;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderResult attempt(const ModelSpec& spec, const ChatExchange& exchange) = 0;
};

// Deterministic provider for tests and offline sweeps. Responses come from
// three layers, checked in order:
//   1. exact registrations keyed by fixture_key(model, system, user, run_index),
//   2. digest files `<fixture_dir>/<key>.txt`,
//   3. substring rules (registered or loaded from `<fixture_dir>/script.json`),
//      first match wins.
// Every call is recorded so tests can assert on the payloads a provider saw.
class MockProvider : public Provider {
 public:
  struct Rule {
    std::optional<std::string> model;
    std::optional<int> run_index;
    std::vector<std::string> system_contains;
    std::vector<std::string> user_contains;
    std::string response_text;

    bool matches(const ModelSpec& spec, const ChatExchange& exchange) const;
  };

  struct RecordedCall {
    std::string model_name;
    std::string system_text;
    std::string user_text;
    RoleParams params;
    int run_index = 0;
  };

  MockProvider() = default;
  explicit MockProvider(std::filesystem::path fixture_dir);

  static std::string fixture_key(const std::string& model_name, const std::string& system_text,
                                 const std::string& user_text, int run_index);

  void register_response(const std::string& model_name, const std::string& system_text,
                         const std::string& user_text, int run_index, const std::string& text);
  void register_rule(Rule rule);

  ProviderResult attempt(const ModelSpec& spec, const ChatExchange& exchange) override;

  long long call_count() const;
  std::vector<RecordedCall> recorded_calls() const;

 private:
  std::filesystem::path fixture_dir_;
  std::map<std::string, std::string> responses_;
  std::vector<Rule> rules_;
  mutable std::mutex mutex_;
  long long call_count_ = 0;
  std::vector<RecordedCall> recorded_;
};

// Content-addressed response cache: one file per key at
// <dir>/<first 2 hex>/<key>.json holding the canonical request and the raw
// response text. Reads are lock-free; writes are serialized and atomic.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const nlohmann::json& canonical_request,
             const std::string& response_text);
  std::filesystem::path path_for(const std::string& key) const;

  struct Stats {
    size_t entries = 0;
    uintmax_t bytes = 0;
  };
  Stats stats() const;
  size_t clear();

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex write_mutex_;
};

// Token bucket: `rate` requests per second with burst capacity `burst`.
// rate <= 0 disables limiting. Clock and sleeper are injectable for tests.
class TokenBucket {
 public:
  using Clock = std::chrono::steady_clock;

  TokenBucket(double rate, double burst);

  void acquire();

  void set_time_source(std::function<Clock::time_point()> now,
                       std::function<void(std::chrono::milliseconds)> sleep);

 private:
  double rate_;
  double burst_;
  double tokens_;
  Clock::time_point last_refill_;
  std::function<Clock::time_point()> now_;
  std::function<void(std::chrono::milliseconds)> sleep_;
  std::mutex mutex_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_delay{250};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{8000};

  std::chrono::milliseconds delay_for_attempt(int completed_attempts) const;
};

struct GatewayOptions {
  std::filesystem::path cache_dir = ".pomaudit-cache";
  RetryPolicy retry;
  double requests_per_second = 2.0;  // per network provider family
  std::filesystem::path mock_fixtures;
  // Sleep hook used by the retry loop; tests substitute a recorder.
  std::function<void(std::chrono::milliseconds)> sleep_fn;
};

// Uniform chat-completion front door. Thread-safe; shared by all audit workers.
class Gateway {
 public:
  explicit Gateway(GatewayOptions options);

  // Returns the assistant message text. Cache hits perform no provider call.
  std::string complete(const ModelSpec& spec, const std::string& system_text,
                       const std::string& user_text, const RoleParams& params, int run_index);

  static nlohmann::json canonical_request(const ModelSpec& spec, const std::string& system_text,
                                          const std::string& user_text, const RoleParams& params,
                                          int run_index);
  static std::string cache_key(const ModelSpec& spec, const std::string& system_text,
                               const std::string& user_text, const RoleParams& params,
                               int run_index);

  long long dispatch_count() const;

  MockProvider& mock();
  ResponseCache& cache() { return cache_; }
  void set_provider(ProviderId id, std::unique_ptr<Provider> provider);

  static std::string credential_env_var(ProviderId id);

 private:
  Provider& provider_for(ProviderId id);
  TokenBucket* limiter_for(ProviderId id);

  GatewayOptions options_;
  ResponseCache cache_;
  std::map<ProviderId, std::unique_ptr<Provider>> providers_;
  std::map<ProviderId, std::unique_ptr<TokenBucket>> limiters_;
  mutable std::mutex mutex_;
  long long dispatch_count_ = 0;
};

}  // namespace pomaudit
