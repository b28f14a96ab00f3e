#include "pomaudit/gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "pomaudit/errors.hpp"
#include "pomaudit/io_util.hpp"
#include "pomaudit/sha256.hpp"
#include "pomaudit/text_util.hpp"

namespace pomaudit {

namespace {

using nlohmann::json;

constexpr size_t kBodyExcerptChars = 200;
constexpr time_t kConnectTimeoutSec = 15;
constexpr time_t kReadTimeoutSec = 300;

std::string excerpt(const std::string& body) {
  if (body.size() <= kBodyExcerptChars) return body;
  return body.substr(0, kBodyExcerptChars) + "...";
}

bool transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

bool contains_all(const std::string& haystack, const std::vector<std::string>& needles) {
  return std::all_of(needles.begin(), needles.end(), [&](const std::string& n) {
    return haystack.find(n) != std::string::npos;
  });
}

// Live chat-completion dialects. openai_compatible sends the system turn
// inside the messages array; anthropic_compatible sends it as a top-level
// field. Payload shapes are documented in docs/wire_formats.md.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderId id) : id_(id) {}

  ProviderResult attempt(const ModelSpec& spec, const ChatExchange& exchange) override {
    const std::string env_var = Gateway::credential_env_var(id_);
    const char* key = std::getenv(env_var.c_str());
    if (key == nullptr || *key == '\0') throw AuthMissing(env_var);

    json payload;
    std::string path;
    httplib::Headers headers;
    if (id_ == ProviderId::openai_compatible) {
      path = "/v1/chat/completions";
      payload = {{"model", spec.model_name},
                 {"messages",
                  {{{"role", "system"}, {"content", exchange.system_text}},
                   {{"role", "user"}, {"content", exchange.user_text}}}},
                 {"temperature", exchange.params.temperature},
                 {"top_p", exchange.params.top_p},
                 {"max_tokens", exchange.params.max_output_tokens}};
      headers.emplace("Authorization", std::string("Bearer ") + key);
    } else {
      path = "/v1/messages";
      payload = {{"model", spec.model_name},
                 {"system", exchange.system_text},
                 {"messages", {{{"role", "user"}, {"content", exchange.user_text}}}},
                 {"temperature", exchange.params.temperature},
                 {"top_p", exchange.params.top_p},
                 {"max_tokens", exchange.params.max_output_tokens}};
      headers.emplace("x-api-key", key);
      headers.emplace("anthropic-version", "2023-06-01");
    }

    const std::string base = spec.base_url.value_or(
        id_ == ProviderId::openai_compatible ? "https://api.openai.com" : "https://api.anthropic.com");

    httplib::Client client(base);
    client.set_connection_timeout(kConnectTimeoutSec, 0);
    client.set_read_timeout(kReadTimeoutSec, 0);
    client.set_write_timeout(kConnectTimeoutSec, 0);

    auto res = client.Post(path, headers, payload.dump(), "application/json");

    ProviderResult out;
    if (!res) {
      out.transient = true;
      out.body_excerpt = "transport error: " + httplib::to_string(res.error());
      return out;
    }
    out.http_status = res->status;
    if (res->status < 200 || res->status >= 300) {
      out.transient = transient_status(res->status);
      out.body_excerpt = excerpt(res->body);
      return out;
    }

    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) {
      out.body_excerpt = "unparseable provider response: " + excerpt(res->body);
      return out;
    }
    try {
      if (id_ == ProviderId::openai_compatible) {
        out.text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        if (parsed.contains("usage")) {
          TokenUsage usage;
          usage.prompt_tokens = parsed["usage"].value("prompt_tokens", 0LL);
          usage.completion_tokens = parsed["usage"].value("completion_tokens", 0LL);
          out.usage = usage;
        }
      } else {
        out.text = parsed.at("content").at(0).at("text").get<std::string>();
        if (parsed.contains("usage")) {
          TokenUsage usage;
          usage.prompt_tokens = parsed["usage"].value("input_tokens", 0LL);
          usage.completion_tokens = parsed["usage"].value("output_tokens", 0LL);
          out.usage = usage;
        }
      }
    } catch (const json::exception& ex) {
      out.body_excerpt = std::string("unexpected response shape: ") + ex.what();
      return out;
    }
    out.ok = true;
    return out;
  }

 private:
  ProviderId id_;
};

}  // namespace

// ---------------------------------------------------------------------------
// MockProvider

bool MockProvider::Rule::matches(const ModelSpec& spec, const ChatExchange& exchange) const {
  if (model && *model != spec.model_name) return false;
  if (run_index && *run_index != exchange.run_index) return false;
  if (!contains_all(exchange.system_text, system_contains)) return false;
  if (!contains_all(exchange.user_text, user_contains)) return false;
  return true;
}

MockProvider::MockProvider(std::filesystem::path fixture_dir) : fixture_dir_(std::move(fixture_dir)) {
  const auto script = fixture_dir_ / "script.json";
  if (!std::filesystem::exists(script)) return;
  json doc = json::parse(read_text_file(script));
  for (const auto& entry : doc.at("rules")) {
    Rule rule;
    if (entry.contains("model")) rule.model = entry.at("model").get<std::string>();
    if (entry.contains("run_index")) rule.run_index = entry.at("run_index").get<int>();
    if (entry.contains("system_contains")) {
      rule.system_contains = entry.at("system_contains").get<std::vector<std::string>>();
    }
    if (entry.contains("user_contains")) {
      rule.user_contains = entry.at("user_contains").get<std::vector<std::string>>();
    }
    if (entry.contains("response_text")) {
      rule.response_text = entry.at("response_text").get<std::string>();
    } else if (entry.contains("response_json")) {
      rule.response_text = entry.at("response_json").dump();
    } else {
      throw ConfigError("mock script rule needs response_text or response_json: " + script.string());
    }
    rules_.push_back(std::move(rule));
  }
}

std::string MockProvider::fixture_key(const std::string& model_name, const std::string& system_text,
                                      const std::string& user_text, int run_index) {
  json canonical{{"model", model_name},
                 {"system", system_text},
                 {"user", user_text},
                 {"run_index", run_index}};
  return sha256_hex(canonical.dump());
}

void MockProvider::register_response(const std::string& model_name, const std::string& system_text,
                                     const std::string& user_text, int run_index,
                                     const std::string& text) {
  std::lock_guard lock(mutex_);
  responses_[fixture_key(model_name, system_text, user_text, run_index)] = text;
}

void MockProvider::register_rule(Rule rule) {
  std::lock_guard lock(mutex_);
  rules_.push_back(std::move(rule));
}

ProviderResult MockProvider::attempt(const ModelSpec& spec, const ChatExchange& exchange) {
  const std::string key =
      fixture_key(spec.model_name, exchange.system_text, exchange.user_text, exchange.run_index);
  std::lock_guard lock(mutex_);
  ++call_count_;
  recorded_.push_back({spec.model_name, exchange.system_text, exchange.user_text, exchange.params,
                       exchange.run_index});

  ProviderResult out;
  if (auto it = responses_.find(key); it != responses_.end()) {
    out.ok = true;
    out.text = it->second;
    return out;
  }
  if (!fixture_dir_.empty()) {
    const auto file = fixture_dir_ / (key + ".txt");
    if (std::filesystem::exists(file)) {
      out.ok = true;
      out.text = read_text_file(file);
      return out;
    }
  }
  for (const auto& rule : rules_) {
    if (rule.matches(spec, exchange)) {
      out.ok = true;
      out.text = rule.response_text;
      return out;
    }
  }
  out.body_excerpt = "no mock fixture for model=" + spec.model_name +
                     " run=" + std::to_string(exchange.run_index) + " key=" + key;
  return out;
}

long long MockProvider::call_count() const {
  std::lock_guard lock(mutex_);
  return call_count_;
}

std::vector<MockProvider::RecordedCall> MockProvider::recorded_calls() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

// ---------------------------------------------------------------------------
// ResponseCache

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  const auto path = path_for(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  json doc = json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.contains("response")) return std::nullopt;
  return doc.at("response").get<std::string>();
}

void ResponseCache::store(const std::string& key, const nlohmann::json& canonical_request,
                          const std::string& response_text) {
  json doc{{"key", key}, {"request", canonical_request}, {"response", response_text}};
  std::lock_guard lock(write_mutex_);
  write_text_file(path_for(key), doc.dump(2) + "\n");
}

ResponseCache::Stats ResponseCache::stats() const {
  Stats stats;
  if (!std::filesystem::exists(dir_)) return stats;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      ++stats.entries;
      stats.bytes += entry.file_size();
    }
  }
  return stats;
}

size_t ResponseCache::clear() {
  Stats before = stats();
  std::filesystem::remove_all(dir_);
  return before.entries;
}

// ---------------------------------------------------------------------------
// TokenBucket

TokenBucket::TokenBucket(double rate, double burst)
    : rate_(rate),
      burst_(std::max(burst, 1.0)),
      tokens_(std::max(burst, 1.0)),
      now_([] { return Clock::now(); }),
      sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  last_refill_ = now_();
}

void TokenBucket::set_time_source(std::function<Clock::time_point()> now,
                                  std::function<void(std::chrono::milliseconds)> sleep) {
  std::lock_guard lock(mutex_);
  now_ = std::move(now);
  sleep_ = std::move(sleep);
  last_refill_ = now_();
}

void TokenBucket::acquire() {
  if (rate_ <= 0) return;
  while (true) {
    std::chrono::milliseconds wait{0};
    {
      std::lock_guard lock(mutex_);
      const auto now = now_();
      const double elapsed = std::chrono::duration<double>(now - last_refill_).count();
      tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
      last_refill_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::milliseconds(
          static_cast<long long>(std::max(1.0, (1.0 - tokens_) / rate_ * 1000.0)));
    }
    sleep_(wait);
  }
}

// ---------------------------------------------------------------------------
// RetryPolicy

std::chrono::milliseconds RetryPolicy::delay_for_attempt(int completed_attempts) const {
  double delay = static_cast<double>(initial_delay.count());
  for (int i = 1; i < completed_attempts; ++i) delay *= multiplier;
  delay = std::min(delay, static_cast<double>(max_delay.count()));
  return std::chrono::milliseconds(static_cast<long long>(delay));
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(GatewayOptions options) : options_(std::move(options)), cache_(options_.cache_dir) {
  if (!options_.sleep_fn) {
    options_.sleep_fn = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  providers_[ProviderId::openai_compatible] = std::make_unique<HttpProvider>(ProviderId::openai_compatible);
  providers_[ProviderId::anthropic_compatible] =
      std::make_unique<HttpProvider>(ProviderId::anthropic_compatible);
  providers_[ProviderId::mock] = options_.mock_fixtures.empty()
                                     ? std::make_unique<MockProvider>()
                                     : std::make_unique<MockProvider>(options_.mock_fixtures);
  limiters_[ProviderId::openai_compatible] =
      std::make_unique<TokenBucket>(options_.requests_per_second, options_.requests_per_second);
  limiters_[ProviderId::anthropic_compatible] =
      std::make_unique<TokenBucket>(options_.requests_per_second, options_.requests_per_second);
}

std::string Gateway::credential_env_var(ProviderId id) {
  switch (id) {
    case ProviderId::openai_compatible: return "OPENAI_API_KEY";
    case ProviderId::anthropic_compatible: return "ANTHROPIC_API_KEY";
    case ProviderId::mock: return "";
  }
  return "";
}

nlohmann::json Gateway::canonical_request(const ModelSpec& spec, const std::string& system_text,
                                          const std::string& user_text, const RoleParams& params,
                                          int run_index) {
  // Key order is irrelevant: nlohmann::json objects serialize sorted by key,
  // which is what makes this serialization canonical.
  return json{{"model",
               {{"provider", to_string(spec.provider)},
                {"name", spec.model_name},
                {"context_window", spec.context_window},
                {"max_output_tokens", spec.max_output_tokens}}},
              {"params",
               {{"temperature", params.temperature},
                {"top_p", params.top_p},
                {"max_output_tokens", params.max_output_tokens}}},
              {"system", system_text},
              {"user", user_text},
              {"run_index", run_index}};
}

std::string Gateway::cache_key(const ModelSpec& spec, const std::string& system_text,
                               const std::string& user_text, const RoleParams& params,
                               int run_index) {
  return sha256_hex(canonical_request(spec, system_text, user_text, params, run_index).dump());
}

Provider& Gateway::provider_for(ProviderId id) { return *providers_.at(id); }

TokenBucket* Gateway::limiter_for(ProviderId id) {
  auto it = limiters_.find(id);
  return it == limiters_.end() ? nullptr : it->second.get();
}

MockProvider& Gateway::mock() {
  return static_cast<MockProvider&>(*providers_.at(ProviderId::mock));
}

void Gateway::set_provider(ProviderId id, std::unique_ptr<Provider> provider) {
  providers_[id] = std::move(provider);
}

long long Gateway::dispatch_count() const {
  std::lock_guard lock(mutex_);
  return dispatch_count_;
}

std::string Gateway::complete(const ModelSpec& spec, const std::string& system_text,
                              const std::string& user_text, const RoleParams& params,
                              int run_index) {
  if (system_text.empty() || user_text.empty()) {
    throw PipelineError("refusing to dispatch an empty prompt");
  }
  const long long prompt_tokens = estimate_tokens(system_text, spec.chars_per_token) +
                                  estimate_tokens(user_text, spec.chars_per_token);
  const long long budget = prompt_tokens + params.max_output_tokens;
  if (budget > spec.context_window) throw BudgetExceeded(budget, spec.context_window);

  const std::string key = cache_key(spec, system_text, user_text, params, run_index);
  if (auto hit = cache_.lookup(key)) return *hit;

  ChatExchange exchange;
  exchange.system_text = system_text;
  exchange.user_text = user_text;
  exchange.params = params;
  exchange.run_index = run_index;

  Provider& provider = provider_for(spec.provider);
  TokenBucket* limiter = spec.provider == ProviderId::mock ? nullptr : limiter_for(spec.provider);

  ProviderResult last;
  for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
    if (limiter != nullptr) limiter->acquire();
    {
      std::lock_guard lock(mutex_);
      ++dispatch_count_;
    }
    last = provider.attempt(spec, exchange);
    if (last.ok) {
      cache_.store(key, canonical_request(spec, system_text, user_text, params, run_index),
                   last.text);
      return last.text;
    }
    if (!last.transient || attempt == options_.retry.max_attempts) break;
    options_.sleep_fn(options_.retry.delay_for_attempt(attempt));
  }
  throw ProviderError("provider call failed for " + spec.model_name, last.http_status,
                      last.body_excerpt);
}

}  // namespace pomaudit
