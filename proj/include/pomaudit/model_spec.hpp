#pragma once

#include <optional>
#include <string>

#include "json.hpp"

namespace pomaudit {

enum class ProviderId { openai_compatible, anthropic_compatible, mock };

std::string to_string(ProviderId provider);
ProviderId provider_from_string(const std::string& name);

enum class Role { synthesizer, generator, auditor };

std::string to_string(Role role);

struct ModelSpec {
  ProviderId provider = ProviderId::mock;
  std::string model_name;
  long long context_window = 128000;
  long long max_output_tokens = 4096;
  // Conservative provider-independent token estimate: ceil(chars / chars_per_token).
  double chars_per_token = 4.0;
  // Overrides the provider family's default endpoint; used for self-hosted
  // gateways and for exercising the wire dialects against a local server.
  std::optional<std::string> base_url;

  void validate() const;

  nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);
};

struct RoleParams {
  double temperature = 0.0;
  double top_p = 1.0;
  long long max_output_tokens = 1024;

  void validate() const;

  nlohmann::json to_json() const;
  static RoleParams from_json(const nlohmann::json& j);
};

// Synthesizer and generator run deterministic (temperature 0); the auditor
// samples at temperature 1.0. top_p is 1.0 and the output cap 1024 everywhere.
RoleParams default_params(Role role);

struct TokenUsage {
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
};

struct ChatExchange {
  std::string system_text;
  std::string user_text;
  RoleParams params;
  int run_index = 0;
  std::string response_text;
  std::optional<TokenUsage> usage;
};

}  // namespace pomaudit
