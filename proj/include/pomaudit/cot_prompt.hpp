#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pomaudit/gateway.hpp"
#include "pomaudit/knowledge.hpp"
#include "pomaudit/model_spec.hpp"

namespace pomaudit {

struct CotStep {
  int step_number = 1;
  std::string description;
  std::vector<std::string> questions;
};

// Canonical structured form of the generated audit prompt. Step numbers are
// always exactly 1..n in order; render_cot_prompt defines the single text
// layout the auditor sees.
struct CotPrompt {
  std::string description;
  std::vector<CotStep> steps;
  std::string generator_model;
  KnowledgeOrigin knowledge_origin = KnowledgeOrigin::llm_synthesized;

  nlohmann::json to_json() const;
  static CotPrompt from_json(const nlohmann::json& j);
};

// (system_text, user_text) for the generator role. Pure.
std::pair<std::string, std::string> assemble_generation_prompt(const SynthesizedKnowledge& knowledge);

CotPrompt generate_cot_prompt(const SynthesizedKnowledge& knowledge, const ModelSpec& spec,
                              Gateway& gateway,
                              const RoleParams& params = default_params(Role::generator));

// Deterministic text rendering: description line, then each step as
// "Step <n>: <description>" with its questions as lettered sub-items.
std::string render_cot_prompt(const CotPrompt& prompt);

// Sub-item label sequence: a, b, ..., z, aa, ab, ...
std::string question_label(size_t index);

}  // namespace pomaudit
