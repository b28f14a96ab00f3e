#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pomaudit/gateway.hpp"
#include "pomaudit/model_spec.hpp"

namespace pomaudit {

// One curated literature excerpt. File format (UTF-8):
//   line 1: source_id: <citation key>
//   line 2: venue: <venue name>
//   line 3: blank
//   rest:   excerpt body
struct KnowledgeExcerpt {
  std::string source_id;
  std::string venue;
  std::string excerpt_text;
};

enum class KnowledgeOrigin { llm_synthesized, human_curated };

std::string to_string(KnowledgeOrigin origin);
KnowledgeOrigin knowledge_origin_from_string(const std::string& name);

struct SynthesizedKnowledge {
  std::string definition_text;
  KnowledgeOrigin origin = KnowledgeOrigin::llm_synthesized;
  std::optional<std::string> synthesizer_model;
  std::vector<std::string> source_ids;

  nlohmann::json to_json() const;
  static SynthesizedKnowledge from_json(const nlohmann::json& j);
};

// One excerpt per *.txt file under `path`, sorted by source_id.
std::vector<KnowledgeExcerpt> load_excerpts(const std::filesystem::path& path);

// (system_text, user_text) for the synthesizer role. Pure; excerpt bodies are
// concatenated blank-line separated, in input order, inside the backtick
// delimiters.
std::pair<std::string, std::string> assemble_synthesis_prompt(
    const std::vector<KnowledgeExcerpt>& excerpts);

SynthesizedKnowledge synthesize_knowledge(const std::vector<KnowledgeExcerpt>& excerpts,
                                          const ModelSpec& spec, Gateway& gateway,
                                          const RoleParams& params = default_params(Role::synthesizer));

// The bundled expert-written definition; performs no LLM calls.
SynthesizedKnowledge load_human_curated(const std::filesystem::path& file);

}  // namespace pomaudit
