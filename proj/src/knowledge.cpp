#include "pomaudit/knowledge.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "pomaudit/errors.hpp"
#include "pomaudit/extraction.hpp"
#include "pomaudit/io_util.hpp"
#include "pomaudit/text_util.hpp"

namespace pomaudit {

namespace {

constexpr const char* kSynthesizerSystem =
    "You are a blockchain researcher. You are good at creating precise, comprehensive problem "
    "definitions.";

constexpr const char* kSynthesizerUserPrefix =
    "You are given descriptions of the price oracle manipulation problem from top academic "
    "conference papers, delimited by triple backticks ```. Your task is to analyze these "
    "descriptions and provide a concise, unified definition of the price oracle manipulation "
    "problem. ```";

constexpr const char* kSynthesizerUserSuffix =
    "```. Return the definition in the JSON format: {\"definition\": \"<unified definition>\"}.";

KnowledgeExcerpt parse_excerpt_file(const std::filesystem::path& file) {
  const std::string content = read_text_file(file);
  std::istringstream in(content);
  std::string line;

  KnowledgeExcerpt excerpt;
  if (!std::getline(in, line) || line.rfind("source_id:", 0) != 0) {
    throw MalformedExcerpt(file.string(), 1, "expected 'source_id: <key>' header");
  }
  excerpt.source_id = trim(line.substr(10));
  if (excerpt.source_id.empty()) {
    throw MalformedExcerpt(file.string(), 1, "source_id must be non-empty");
  }
  if (!std::getline(in, line) || line.rfind("venue:", 0) != 0) {
    throw MalformedExcerpt(file.string(), 2, "expected 'venue: <name>' header");
  }
  excerpt.venue = trim(line.substr(6));
  if (!std::getline(in, line) || !trim(line).empty()) {
    throw MalformedExcerpt(file.string(), 3, "expected blank line after headers");
  }
  std::ostringstream body;
  body << in.rdbuf();
  excerpt.excerpt_text = trim(body.str());
  if (excerpt.excerpt_text.empty()) {
    throw MalformedExcerpt(file.string(), 4, "excerpt body must be non-empty");
  }
  return excerpt;
}

}  // namespace

std::string to_string(KnowledgeOrigin origin) {
  return origin == KnowledgeOrigin::llm_synthesized ? "llm_synthesized" : "human_curated";
}

KnowledgeOrigin knowledge_origin_from_string(const std::string& name) {
  if (name == "llm_synthesized") return KnowledgeOrigin::llm_synthesized;
  if (name == "human_curated") return KnowledgeOrigin::human_curated;
  throw ConfigError("unknown knowledge origin: " + name);
}

nlohmann::json SynthesizedKnowledge::to_json() const {
  nlohmann::json j{{"definition", definition_text},
                   {"origin", to_string(origin)},
                   {"source_ids", source_ids}};
  if (synthesizer_model) j["synthesizer_model"] = *synthesizer_model;
  return j;
}

SynthesizedKnowledge SynthesizedKnowledge::from_json(const nlohmann::json& j) {
  SynthesizedKnowledge k;
  k.definition_text = j.at("definition").get<std::string>();
  k.origin = knowledge_origin_from_string(j.at("origin").get<std::string>());
  if (j.contains("source_ids")) k.source_ids = j.at("source_ids").get<std::vector<std::string>>();
  if (j.contains("synthesizer_model")) k.synthesizer_model = j.at("synthesizer_model").get<std::string>();
  return k;
}

std::vector<KnowledgeExcerpt> load_excerpts(const std::filesystem::path& path) {
  if (!std::filesystem::is_directory(path)) {
    throw EmptyKnowledgeSet(path.string());
  }
  std::vector<KnowledgeExcerpt> excerpts;
  std::set<std::string> seen;
  for (const auto& entry : std::filesystem::directory_iterator(path)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    KnowledgeExcerpt excerpt = parse_excerpt_file(entry.path());
    if (!seen.insert(excerpt.source_id).second) {
      throw MalformedExcerpt(entry.path().string(), 1,
                             "duplicate source_id '" + excerpt.source_id + "'");
    }
    excerpts.push_back(std::move(excerpt));
  }
  if (excerpts.empty()) throw EmptyKnowledgeSet(path.string());
  std::sort(excerpts.begin(), excerpts.end(),
            [](const auto& a, const auto& b) { return a.source_id < b.source_id; });
  return excerpts;
}

std::pair<std::string, std::string> assemble_synthesis_prompt(
    const std::vector<KnowledgeExcerpt>& excerpts) {
  if (excerpts.empty()) throw EmptyKnowledgeSet("(in-memory excerpt list)");
  std::string joined;
  for (size_t i = 0; i < excerpts.size(); ++i) {
    if (i > 0) joined += "\n\n";
    joined += excerpts[i].excerpt_text;
  }
  return {kSynthesizerSystem, kSynthesizerUserPrefix + joined + kSynthesizerUserSuffix};
}

SynthesizedKnowledge synthesize_knowledge(const std::vector<KnowledgeExcerpt>& excerpts,
                                          const ModelSpec& spec, Gateway& gateway,
                                          const RoleParams& params) {
  auto [system_text, user_text] = assemble_synthesis_prompt(excerpts);
  const std::string raw = gateway.complete(spec, system_text, user_text, params, /*run_index=*/0);

  Extraction extraction = extract_structured(raw);
  for (const auto& value : extraction.values) {
    if (value.is_object() && value.contains("definition") && value.at("definition").is_string()) {
      const std::string definition = trim(value.at("definition").get<std::string>());
      if (definition.empty()) continue;
      SynthesizedKnowledge knowledge;
      knowledge.definition_text = definition;
      knowledge.origin = KnowledgeOrigin::llm_synthesized;
      knowledge.synthesizer_model = spec.model_name;
      for (const auto& excerpt : excerpts) knowledge.source_ids.push_back(excerpt.source_id);
      return knowledge;
    }
  }
  throw ParseFailure("synthesizer response contains no extractable definition");
}

SynthesizedKnowledge load_human_curated(const std::filesystem::path& file) {
  SynthesizedKnowledge knowledge;
  knowledge.definition_text = trim(read_text_file(file));
  if (knowledge.definition_text.empty()) {
    throw PipelineError("human-curated knowledge file is empty: " + file.string());
  }
  knowledge.origin = KnowledgeOrigin::human_curated;
  return knowledge;
}

}  // namespace pomaudit
