#include "pomaudit/config.hpp"

#include <cctype>

#include "pomaudit/errors.hpp"
#include "pomaudit/io_util.hpp"

namespace pomaudit {

namespace {

using nlohmann::json;

}  // namespace

std::string to_string(KnowledgeMode mode) {
  switch (mode) {
    case KnowledgeMode::llm_synthesized: return "llm_synthesized";
    case KnowledgeMode::human_curated: return "human_curated";
    case KnowledgeMode::none: return "none";
  }
  return "none";
}

KnowledgeMode knowledge_mode_from_string(const std::string& name) {
  if (name == "llm_synthesized") return KnowledgeMode::llm_synthesized;
  if (name == "human_curated") return KnowledgeMode::human_curated;
  if (name == "none" || name == "zero_shot") return KnowledgeMode::none;
  throw ConfigError("unknown knowledge mode: " + name);
}

nlohmann::json SweepMatrix::to_json() const {
  json models_json = json::object();
  for (const auto& [name, spec] : models) models_json[name] = spec.to_json();
  return json{{"mode", to_string(mode)},          {"synthesizers", synthesizers},
              {"generators", generators},         {"auditors", auditors},
              {"models", models_json},            {"projects", projects}};
}

SweepMatrix SweepMatrix::from_json(const nlohmann::json& j) {
  SweepMatrix matrix;
  if (j.contains("mode")) matrix.mode = knowledge_mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("synthesizers")) matrix.synthesizers = j.at("synthesizers").get<std::vector<std::string>>();
  if (j.contains("generators")) matrix.generators = j.at("generators").get<std::vector<std::string>>();
  if (j.contains("auditors")) matrix.auditors = j.at("auditors").get<std::vector<std::string>>();
  for (const auto& [name, spec] : j.at("models").items()) {
    matrix.models[name] = ModelSpec::from_json(spec);
  }
  if (j.contains("projects")) matrix.projects = j.at("projects").get<std::vector<std::string>>();
  return matrix;
}

void PipelineConfig::validate() const {
  auditor.validate();
  synthesizer_params.validate();
  generator_params.validate();
  auditor_params.validate();
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (worker_limit < 1) throw ConfigError("worker_limit must be >= 1");
  if (chars_per_token <= 0) throw ConfigError("chars_per_token must be positive");
  if (knowledge_mode == KnowledgeMode::llm_synthesized && !synthesizer) {
    throw ConfigError("knowledge_mode llm_synthesized requires a synthesizer model");
  }
  if (knowledge_mode != KnowledgeMode::none && !generator) {
    throw ConfigError("cot pipeline modes require a generator model");
  }
  if (synthesizer) synthesizer->validate();
  if (generator) generator->validate();
}

std::string sanitize_path_component(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_') {
      out.push_back(c);
    } else if (c == '/' || c == '\\') {
      out += "__";
    } else {
      out.push_back('_');
    }
  }
  if (out.empty()) out = "_";
  return out;
}

std::string PipelineConfig::config_id() const {
  std::string id = to_string(knowledge_mode);
  id += "_" + (synthesizer ? sanitize_path_component(synthesizer->model_name) : std::string("none"));
  id += "_" + (generator ? sanitize_path_component(generator->model_name) : std::string("none"));
  id += "_" + sanitize_path_component(auditor.model_name);
  return id;
}

nlohmann::json PipelineConfig::to_json() const {
  json j{{"knowledge_mode", to_string(knowledge_mode)},
         {"auditor", auditor.to_json()},
         {"params",
          {{"synthesizer", synthesizer_params.to_json()},
           {"generator", generator_params.to_json()},
           {"auditor", auditor_params.to_json()}}},
         {"runs", runs},
         {"cache_dir", cache_dir.generic_string()},
         {"chars_per_token", chars_per_token},
         {"worker_limit", worker_limit},
         {"exclusion_globs", exclusion_globs},
         {"rate_limit_rps", rate_limit_rps},
         {"artifacts_dir", artifacts_dir.generic_string()},
         {"human_knowledge_path", human_knowledge_path.generic_string()},
         {"excerpts_dir", excerpts_dir.generic_string()}};
  if (synthesizer) j["synthesizer"] = synthesizer->to_json();
  if (generator) j["generator"] = generator->to_json();
  if (!mock_fixtures.empty()) j["mock_fixtures"] = mock_fixtures.generic_string();
  if (sweep) j["sweep"] = sweep->to_json();
  return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig config;
  if (j.contains("knowledge_mode")) {
    config.knowledge_mode = knowledge_mode_from_string(j.at("knowledge_mode").get<std::string>());
  }
  if (j.contains("synthesizer")) config.synthesizer = ModelSpec::from_json(j.at("synthesizer"));
  if (j.contains("generator")) config.generator = ModelSpec::from_json(j.at("generator"));
  if (j.contains("auditor")) config.auditor = ModelSpec::from_json(j.at("auditor"));
  if (j.contains("params")) {
    const auto& params = j.at("params");
    if (params.contains("synthesizer")) {
      config.synthesizer_params = RoleParams::from_json(params.at("synthesizer"));
    }
    if (params.contains("generator")) {
      config.generator_params = RoleParams::from_json(params.at("generator"));
    }
    if (params.contains("auditor")) {
      config.auditor_params = RoleParams::from_json(params.at("auditor"));
    }
  }
  if (j.contains("runs")) config.runs = j.at("runs").get<int>();
  if (j.contains("cache_dir")) config.cache_dir = j.at("cache_dir").get<std::string>();
  if (j.contains("chars_per_token")) config.chars_per_token = j.at("chars_per_token").get<double>();
  if (j.contains("worker_limit")) config.worker_limit = j.at("worker_limit").get<int>();
  if (j.contains("exclusion_globs")) {
    config.exclusion_globs = j.at("exclusion_globs").get<std::vector<std::string>>();
  }
  if (j.contains("mock_fixtures")) config.mock_fixtures = j.at("mock_fixtures").get<std::string>();
  if (j.contains("rate_limit_rps")) config.rate_limit_rps = j.at("rate_limit_rps").get<double>();
  if (j.contains("artifacts_dir")) config.artifacts_dir = j.at("artifacts_dir").get<std::string>();
  if (j.contains("human_knowledge_path")) {
    config.human_knowledge_path = j.at("human_knowledge_path").get<std::string>();
  }
  if (j.contains("excerpts_dir")) config.excerpts_dir = j.at("excerpts_dir").get<std::string>();
  if (j.contains("sweep")) config.sweep = SweepMatrix::from_json(j.at("sweep"));
  return config;
}

PipelineConfig load_config(const std::filesystem::path& file) {
  json doc = json::parse(read_text_file(file), nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config file is not valid JSON: " + file.string());
  try {
    return PipelineConfig::from_json(doc);
  } catch (const json::exception& ex) {
    throw ConfigError("config file " + file.string() + ": " + ex.what());
  }
}

void save_config(const PipelineConfig& config, const std::filesystem::path& file) {
  write_text_file(file, config.to_json().dump(2) + "\n");
}

void resolve_paths(PipelineConfig& config, const std::filesystem::path& base) {
  auto anchor = [&](std::filesystem::path& path) {
    if (!path.empty() && path.is_relative()) path = base / path;
  };
  anchor(config.cache_dir);
  anchor(config.mock_fixtures);
  anchor(config.artifacts_dir);
  anchor(config.human_knowledge_path);
  anchor(config.excerpts_dir);
  if (config.sweep) {
    for (auto& project : config.sweep->projects) {
      std::filesystem::path path = project;
      if (path.is_relative()) project = (base / path).generic_string();
    }
  }
}

std::vector<PipelineConfig> expand_sweep(const PipelineConfig& base) {
  if (!base.sweep) throw ConfigError("config has no sweep section");
  const SweepMatrix& matrix = *base.sweep;

  auto resolve = [&](const std::string& name) -> ModelSpec {
    auto it = matrix.models.find(name);
    if (it == matrix.models.end()) throw ConfigError("sweep names unknown model: " + name);
    return it->second;
  };

  auto make_cell = [&](const std::optional<std::string>& synth,
                       const std::optional<std::string>& gen,
                       const std::string& aud) {
    PipelineConfig config = base;
    config.sweep.reset();
    config.knowledge_mode = matrix.mode;
    config.synthesizer = synth ? std::optional<ModelSpec>(resolve(*synth)) : std::nullopt;
    config.generator = gen ? std::optional<ModelSpec>(resolve(*gen)) : std::nullopt;
    config.auditor = resolve(aud);
    config.validate();
    return config;
  };

  if (matrix.auditors.empty()) throw ConfigError("sweep needs at least one auditor model");

  std::vector<PipelineConfig> configs;
  switch (matrix.mode) {
    case KnowledgeMode::none:
      for (const auto& aud : matrix.auditors) {
        configs.push_back(make_cell(std::nullopt, std::nullopt, aud));
      }
      break;
    case KnowledgeMode::human_curated:
      if (matrix.generators.empty()) throw ConfigError("sweep needs generator models");
      for (const auto& gen : matrix.generators) {
        for (const auto& aud : matrix.auditors) {
          configs.push_back(make_cell(std::nullopt, gen, aud));
        }
      }
      break;
    case KnowledgeMode::llm_synthesized:
      if (matrix.synthesizers.empty() || matrix.generators.empty()) {
        throw ConfigError("sweep needs synthesizer and generator models");
      }
      for (const auto& synth : matrix.synthesizers) {
        for (const auto& gen : matrix.generators) {
          for (const auto& aud : matrix.auditors) {
            configs.push_back(make_cell(synth, gen, aud));
          }
        }
      }
      break;
  }
  return configs;
}

}  // namespace pomaudit
