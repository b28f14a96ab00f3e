#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pomaudit/auditor.hpp"
#include "pomaudit/model_spec.hpp"

namespace pomaudit {

enum class KnowledgeMode { llm_synthesized, human_curated, none };

std::string to_string(KnowledgeMode mode);
KnowledgeMode knowledge_mode_from_string(const std::string& name);

// Cross product of role models for the sweep subcommand. Role lists name
// entries of `models`; which lists apply depends on the knowledge mode.
struct SweepMatrix {
  KnowledgeMode mode = KnowledgeMode::llm_synthesized;
  std::vector<std::string> synthesizers;
  std::vector<std::string> generators;
  std::vector<std::string> auditors;
  std::map<std::string, ModelSpec> models;
  std::vector<std::string> projects;

  nlohmann::json to_json() const;
  static SweepMatrix from_json(const nlohmann::json& j);
};

struct PipelineConfig {
  KnowledgeMode knowledge_mode = KnowledgeMode::llm_synthesized;
  std::optional<ModelSpec> synthesizer;
  std::optional<ModelSpec> generator;
  ModelSpec auditor;
  RoleParams synthesizer_params = default_params(Role::synthesizer);
  RoleParams generator_params = default_params(Role::generator);
  RoleParams auditor_params = default_params(Role::auditor);
  int runs = 3;
  std::filesystem::path cache_dir = ".pomaudit-cache";
  double chars_per_token = 4.0;
  int worker_limit = 4;
  std::vector<std::string> exclusion_globs = DiscoveryOptions::default_exclusion_globs();
  std::filesystem::path mock_fixtures;
  double rate_limit_rps = 2.0;
  std::filesystem::path artifacts_dir = "artifacts";
  std::filesystem::path human_knowledge_path = "knowledge/human_curated.txt";
  std::filesystem::path excerpts_dir = "knowledge/excerpts";
  std::optional<SweepMatrix> sweep;

  void validate() const;

  AuditMode audit_mode() const {
    return knowledge_mode == KnowledgeMode::none ? AuditMode::zero_shot_baseline
                                                 : AuditMode::cot_pipeline;
  }

  // Stable identifier for artifact directories, derived from the mode and the
  // role models.
  std::string config_id() const;

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
};

PipelineConfig load_config(const std::filesystem::path& file);
void save_config(const PipelineConfig& config, const std::filesystem::path& file);

// Re-anchors relative paths (cache, artifacts, knowledge, mock fixtures,
// sweep projects) against `base`, normally the config file's directory. Kept
// separate from load_config so load/save stays lossless.
void resolve_paths(PipelineConfig& config, const std::filesystem::path& base);

// One PipelineConfig per sweep cell, in deterministic matrix order
// (synthesizers outermost, auditors innermost).
std::vector<PipelineConfig> expand_sweep(const PipelineConfig& base);

std::string sanitize_path_component(const std::string& raw);

}  // namespace pomaudit
