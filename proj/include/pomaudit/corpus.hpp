#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pomaudit/text_util.hpp"

namespace pomaudit {

// One Solidity file, or a contract-boundary chunk of one, submitted to a
// single auditor call.
struct SourceUnit {
  std::string unit_id;  // project-relative path, plus "#k" when split
  std::string text;
  long long estimated_tokens = 0;
  std::filesystem::path origin_file;
  // Set when a single top-level declaration alone exceeds the split budget;
  // the unit is kept for reporting but skipped at audit time.
  bool oversized = false;
};

struct GroundTruthEntry {
  std::string contract_name;
  std::string function_name;
  std::string note;
};

enum class DatasetKind { defihack, code4rena, custom };

std::string to_string(DatasetKind kind);
DatasetKind dataset_from_string(const std::string& name);

struct ProjectManifest {
  std::string project_id;
  DatasetKind dataset = DatasetKind::custom;
  std::vector<SourceUnit> units;
  std::vector<GroundTruthEntry> ground_truth;

  nlohmann::json to_json() const;  // unit metadata only, not unit text
};

struct DiscoveryOptions {
  std::vector<std::string> exclusion_globs = default_exclusion_globs();
  double chars_per_token = 4.0;

  static std::vector<std::string> default_exclusion_globs();
};

// Recursively collects .sol files under root, lexicographic by relative path.
std::vector<SourceUnit> discover_sources(const std::filesystem::path& root,
                                         const DiscoveryOptions& options = {});

// Identity when the unit fits the budget; otherwise splits at top-level
// contract/library/interface boundaries into consecutive chunks. Chunk texts
// concatenate back to the original text exactly.
std::vector<SourceUnit> split_oversized(const SourceUnit& unit, long long budget,
                                        double chars_per_token = 4.0);

// Offsets of top-level declaration starts, comment- and string-aware.
std::vector<size_t> top_level_decl_offsets(const std::string& text);

// Tab-separated contract<TAB>function<TAB>note, '#' comments allowed.
std::vector<GroundTruthEntry> load_ground_truth(const std::filesystem::path& path);

// Project directory: .sol sources anywhere below, optional ground_truth.tsv,
// optional project.json ({"project_id": ..., "dataset": ...}).
ProjectManifest load_project(const std::filesystem::path& root,
                             const DiscoveryOptions& options = {});

}  // namespace pomaudit
