#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pomaudit/auditor.hpp"
#include "pomaudit/config.hpp"
#include "pomaudit/corpus.hpp"
#include "pomaudit/gateway.hpp"

namespace pomaudit {

// Fractional after averaging across runs; tp + fn equals the ground-truth size
// of the evaluated scope per run.
struct ConfusionCounts {
  double tp = 0;
  double fp = 0;
  double fn = 0;
};

struct Metrics {
  ConfusionCounts counts;
  double recall = 0;
  double precision = 0;
  double f1 = 0;
};

// Set matching over normalized (contract, function) keys; normalization is
// auditor::normalized_key, identical to dedupe_findings.
ConfusionCounts match_findings(const std::vector<Finding>& findings,
                               const std::vector<GroundTruthEntry>& truth);

// recall = tp/(tp+fn), precision = tp/(tp+fp), f1 = 2pr/(p+r); zero
// denominators yield 0.
Metrics compute_metrics(const ConfusionCounts& counts);

// Arithmetic mean of tp, fp, fn independently. Downstream metrics are then
// computed from the averaged counts.
ConfusionCounts average_runs(const std::vector<ConfusionCounts>& per_run);

struct SweepCell {
  std::optional<std::string> synthesizer_model;
  std::optional<std::string> generator_model;
  std::string auditor_model;
  AuditMode mode = AuditMode::cot_pipeline;
  KnowledgeMode knowledge_mode = KnowledgeMode::llm_synthesized;
  Metrics metrics;                     // from run-averaged counts
  std::vector<Metrics> per_run;        // completed runs only
  int planned_runs = 0;
  std::vector<int> failed_runs;        // run indices excluded from the average
  std::vector<std::string> skipped_units;  // budget-skipped, reported not dropped
  std::string config_id;

  nlohmann::json to_json() const;
};

enum class ReportFormat { table_text, csv, json };

// Deterministic rendering; columns FN, TP, FP, Recall, Precision, F1 with
// reals at 3 decimals and the best-F1 row flagged (first row on ties).
std::string emit_report(const std::vector<SweepCell>& cells, ReportFormat format);

struct SweepOptions {
  std::filesystem::path artifacts_dir;  // empty disables transcript persistence
  int worker_limit = 4;
};

// Full pipeline for one configuration: knowledge once, CoT once, every unit of
// every project audited `runs` times, findings pooled dataset-wide per run,
// deduped, matched, averaged. Per-unit problems become cell annotations.
// `preloaded_cot` replays a persisted rendered prompt without a generator call.
SweepCell run_configuration(const PipelineConfig& config,
                            const std::vector<ProjectManifest>& projects, int runs,
                            Gateway& gateway, const SweepOptions& options = {},
                            const std::optional<std::string>& preloaded_cot = std::nullopt);

// run_configuration per config, in order; the sweep never aborts for one unit.
std::vector<SweepCell> run_sweep(const std::vector<PipelineConfig>& configs,
                                 const std::vector<ProjectManifest>& projects, int runs,
                                 Gateway& gateway, const SweepOptions& options = {});

}  // namespace pomaudit
