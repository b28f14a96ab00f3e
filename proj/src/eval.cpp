#include "pomaudit/eval.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "pomaudit/cot_prompt.hpp"
#include "pomaudit/errors.hpp"
#include "pomaudit/io_util.hpp"
#include "pomaudit/knowledge.hpp"
#include "pomaudit/parallel.hpp"
#include "pomaudit/text_util.hpp"

namespace pomaudit {

namespace {

using nlohmann::json;

constexpr const char* kCountingNote =
    "Counting: one vulnerability per normalized (contract, function) pair; findings pooled "
    "dataset-wide per run before matching; metrics computed from run-averaged counts.";

using Key = std::pair<std::string, std::string>;

std::set<Key> finding_keys(const std::vector<Finding>& findings) {
  std::set<Key> keys;
  for (const auto& finding : findings) {
    keys.insert(normalized_key(finding.contract_name, finding.function_name));
  }
  return keys;
}

std::set<Key> truth_keys(const std::vector<GroundTruthEntry>& truth) {
  std::set<Key> keys;
  for (const auto& entry : truth) {
    keys.insert(normalized_key(entry.contract_name, entry.function_name));
  }
  return keys;
}

struct UnitTask {
  std::string project_id;
  SourceUnit unit;
};

std::string csv_report(const std::vector<SweepCell>& cells, size_t best_index) {
  std::ostringstream out;
  out << "synthesizer,generator,auditor,mode,fn,tp,fp,recall,precision,f1,best\n";
  for (size_t i = 0; i < cells.size(); ++i) {
    const SweepCell& cell = cells[i];
    out << cell.synthesizer_model.value_or("-") << ',' << cell.generator_model.value_or("-") << ','
        << cell.auditor_model << ',' << to_string(cell.mode) << ','
        << format_real(cell.metrics.counts.fn, 3) << ',' << format_real(cell.metrics.counts.tp, 3)
        << ',' << format_real(cell.metrics.counts.fp, 3) << ','
        << format_real(cell.metrics.recall, 3) << ',' << format_real(cell.metrics.precision, 3)
        << ',' << format_real(cell.metrics.f1, 3) << ',' << (i == best_index ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string text_report(const std::vector<SweepCell>& cells, size_t best_index) {
  const std::vector<std::string> headers = {"synthesizer", "generator", "auditor", "mode",
                                            "FN",          "TP",        "FP",      "Recall",
                                            "Precision",   "F1",        ""};
  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < cells.size(); ++i) {
    const SweepCell& cell = cells[i];
    rows.push_back({cell.synthesizer_model.value_or("-"), cell.generator_model.value_or("-"),
                    cell.auditor_model, to_string(cell.mode), format_real(cell.metrics.counts.fn, 3),
                    format_real(cell.metrics.counts.tp, 3), format_real(cell.metrics.counts.fp, 3),
                    format_real(cell.metrics.recall, 3), format_real(cell.metrics.precision, 3),
                    format_real(cell.metrics.f1, 3), i == best_index ? "*best*" : ""});
  }
  std::vector<size_t> widths(headers.size());
  for (size_t c = 0; c < headers.size(); ++c) {
    widths[c] = headers[c].size();
    for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  auto emit_row = [&](const std::vector<std::string>& row) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << "  ";
      out << row[c] << std::string(widths[c] - row[c].size(), ' ');
    }
    out << '\n';
  };
  emit_row(headers);
  size_t total = 0;
  for (size_t c = 0; c < widths.size(); ++c) total += widths[c] + (c > 0 ? 2 : 0);
  out << std::string(total, '-') << '\n';
  for (const auto& row : rows) emit_row(row);
  out << '\n' << kCountingNote << '\n';
  return out.str();
}

json metrics_to_json(const Metrics& metrics) {
  return json{{"counts",
               {{"tp", metrics.counts.tp}, {"fp", metrics.counts.fp}, {"fn", metrics.counts.fn}}},
              {"recall", metrics.recall},
              {"precision", metrics.precision},
              {"f1", metrics.f1}};
}

std::string json_report(const std::vector<SweepCell>& cells, size_t best_index) {
  json cells_json = json::array();
  for (size_t i = 0; i < cells.size(); ++i) {
    json cell_json = cells[i].to_json();
    cell_json["best"] = (i == best_index);
    cells_json.push_back(std::move(cell_json));
  }
  return json{{"cells", cells_json}, {"notes", kCountingNote}}.dump(2) + "\n";
}

}  // namespace

ConfusionCounts match_findings(const std::vector<Finding>& findings,
                               const std::vector<GroundTruthEntry>& truth) {
  const std::set<Key> found = finding_keys(findings);
  const std::set<Key> expected = truth_keys(truth);

  ConfusionCounts counts;
  for (const auto& key : found) {
    if (expected.count(key) > 0) {
      counts.tp += 1;
    } else {
      counts.fp += 1;
    }
  }
  counts.fn = static_cast<double>(expected.size()) - counts.tp;
  return counts;
}

Metrics compute_metrics(const ConfusionCounts& counts) {
  Metrics metrics;
  metrics.counts = counts;
  const double tp_fn = counts.tp + counts.fn;
  const double tp_fp = counts.tp + counts.fp;
  metrics.recall = tp_fn > 0 ? counts.tp / tp_fn : 0.0;
  metrics.precision = tp_fp > 0 ? counts.tp / tp_fp : 0.0;
  const double pr = metrics.precision + metrics.recall;
  metrics.f1 = pr > 0 ? 2.0 * metrics.precision * metrics.recall / pr : 0.0;
  return metrics;
}

ConfusionCounts average_runs(const std::vector<ConfusionCounts>& per_run) {
  if (per_run.empty()) throw EmptyRunSet();
  ConfusionCounts mean;
  for (const auto& counts : per_run) {
    mean.tp += counts.tp;
    mean.fp += counts.fp;
    mean.fn += counts.fn;
  }
  const double n = static_cast<double>(per_run.size());
  mean.tp /= n;
  mean.fp /= n;
  mean.fn /= n;
  return mean;
}

nlohmann::json SweepCell::to_json() const {
  json per_run_json = json::array();
  for (const auto& metrics : per_run) per_run_json.push_back(metrics_to_json(metrics));
  json j{{"synthesizer", synthesizer_model ? json(*synthesizer_model) : json(nullptr)},
         {"generator", generator_model ? json(*generator_model) : json(nullptr)},
         {"auditor", auditor_model},
         {"mode", to_string(mode)},
         {"knowledge_mode", to_string(knowledge_mode)},
         {"metrics", metrics_to_json(metrics)},
         {"per_run", per_run_json},
         {"planned_runs", planned_runs},
         {"failed_runs", failed_runs},
         {"skipped_units", skipped_units},
         {"config_id", config_id}};
  return j;
}

std::string emit_report(const std::vector<SweepCell>& cells, ReportFormat format) {
  if (cells.empty()) throw PipelineError("cannot emit a report for zero sweep cells");
  size_t best_index = 0;
  for (size_t i = 1; i < cells.size(); ++i) {
    if (cells[i].metrics.f1 > cells[best_index].metrics.f1) best_index = i;
  }
  switch (format) {
    case ReportFormat::csv: return csv_report(cells, best_index);
    case ReportFormat::table_text: return text_report(cells, best_index);
    case ReportFormat::json: return json_report(cells, best_index);
  }
  throw PipelineError("unknown report format");
}

SweepCell run_configuration(const PipelineConfig& config,
                            const std::vector<ProjectManifest>& projects, int runs,
                            Gateway& gateway, const SweepOptions& options,
                            const std::optional<std::string>& preloaded_cot) {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  config.validate();

  // Pooled ground truth for the evaluated scope.
  std::vector<GroundTruthEntry> pooled_truth;
  for (const auto& project : projects) {
    pooled_truth.insert(pooled_truth.end(), project.ground_truth.begin(),
                        project.ground_truth.end());
  }

  const std::string config_id = config.config_id();
  const std::filesystem::path cell_dir =
      options.artifacts_dir.empty() ? std::filesystem::path() : options.artifacts_dir / config_id;

  SweepCell cell;
  cell.mode = config.audit_mode();
  cell.knowledge_mode = config.knowledge_mode;
  cell.auditor_model = config.auditor.model_name;
  cell.planned_runs = runs;
  cell.config_id = config_id;

  // Stage 1: knowledge (once per configuration).
  std::optional<SynthesizedKnowledge> knowledge;
  if (config.knowledge_mode == KnowledgeMode::llm_synthesized) {
    cell.synthesizer_model = config.synthesizer->model_name;
    if (!preloaded_cot) {
      auto excerpts = load_excerpts(config.excerpts_dir);
      knowledge = synthesize_knowledge(excerpts, *config.synthesizer, gateway,
                                       config.synthesizer_params);
    }
  } else if (config.knowledge_mode == KnowledgeMode::human_curated) {
    if (!preloaded_cot) knowledge = load_human_curated(config.human_knowledge_path);
  }
  if (!cell_dir.empty() && knowledge) {
    write_text_file(cell_dir / "knowledge.json", knowledge->to_json().dump(2) + "\n");
  }

  // Stage 2: CoT prompt (once per configuration).
  std::optional<std::string> cot_text = preloaded_cot;
  if (config.audit_mode() == AuditMode::cot_pipeline) {
    cell.generator_model = config.generator->model_name;
    if (!cot_text) {
      CotPrompt prompt =
          generate_cot_prompt(*knowledge, *config.generator, gateway, config.generator_params);
      cot_text = render_cot_prompt(prompt);
      if (!cell_dir.empty()) {
        write_text_file(cell_dir / "cot_prompt.json", prompt.to_json().dump(2) + "\n");
      }
    }
  }

  // Stage 3: split units against the auditor's context budget.
  const auto probe = config.audit_mode() == AuditMode::cot_pipeline
                         ? assemble_audit_prompt(*cot_text, "x")
                         : assemble_zero_shot_prompt("x");
  const long long overhead = estimate_tokens(probe.first, config.auditor.chars_per_token) +
                             estimate_tokens(probe.second, config.auditor.chars_per_token) +
                             config.auditor_params.max_output_tokens;
  const long long source_budget =
      std::max<long long>(1, config.auditor.context_window - overhead - 16);

  std::vector<UnitTask> tasks;
  for (const auto& project : projects) {
    for (const auto& unit : project.units) {
      for (auto& chunk : split_oversized(unit, source_budget, config.chars_per_token)) {
        tasks.push_back({project.project_id, std::move(chunk)});
      }
    }
    if (!cell_dir.empty()) {
      write_text_file(cell_dir / sanitize_path_component(project.project_id) / "manifest.json",
                      project.to_json().dump(2) + "\n");
    }
  }

  // Stage 4: audit, bounded workers across units, runs sequential per unit.
  std::vector<std::vector<AuditRun>> unit_runs(tasks.size());
  parallel_for(tasks.size(), options.worker_limit, [&](size_t i) {
    unit_runs[i] = audit_unit(cot_text, tasks[i].unit, config.auditor, gateway,
                              config.audit_mode(), runs, config.auditor_params);
  });

  // Persist transcripts and collect per-run pools in deterministic unit order.
  std::vector<std::vector<Finding>> pooled(static_cast<size_t>(runs));
  std::vector<bool> run_failed(static_cast<size_t>(runs), false);
  for (size_t i = 0; i < tasks.size(); ++i) {
    for (const auto& run : unit_runs[i]) {
      if (!cell_dir.empty()) {
        const auto path = cell_dir / sanitize_path_component(tasks[i].project_id) /
                          sanitize_path_component(run.unit_id) /
                          (std::to_string(run.run_index) + ".json");
        write_text_file(path, run.to_json().dump(2) + "\n");
      }
      if (run.status == RunStatus::provider_failed) {
        run_failed[static_cast<size_t>(run.run_index)] = true;
      } else if (run.status == RunStatus::ok) {
        pooled[static_cast<size_t>(run.run_index)].insert(
            pooled[static_cast<size_t>(run.run_index)].end(), run.findings.begin(),
            run.findings.end());
      }
    }
    if (!unit_runs[i].empty() && unit_runs[i].front().status == RunStatus::skipped_budget) {
      cell.skipped_units.push_back(tasks[i].project_id + "/" + tasks[i].unit.unit_id);
    }
  }

  // Stage 5: per-run matching and run averaging over completed runs.
  std::vector<ConfusionCounts> per_run_counts;
  json runs_json = json::array();
  for (int r = 0; r < runs; ++r) {
    if (run_failed[static_cast<size_t>(r)]) {
      cell.failed_runs.push_back(r);
      continue;
    }
    const auto deduped = dedupe_findings(pooled[static_cast<size_t>(r)]);
    const ConfusionCounts counts = match_findings(deduped, pooled_truth);
    per_run_counts.push_back(counts);
    cell.per_run.push_back(compute_metrics(counts));
    json run_findings = json::array();
    for (const auto& finding : pooled[static_cast<size_t>(r)]) {
      run_findings.push_back(finding.to_json());
    }
    runs_json.push_back(std::move(run_findings));
  }
  if (!cell_dir.empty()) {
    write_text_file(cell_dir / "findings.json", json{{"runs", runs_json}}.dump(2) + "\n");
  }
  if (!per_run_counts.empty()) {
    cell.metrics = compute_metrics(average_runs(per_run_counts));
  }
  return cell;
}

std::vector<SweepCell> run_sweep(const std::vector<PipelineConfig>& configs,
                                 const std::vector<ProjectManifest>& projects, int runs,
                                 Gateway& gateway, const SweepOptions& options) {
  if (configs.empty()) throw ConfigError("sweep needs at least one configuration");
  std::vector<SweepCell> cells;
  cells.reserve(configs.size());
  for (const auto& config : configs) {
    cells.push_back(run_configuration(config, projects, runs, gateway, options));
  }
  return cells;
}

}  // namespace pomaudit
