#include "pomaudit/cli.hpp"

#include <ctime>
#include <iostream>

#include "CLI11.hpp"
#include "pomaudit/config.hpp"
#include "pomaudit/cot_prompt.hpp"
#include "pomaudit/errors.hpp"
#include "pomaudit/eval.hpp"
#include "pomaudit/io_util.hpp"
#include "pomaudit/knowledge.hpp"
#include "pomaudit/text_util.hpp"

namespace pomaudit {

namespace {

using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

GatewayOptions gateway_options(const PipelineConfig& config) {
  GatewayOptions options;
  options.cache_dir = config.cache_dir;
  options.requests_per_second = config.rate_limit_rps;
  options.mock_fixtures = config.mock_fixtures;
  return options;
}

// Flags shared by the pipeline subcommands. Flag values strictly override the
// configuration file, which overrides built-in defaults.
struct CommonFlags {
  std::string config_file;
  std::string cache_dir;
  std::string mock_fixtures;
  std::string artifacts_dir;
  std::string excerpts_dir;
  std::string human_knowledge;
  int runs = 0;
  int workers = 0;
  double chars_per_token = 0;

  CLI::Option* config_opt = nullptr;
  CLI::Option* cache_opt = nullptr;
  CLI::Option* mock_opt = nullptr;
  CLI::Option* artifacts_opt = nullptr;
  CLI::Option* excerpts_opt = nullptr;
  CLI::Option* human_opt = nullptr;
  CLI::Option* runs_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* cpt_opt = nullptr;

  void attach(CLI::App* app) {
    config_opt = app->add_option("--config", config_file, "Pipeline configuration file (JSON)");
    cache_opt = app->add_option("--cache-dir", cache_dir, "Response cache directory");
    mock_opt = app->add_option("--mock", mock_fixtures, "Mock provider fixture directory");
    artifacts_opt = app->add_option("--artifacts", artifacts_dir, "Stage artifact directory");
    excerpts_opt = app->add_option("--excerpts", excerpts_dir, "Knowledge excerpt directory");
    human_opt = app->add_option("--human-knowledge", human_knowledge,
                                "Human-curated knowledge file");
    runs_opt = app->add_option("--runs", runs, "Auditor runs per source unit");
    workers_opt = app->add_option("--workers", workers, "Concurrent audit workers");
    cpt_opt = app->add_option("--chars-per-token", chars_per_token,
                              "Characters per token for budget estimates");
  }

  PipelineConfig resolve() const {
    PipelineConfig config;
    if (config_opt->count() > 0) {
      config = load_config(config_file);
      resolve_paths(config,
                    std::filesystem::absolute(std::filesystem::path(config_file)).parent_path());
    }
    if (cache_opt->count() > 0) config.cache_dir = cache_dir;
    if (mock_opt->count() > 0) config.mock_fixtures = mock_fixtures;
    if (artifacts_opt->count() > 0) config.artifacts_dir = artifacts_dir;
    if (excerpts_opt->count() > 0) config.excerpts_dir = excerpts_dir;
    if (human_opt->count() > 0) config.human_knowledge_path = human_knowledge;
    if (runs_opt->count() > 0) config.runs = runs;
    if (workers_opt->count() > 0) config.worker_limit = workers;
    if (cpt_opt->count() > 0) config.chars_per_token = chars_per_token;
    return config;
  }
};

std::filesystem::path knowledge_artifact(const PipelineConfig& config) {
  return config.artifacts_dir / config.config_id() / "knowledge.json";
}

std::filesystem::path cot_artifact(const PipelineConfig& config) {
  return config.artifacts_dir / config.config_id() / "cot_prompt.json";
}

SynthesizedKnowledge obtain_knowledge(const PipelineConfig& config, Gateway& gateway) {
  switch (config.knowledge_mode) {
    case KnowledgeMode::human_curated:
      return load_human_curated(config.human_knowledge_path);
    case KnowledgeMode::llm_synthesized: {
      if (!config.synthesizer) throw ConfigError("config has no synthesizer model");
      auto excerpts = load_excerpts(config.excerpts_dir);
      return synthesize_knowledge(excerpts, *config.synthesizer, gateway,
                                  config.synthesizer_params);
    }
    case KnowledgeMode::none:
      throw ConfigError("knowledge_mode none has no knowledge stage");
  }
  throw ConfigError("unreachable knowledge mode");
}

std::vector<ProjectManifest> load_projects(const std::vector<std::string>& paths,
                                           const PipelineConfig& config) {
  DiscoveryOptions options;
  options.exclusion_globs = config.exclusion_globs;
  options.chars_per_token = config.chars_per_token;
  std::vector<ProjectManifest> projects;
  projects.reserve(paths.size());
  for (const auto& path : paths) projects.push_back(load_project(path, options));
  return projects;
}

void print_metrics_line(std::ostream& out, const std::string& label, const Metrics& metrics) {
  out << label << ": fn=" << format_real(metrics.counts.fn, 3)
      << " tp=" << format_real(metrics.counts.tp, 3) << " fp=" << format_real(metrics.counts.fp, 3)
      << " recall=" << format_real(metrics.recall, 3)
      << " precision=" << format_real(metrics.precision, 3)
      << " f1=" << format_real(metrics.f1, 3) << '\n';
}

int cmd_synthesize(const CommonFlags& flags, const std::string& out_file) {
  PipelineConfig config = flags.resolve();
  if (config.knowledge_mode == KnowledgeMode::none) {
    throw ConfigError("synthesize requires knowledge_mode llm_synthesized or human_curated");
  }
  Gateway gateway(gateway_options(config));
  SynthesizedKnowledge knowledge = obtain_knowledge(config, gateway);
  const std::filesystem::path out = out_file.empty() ? knowledge_artifact(config) : std::filesystem::path(out_file);
  write_text_file(out, knowledge.to_json().dump(2) + "\n");
  std::cout << "knowledge (" << to_string(knowledge.origin) << ") written to " << out.string()
            << '\n';
  return 0;
}

int cmd_genprompt(const CommonFlags& flags, const std::string& knowledge_file,
                  const std::string& out_file) {
  PipelineConfig config = flags.resolve();
  if (!config.generator) throw ConfigError("config has no generator model");
  Gateway gateway(gateway_options(config));

  SynthesizedKnowledge knowledge;
  const std::filesystem::path in =
      knowledge_file.empty() ? knowledge_artifact(config) : std::filesystem::path(knowledge_file);
  if (std::filesystem::exists(in)) {
    knowledge = SynthesizedKnowledge::from_json(json::parse(read_text_file(in)));
  } else if (knowledge_file.empty()) {
    knowledge = obtain_knowledge(config, gateway);
  } else {
    throw PipelineError("knowledge file not found: " + in.string());
  }

  CotPrompt prompt = generate_cot_prompt(knowledge, *config.generator, gateway,
                                         config.generator_params);
  const std::filesystem::path out = out_file.empty() ? cot_artifact(config) : std::filesystem::path(out_file);
  write_text_file(out, prompt.to_json().dump(2) + "\n");
  std::cout << "cot prompt (" << prompt.steps.size() << " steps) written to " << out.string()
            << '\n';
  return 0;
}

int cmd_audit(const CommonFlags& flags, const std::vector<std::string>& project_paths,
              const std::string& cot_file) {
  PipelineConfig config = flags.resolve();
  config.validate();
  Gateway gateway(gateway_options(config));

  // Replay a persisted CoT artifact when one exists; stage artifacts make each
  // subcommand independently re-runnable.
  std::optional<std::string> preloaded_cot;
  if (config.audit_mode() == AuditMode::cot_pipeline) {
    const std::filesystem::path cot_path =
        cot_file.empty() ? cot_artifact(config) : std::filesystem::path(cot_file);
    if (std::filesystem::exists(cot_path)) {
      preloaded_cot = render_cot_prompt(CotPrompt::from_json(json::parse(read_text_file(cot_path))));
    } else if (!cot_file.empty()) {
      throw PipelineError("cot prompt file not found: " + cot_path.string());
    }
  }

  const auto projects = load_projects(project_paths, config);
  SweepOptions options;
  options.artifacts_dir = config.artifacts_dir;
  options.worker_limit = config.worker_limit;
  SweepCell cell =
      run_configuration(config, projects, config.runs, gateway, options, preloaded_cot);

  for (size_t i = 0; i < cell.per_run.size(); ++i) {
    print_metrics_line(std::cout, "run " + std::to_string(i), cell.per_run[i]);
  }
  print_metrics_line(std::cout, "average", cell.metrics);
  for (const auto& unit : cell.skipped_units) std::cout << "skipped (budget): " << unit << '\n';
  for (int run : cell.failed_runs) std::cout << "failed run excluded: " << run << '\n';
  std::cout << "transcripts under "
            << (config.artifacts_dir / cell.config_id).string() << '\n';
  std::cout << "provider dispatches: " << gateway.dispatch_count() << '\n';
  return 0;
}

int cmd_evaluate(const std::string& findings_file, const std::string& truth_file) {
  json doc = json::parse(read_text_file(findings_file), nullptr, false);
  if (doc.is_discarded()) throw PipelineError("findings file is not valid JSON: " + findings_file);

  std::vector<std::vector<Finding>> runs;
  auto findings_from_array = [](const json& array) {
    std::vector<Finding> findings;
    for (const auto& item : array) findings.push_back(Finding::from_json(item));
    return findings;
  };
  if (doc.is_array()) {
    runs.push_back(findings_from_array(doc));
  } else if (doc.is_object() && doc.contains("runs")) {
    for (const auto& run : doc.at("runs")) runs.push_back(findings_from_array(run));
  } else {
    throw PipelineError("findings file must be an array or an object with a runs array");
  }
  if (runs.empty()) throw EmptyRunSet();

  const auto truth = load_ground_truth(truth_file);

  std::vector<ConfusionCounts> per_run;
  for (size_t i = 0; i < runs.size(); ++i) {
    const ConfusionCounts counts = match_findings(dedupe_findings(runs[i]), truth);
    per_run.push_back(counts);
    print_metrics_line(std::cout, "run " + std::to_string(i), compute_metrics(counts));
  }
  print_metrics_line(std::cout, "average", compute_metrics(average_runs(per_run)));
  return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& out_dir) {
  PipelineConfig base = flags.resolve();
  if (!base.sweep) throw ConfigError("sweep requires a config file with a sweep section");

  const auto configs = expand_sweep(base);
  const auto projects = load_projects(base.sweep->projects, base);

  Gateway gateway(gateway_options(base));
  SweepOptions options;
  options.artifacts_dir = base.artifacts_dir;
  options.worker_limit = base.worker_limit;
  const auto cells = run_sweep(configs, projects, base.runs, gateway, options);

  const std::filesystem::path out =
      out_dir.empty() ? std::filesystem::path("reports") / utc_timestamp() : std::filesystem::path(out_dir);
  write_text_file(out / "sweep.csv", emit_report(cells, ReportFormat::csv));
  write_text_file(out / "sweep.json", emit_report(cells, ReportFormat::json));
  write_text_file(out / "sweep.txt", emit_report(cells, ReportFormat::table_text));

  size_t best = 0;
  for (size_t i = 1; i < cells.size(); ++i) {
    if (cells[i].metrics.f1 > cells[best].metrics.f1) best = i;
  }
  std::cout << "cells: " << cells.size() << '\n';
  std::cout << "best: " << cells[best].synthesizer_model.value_or("-") << "/"
            << cells[best].generator_model.value_or("-") << "/" << cells[best].auditor_model
            << " f1=" << format_real(cells[best].metrics.f1, 3) << '\n';
  std::cout << "reports written to " << out.string() << '\n';
  std::cout << "provider dispatches: " << gateway.dispatch_count() << '\n';
  return 0;
}

int cmd_cache(const CommonFlags& flags, bool inspect, bool clear) {
  PipelineConfig config = flags.resolve();
  ResponseCache cache(config.cache_dir);
  if (clear) {
    const size_t removed = cache.clear();
    std::cout << "cleared " << removed << " cached responses from " << config.cache_dir.string()
              << '\n';
    return 0;
  }
  if (inspect) {
    const auto stats = cache.stats();
    std::cout << "cache dir: " << config.cache_dir.string() << '\n';
    std::cout << "entries: " << stats.entries << '\n';
    std::cout << "bytes: " << stats.bytes << '\n';
    return 0;
  }
  throw ConfigError("cache requires a subcommand (inspect or clear)");
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"LLM-driven detection of price oracle manipulation in Solidity corpora"};
  app.name("pomaudit");
  app.require_subcommand(1);

  CommonFlags synth_flags, gen_flags, audit_flags, sweep_flags, cache_flags;
  std::string synth_out, gen_knowledge, gen_out, audit_cot, sweep_out;
  std::vector<std::string> audit_projects;
  std::string eval_findings, eval_truth;

  auto* synth = app.add_subcommand("synthesize", "Produce the knowledge artifact from excerpts");
  synth_flags.attach(synth);
  synth->add_option("--out", synth_out, "Output knowledge JSON path");

  auto* gen = app.add_subcommand("genprompt", "Generate the chain-of-thought audit prompt");
  gen_flags.attach(gen);
  gen->add_option("--knowledge", gen_knowledge, "Knowledge artifact to consume");
  gen->add_option("--out", gen_out, "Output CoT prompt JSON path");

  auto* audit = app.add_subcommand("audit", "Audit projects and persist transcripts");
  audit_flags.attach(audit);
  audit->add_option("--project", audit_projects, "Project directory (repeatable)")->required();
  audit->add_option("--cot", audit_cot, "Rendered CoT artifact to replay");

  auto* evaluate = app.add_subcommand("evaluate", "Score findings against ground truth");
  evaluate->add_option("--findings", eval_findings, "Findings JSON (array or {runs: [...]})")
      ->required();
  evaluate->add_option("--truth", eval_truth, "Ground-truth TSV")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a model-combination sweep and emit reports");
  sweep_flags.attach(sweep);
  sweep->add_option("--out", sweep_out, "Report output directory");

  auto* cache = app.add_subcommand("cache", "Inspect or clear the response cache");
  cache_flags.attach(cache);
  auto* cache_inspect = cache->add_subcommand("inspect", "Show cache statistics");
  auto* cache_clear = cache->add_subcommand("clear", "Delete all cached responses");
  cache_inspect->fallthrough();
  cache_clear->fallthrough();
  cache->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synthesize(synth_flags, synth_out);
    if (gen->parsed()) return cmd_genprompt(gen_flags, gen_knowledge, gen_out);
    if (audit->parsed()) return cmd_audit(audit_flags, audit_projects, audit_cot);
    if (evaluate->parsed()) return cmd_evaluate(eval_findings, eval_truth);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, sweep_out);
    if (cache->parsed()) {
      return cmd_cache(cache_flags, cache_inspect->parsed(), cache_clear->parsed());
    }
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cerr << app.help();
  return 1;
}

int dispatch(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("pomaudit");
  for (const auto& arg : args) argv.push_back(arg.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace pomaudit
