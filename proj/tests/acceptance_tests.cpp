// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Expects to run from the repository root (ctest sets that up).
//
// `acceptance_tests --update-golden` regenerates tests/golden/sweep/* from the
// oracle-computed cells (never from the pipeline under test).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pomaudit/auditor.hpp"
#include "pomaudit/config.hpp"
#include "pomaudit/corpus.hpp"
#include "pomaudit/cot_prompt.hpp"
#include "pomaudit/errors.hpp"
#include "pomaudit/eval.hpp"
#include "pomaudit/gateway.hpp"
#include "pomaudit/io_util.hpp"
#include "pomaudit/knowledge.hpp"
#include "test_support.hpp"

using namespace pomaudit;
using pomaudit::test::TempDir;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& what) {
  if (!condition) throw CheckFailure(what);
}

void require_close(double actual, double expected, double tolerance, const std::string& what) {
  if (std::abs(actual - expected) > tolerance + 1e-12) {
    std::ostringstream msg;
    msg << what << ": got " << actual << ", want " << expected << " +/- " << tolerance;
    throw CheckFailure(msg.str());
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Criterion 1: frozen reference counts reproduce the published metric rows.

void criterion_metric_reproduction() {
  const auto start = std::chrono::steady_clock::now();

  Metrics row_a = compute_metrics({9.33, 20.67, 26.67});
  require_close(row_a.precision, 0.311, 0.001, "row A precision");
  require_close(row_a.recall, 0.259, 0.001, "row A recall");
  require_close(row_a.f1, 0.283, 0.001, "row A f1");

  Metrics row_b = compute_metrics({24.0, 52.67, 12.0});
  require_close(row_b.precision, 0.313, 0.001, "row B precision");
  require_close(row_b.recall, 0.667, 0.001, "row B recall");
  require_close(row_b.f1, 0.426, 0.001, "row B f1");

  // Cross-dataset rows are published at two decimals for recall.
  Metrics row_c = compute_metrics({13.0, 128.3, 11.0});
  require_close(row_c.precision, 0.092, 0.001, "row C precision");
  require_close(row_c.recall, 0.54, 0.005, "row C recall");
  require_close(row_c.f1, 0.157, 0.001, "row C f1");

  Metrics row_d = compute_metrics({3.0, 29.0, 21.0});
  require_close(row_d.precision, 0.094, 0.001, "row D precision");
  require_close(row_d.recall, 0.13, 0.005, "row D recall");
  require_close(row_d.f1, 0.107, 0.001, "row D f1");

  require(seconds_since(start) < 1.0, "metric reproduction exceeded 1 second");
}

// ---------------------------------------------------------------------------
// Criterion 2: assembled prompts byte-match the checked-in golden templates.

void criterion_golden_prompts() {
  const std::filesystem::path dir = "tests/golden/prompts";
  auto check = [&](const std::string& name, const std::string& actual) {
    const std::string expected = read_text_file(dir / name);
    require(actual == expected, name + " does not byte-match its golden file");
  };

  auto [ss, su] = assemble_synthesis_prompt({{"placeholder", "venue", "{knowledge}"}});
  check("synthesizer_system.txt", ss);
  check("synthesizer_user.txt", su);

  SynthesizedKnowledge knowledge;
  knowledge.definition_text = "{synthesized knowledge}";
  auto [gs, gu] = assemble_generation_prompt(knowledge);
  check("generator_system.txt", gs);
  check("generator_user.txt", gu);

  auto [as, au] = assemble_audit_prompt("{generated CoT prompt}", "{smart contract}");
  check("auditor_system.txt", as);
  check("auditor_user.txt", au);

  auto [zs, zu] = assemble_zero_shot_prompt("{smart contract}");
  check("zero_shot_system.txt", zs);
  check("zero_shot_user.txt", zu);
}

// ---------------------------------------------------------------------------
// Criteria 3 and 7 share the bundled fixture sweep.

using KeySet = std::vector<std::pair<std::string, std::string>>;  // (contract, function)

// Scripted finding sets per cell and run; mirrors tests/fixtures/mock/script.json.
std::vector<std::vector<KeySet>> scripted_runs() {
  const std::pair<std::string, std::string> av_get{"AlphaVault", "getPrice"};
  const std::pair<std::string, std::string> av_get_dup{"AlphaVault", "getPrice(address)"};
  const std::pair<std::string, std::string> av_dep{"AlphaVault", "deposit"};
  const std::pair<std::string, std::string> ap_swap{"AlphaPool", "swap"};
  const std::pair<std::string, std::string> ap_sync{"AlphaPool", "sync"};
  const std::pair<std::string, std::string> bl_bor{"BetaLender", "borrow"};
  const std::pair<std::string, std::string> bl_liq{"BetaLender", "liquidate"};
  const std::pair<std::string, std::string> bl_rep{"BetaLender", "repay"};

  return {
      // gen-precise x audit-strict
      {{av_get, ap_swap, bl_bor},
       {av_get, ap_swap, bl_rep},
       {av_get, av_get_dup, ap_swap, bl_bor, bl_liq}},
      // gen-precise x audit-eager
      {{av_get, av_dep, ap_swap, ap_sync, bl_bor, bl_liq},
       {av_get, av_dep, ap_swap, ap_sync, bl_bor, bl_rep},
       {av_get, ap_swap, ap_sync, bl_liq}},
      // gen-broad x audit-strict
      {{av_get}, {av_get, bl_bor}, {av_get, av_dep}},
      // gen-broad x audit-eager
      {{av_get, av_dep, ap_swap, ap_sync, bl_bor, bl_liq, bl_rep},
       {av_dep, ap_swap, bl_bor, bl_liq, bl_rep},
       {av_get, ap_swap, ap_sync, bl_bor, bl_liq, bl_rep}},
  };
}

// Oracle-side normalization and set intersection, independent of the auditor
// and eval modules.
std::pair<std::string, std::string> oracle_normalize(std::pair<std::string, std::string> key) {
  auto clean = [](std::string s, bool strip_params) {
    if (strip_params) {
      if (auto p = s.find('('); p != std::string::npos) s.erase(p);
    }
    size_t b = s.find_first_not_of(" \t\r\n");
    size_t e = s.find_last_not_of(" \t\r\n");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  return {clean(key.first, false), clean(key.second, true)};
}

ConfusionCounts oracle_counts(const KeySet& findings, const KeySet& truth) {
  std::set<std::pair<std::string, std::string>> found, expected;
  for (const auto& key : findings) found.insert(oracle_normalize(key));
  for (const auto& key : truth) expected.insert(oracle_normalize(key));
  ConfusionCounts counts;
  for (const auto& key : found) {
    if (expected.count(key) > 0) counts.tp += 1;
    else counts.fp += 1;
  }
  counts.fn = static_cast<double>(expected.size()) - counts.tp;
  return counts;
}

Metrics oracle_metrics(const ConfusionCounts& counts) {
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

PipelineConfig fixture_config() {
  PipelineConfig config = load_config("tests/fixtures/sweep_config.json");
  resolve_paths(config, std::filesystem::absolute("tests/fixtures"));
  return config;
}

std::vector<SweepCell> oracle_cells(const std::vector<PipelineConfig>& configs) {
  const KeySet truth = {{"AlphaVault", "getPrice"},
                        {"AlphaPool", "swap"},
                        {"BetaLender", "borrow"},
                        {"BetaLender", "liquidate"}};
  const auto scripted = scripted_runs();
  require(configs.size() == scripted.size(), "config count mismatch against scripted runs");

  std::vector<SweepCell> cells;
  for (size_t i = 0; i < configs.size(); ++i) {
    SweepCell cell;
    cell.synthesizer_model = std::nullopt;
    cell.generator_model = configs[i].generator->model_name;
    cell.auditor_model = configs[i].auditor.model_name;
    cell.mode = AuditMode::cot_pipeline;
    cell.knowledge_mode = KnowledgeMode::human_curated;
    cell.planned_runs = 3;
    cell.config_id = configs[i].config_id();

    ConfusionCounts sum;
    for (const auto& run : scripted[i]) {
      const ConfusionCounts counts = oracle_counts(run, truth);
      cell.per_run.push_back(oracle_metrics(counts));
      sum.tp += counts.tp;
      sum.fp += counts.fp;
      sum.fn += counts.fn;
    }
    const double n = static_cast<double>(scripted[i].size());
    cell.metrics = oracle_metrics({sum.tp / n, sum.fp / n, sum.fn / n});
    cells.push_back(std::move(cell));
  }
  return cells;
}

struct SweepOutput {
  std::string csv;
  std::string json_text;
  std::string table;
  long long dispatches = 0;
  long long mock_calls = 0;
};

SweepOutput run_fixture_sweep(const std::filesystem::path& cache_dir,
                              const std::filesystem::path& artifacts_dir) {
  PipelineConfig base = fixture_config();
  base.cache_dir = cache_dir;
  base.artifacts_dir = artifacts_dir;

  const auto configs = expand_sweep(base);
  DiscoveryOptions discovery;
  discovery.exclusion_globs = base.exclusion_globs;
  discovery.chars_per_token = base.chars_per_token;
  std::vector<ProjectManifest> projects;
  for (const auto& path : base.sweep->projects) projects.push_back(load_project(path, discovery));

  GatewayOptions options;
  options.cache_dir = base.cache_dir;
  options.mock_fixtures = base.mock_fixtures;
  Gateway gateway(std::move(options));

  SweepOptions sweep_options;
  sweep_options.artifacts_dir = base.artifacts_dir;
  sweep_options.worker_limit = base.worker_limit;
  const auto cells = run_sweep(configs, projects, base.runs, gateway, sweep_options);

  SweepOutput out;
  out.csv = emit_report(cells, ReportFormat::csv);
  out.json_text = emit_report(cells, ReportFormat::json);
  out.table = emit_report(cells, ReportFormat::table_text);
  out.dispatches = gateway.dispatch_count();
  out.mock_calls = gateway.mock().call_count();
  return out;
}

void write_goldens_from_oracle() {
  const auto configs = expand_sweep(fixture_config());
  const auto cells = oracle_cells(configs);
  write_text_file("tests/golden/sweep/sweep.csv", emit_report(cells, ReportFormat::csv));
  write_text_file("tests/golden/sweep/sweep.json", emit_report(cells, ReportFormat::json));
  write_text_file("tests/golden/sweep/sweep.txt", emit_report(cells, ReportFormat::table_text));
  std::puts("golden sweep reports rewritten from oracle cells");
}

void criterion_mock_sweep() {
  const auto start = std::chrono::steady_clock::now();
  TempDir tmp;

  const SweepOutput pipeline = run_fixture_sweep(tmp / "cache", tmp / "artifacts");

  // Route 1: the independent set-intersection oracle over the scripted runs.
  const auto configs = expand_sweep(fixture_config());
  const auto oracle = oracle_cells(configs);
  require(emit_report(oracle, ReportFormat::csv) == pipeline.csv,
          "pipeline csv differs from oracle-computed csv");
  require(emit_report(oracle, ReportFormat::json) == pipeline.json_text,
          "pipeline json differs from oracle-computed json");
  require(emit_report(oracle, ReportFormat::table_text) == pipeline.table,
          "pipeline table differs from oracle-computed table");

  // Route 2: the frozen golden files.
  require(pipeline.csv == read_text_file("tests/golden/sweep/sweep.csv"),
          "sweep.csv differs from golden");
  require(pipeline.json_text == read_text_file("tests/golden/sweep/sweep.json"),
          "sweep.json differs from golden");
  require(pipeline.table == read_text_file("tests/golden/sweep/sweep.txt"),
          "sweep.txt differs from golden");

  require(seconds_since(start) < 10.0, "mock sweep exceeded 10 seconds");
}

// ---------------------------------------------------------------------------
// Criterion 4: parser property suite.

std::string random_identifier(std::mt19937& rng, bool allow_params) {
  static const char* stems[] = {"getPrice", "swap",  "sync",   "borrow", "deposit",
                                "liquidate", "repay", "settle", "mint",   "burnAsset"};
  std::string name = stems[rng() % 10];
  if (allow_params && rng() % 3 == 0) name += "(address,uint256)";
  return name;
}

void criterion_parser_properties() {
  std::mt19937 rng(424242);
  int cases = 0;
  for (int iteration = 0; iteration < 600; ++iteration, ++cases) {
    // Build the embedded array and the expected vulnerable-true subsequence.
    nlohmann::json array = nlohmann::json::array();
    std::vector<Finding> expected;
    const size_t entries = rng() % 7;
    for (size_t e = 0; e < entries; ++e) {
      const bool vulnerable = rng() % 3 != 0;
      nlohmann::json entry;
      entry["vulnerable"] = (rng() % 2 == 0) ? nlohmann::json(vulnerable)
                                             : nlohmann::json(vulnerable ? "yes" : "no");
      entry["function"] = random_identifier(rng, true);
      entry["contract"] = std::string(1, static_cast<char>('A' + rng() % 5)) + "Contract";
      if (rng() % 4 != 0) entry["beneficiary"] = "attacker";
      if (rng() % 4 != 0) entry["victim"] = "users";
      entry["reason"] = "reason " + std::to_string(rng() % 1000);
      array.push_back(entry);
      if (vulnerable) {
        Finding f;
        f.function_name = entry["function"].get<std::string>();
        f.contract_name = entry["contract"].get<std::string>();
        f.beneficiary = entry.contains("beneficiary") ? "attacker" : "";
        f.victim = entry.contains("victim") ? "users" : "";
        f.reason = entry["reason"].get<std::string>();
        expected.push_back(f);
      }
    }

    const std::string body = array.dump(rng() % 2 == 0 ? -1 : 2);
    std::string document;
    switch (rng() % 5) {
      case 0: document = body; break;
      case 1:
        document = "The audit identified the following issues.\n" + body +
                   "\nLet me know if anything is unclear.";
        break;
      case 2: document = "```json\n" + body + "\n```"; break;
      case 3:
        document = "Summary of the review follows.\n```\n" + body + "\n```\nEnd of report.";
        break;
      default:
        // Balanced-but-unparseable wrapper around the payload.
        document = "{ analysis notes: " + body + " end of notes }";
        break;
    }

    std::vector<Finding> parsed;
    try {
      parsed = parse_findings(document);
    } catch (const ParseFailure&) {
      throw CheckFailure("unexpected ParseFailure on case " + std::to_string(cases));
    }
    require(parsed.size() == expected.size(),
            "finding count mismatch on case " + std::to_string(cases));
    for (size_t k = 0; k < parsed.size(); ++k) {
      require(parsed[k].function_name == expected[k].function_name, "function mismatch");
      require(parsed[k].contract_name == expected[k].contract_name, "contract mismatch");
      require(parsed[k].beneficiary == expected[k].beneficiary, "beneficiary mismatch");
      require(parsed[k].victim == expected[k].victim, "victim mismatch");
      require(parsed[k].reason == expected[k].reason, "reason mismatch");
      require(parsed[k].vulnerable, "parse returned a non-vulnerable finding");
    }

    // Dedupe idempotence and key distinctness on the parsed set.
    const auto once = dedupe_findings(parsed);
    const auto twice = dedupe_findings(once);
    require(once.size() == twice.size(), "dedupe not idempotent (size)");
    for (size_t a = 0; a < once.size(); ++a) {
      require(once[a].function_name == twice[a].function_name, "dedupe not idempotent (order)");
      for (size_t b = a + 1; b < once.size(); ++b) {
        require(normalized_key(once[a].contract_name, once[a].function_name) !=
                    normalized_key(once[b].contract_name, once[b].function_name),
                "dedupe left duplicate keys");
      }
    }
  }
  require(cases >= 500, "fewer than 500 generated cases");
}

// ---------------------------------------------------------------------------
// Criterion 5: matching equals the brute-force pairwise oracle.

ConfusionCounts pairwise_oracle(const std::vector<Finding>& findings,
                                const std::vector<GroundTruthEntry>& truth) {
  KeySet fk, tk;
  for (const auto& f : findings) {
    auto key = oracle_normalize({f.contract_name, f.function_name});
    bool duplicate = false;
    for (const auto& existing : fk) duplicate = duplicate || existing == key;
    if (!duplicate) fk.push_back(key);
  }
  for (const auto& t : truth) {
    auto key = oracle_normalize({t.contract_name, t.function_name});
    bool duplicate = false;
    for (const auto& existing : tk) duplicate = duplicate || existing == key;
    if (!duplicate) tk.push_back(key);
  }
  ConfusionCounts counts;
  for (const auto& key : fk) {
    bool matched = false;
    for (const auto& expected : tk) matched = matched || expected == key;
    matched ? counts.tp += 1 : counts.fp += 1;
  }
  for (const auto& expected : tk) {
    bool matched = false;
    for (const auto& key : fk) matched = matched || key == expected;
    if (!matched) counts.fn += 1;
  }
  return counts;
}

void criterion_matching_oracle() {
  // Exhaustive over an 8-key universe drawn from a 4-symbol alphabet:
  // contracts {a, b}, functions {a, b, c, d}. Every subset pair is covered,
  // so every findings/truth set of up to 8 entries over this universe is hit.
  const char* symbols = "abcd";
  std::vector<std::pair<std::string, std::string>> universe;
  for (int c = 0; c < 2; ++c) {
    for (int f = 0; f < 4; ++f) {
      universe.emplace_back(std::string(1, symbols[c]), std::string(1, symbols[f]));
    }
  }

  for (unsigned fmask = 0; fmask < 256; ++fmask) {
    for (unsigned tmask = 0; tmask < 256; ++tmask) {
      std::vector<Finding> findings;
      std::vector<GroundTruthEntry> truth;
      for (size_t bit = 0; bit < 8; ++bit) {
        if (fmask & (1u << bit)) {
          Finding f;
          f.contract_name = universe[bit].first;
          f.function_name = universe[bit].second;
          f.reason = "r";
          findings.push_back(f);
        }
        if (tmask & (1u << bit)) {
          truth.push_back({universe[bit].first, universe[bit].second, ""});
        }
      }
      const ConfusionCounts actual = match_findings(findings, truth);
      const ConfusionCounts expected = pairwise_oracle(findings, truth);
      require(actual.tp == expected.tp && actual.fp == expected.fp && actual.fn == expected.fn,
              "exhaustive case mismatch at fmask=" + std::to_string(fmask) +
                  " tmask=" + std::to_string(tmask));
      require(actual.tp + actual.fn == static_cast<double>(truth.size()),
              "tp + fn != |truth| in exhaustive sweep");
    }
  }

  // Randomized sets over the full 16-key universe with noisy spellings.
  std::mt19937 rng(31337);
  for (int iteration = 0; iteration < 20000; ++iteration) {
    std::vector<Finding> findings;
    const size_t nf = rng() % 9;
    for (size_t k = 0; k < nf; ++k) {
      std::string contract(1, symbols[rng() % 4]);
      std::string function(1, symbols[rng() % 4]);
      if (rng() % 3 == 0) contract = " " + contract + " ";
      if (rng() % 3 == 0) function += "(uint256)";
      if (rng() % 2 == 0) {
        for (auto& ch : contract) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      }
      Finding f;
      f.contract_name = contract;
      f.function_name = function;
      f.reason = "r";
      findings.push_back(f);
    }
    std::vector<GroundTruthEntry> truth;
    std::set<std::pair<std::string, std::string>> used;
    const size_t nt = rng() % 9;
    for (size_t k = 0; k < nt; ++k) {
      std::pair<std::string, std::string> key{std::string(1, symbols[rng() % 4]),
                                              std::string(1, symbols[rng() % 4])};
      if (used.insert(key).second) truth.push_back({key.first, key.second, ""});
    }

    const auto deduped = dedupe_findings(findings);
    const ConfusionCounts actual = match_findings(deduped, truth);
    const ConfusionCounts expected = pairwise_oracle(findings, truth);
    require(actual.tp == expected.tp && actual.fp == expected.fp && actual.fn == expected.fn,
            "random case mismatch at iteration " + std::to_string(iteration));
    require(actual.tp + actual.fn == static_cast<double>(truth.size()),
            "tp + fn != |truth| on random case");
  }
}

// ---------------------------------------------------------------------------
// Criterion 6: split conservation on random multi-contract files.

void criterion_split_conservation() {
  std::mt19937 rng(90210);
  auto random_decl = [&](int index) {
    const char* kinds[] = {"contract", "library", "interface"};
    std::string decl = std::string(kinds[rng() % 3]) + " D" + std::to_string(index) + " {\n";
    const int lines = 1 + static_cast<int>(rng() % 40);
    for (int l = 0; l < lines; ++l) {
      switch (rng() % 4) {
        case 0: decl += "    uint256 v" + std::to_string(l) + ";\n"; break;
        case 1: decl += "    // note: contract keyword inside a comment\n"; break;
        case 2: decl += "    string s" + std::to_string(l) + " = \"interface in a string\";\n"; break;
        default: decl += "    function f" + std::to_string(l) + "() public {}\n"; break;
      }
    }
    decl += "}\n";
    return decl;
  };

  for (int iteration = 0; iteration < 250; ++iteration) {
    std::string text;
    if (rng() % 2 == 0) text += "pragma solidity ^0.8.0;\n/* header comment */\n";
    const int decls = 1 + static_cast<int>(rng() % 8);
    for (int d = 0; d < decls; ++d) text += random_decl(d);

    SourceUnit unit;
    unit.unit_id = "case.sol";
    unit.text = text;
    unit.estimated_tokens = estimate_tokens(text);

    const long long budget = 20 + static_cast<long long>(rng() % 700);
    const auto chunks = split_oversized(unit, budget);
    require(!chunks.empty(), "split produced no chunks");

    std::string reassembled;
    for (const auto& chunk : chunks) {
      reassembled += chunk.text;
      require(chunk.estimated_tokens == estimate_tokens(chunk.text),
              "chunk estimate out of sync with its text");
      if (!chunk.oversized) {
        require(chunk.estimated_tokens <= budget, "non-flagged chunk exceeds the budget");
      }
    }
    require(reassembled == unit.text,
            "chunks do not concatenate to the original at iteration " + std::to_string(iteration));
  }
}

// ---------------------------------------------------------------------------
// Criterion 7: warm-cache replay with zero provider dispatches.

void criterion_cache_replay() {
  TempDir tmp;
  const auto cache_dir = tmp / "cache";

  const SweepOutput first = run_fixture_sweep(cache_dir, tmp / "artifacts1");
  require(first.dispatches > 0, "first sweep performed no provider dispatches");

  const SweepOutput second = run_fixture_sweep(cache_dir, tmp / "artifacts2");
  require(second.dispatches == 0, "second sweep dispatched to the provider (" +
                                      std::to_string(second.dispatches) + " calls)");
  require(second.mock_calls == 0, "second sweep reached the mock provider");
  require(first.csv == second.csv, "csv reports differ across replays");
  require(first.json_text == second.json_text, "json reports differ across replays");
  require(first.table == second.table, "table reports differ across replays");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1 && std::string(argv[1]) == "--update-golden") {
    write_goldens_from_oracle();
    return 0;
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric reproduction on frozen reference counts", criterion_metric_reproduction},
      {2, "golden prompt templates", criterion_golden_prompts},
      {3, "mock end-to-end sweep matches the oracle-derived golden report", criterion_mock_sweep},
      {4, "parser property suite", criterion_parser_properties},
      {5, "matching oracle equivalence", criterion_matching_oracle},
      {6, "split conservation", criterion_split_conservation},
      {7, "cache replay", criterion_cache_replay},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    try {
      criterion.body();
      std::printf("PASS criterion %d: %s\n", criterion.id, criterion.name);
    } catch (const std::exception& e) {
      std::printf("FAIL criterion %d: %s -- %s\n", criterion.id, criterion.name, e.what());
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}
