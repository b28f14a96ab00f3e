#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pomaudit/corpus.hpp"
#include "pomaudit/gateway.hpp"
#include "pomaudit/model_spec.hpp"

namespace pomaudit {

// One auditor-reported vulnerability. parse_findings only ever returns entries
// with vulnerable = true; non-vulnerable and reason-less entries are dropped
// and tallied in the diagnostics.
struct Finding {
  bool vulnerable = true;
  std::string function_name;
  std::string contract_name;
  std::string beneficiary;
  std::string victim;
  std::string reason;

  nlohmann::json to_json() const;
  static Finding from_json(const nlohmann::json& j);
};

struct ParseDiagnostics {
  int candidates = 0;             // bracket-balanced regions found
  int objects_considered = 0;     // objects carrying vulnerable+function
  int dropped_not_vulnerable = 0;
  int dropped_empty_reason = 0;
  int dropped_invalid = 0;        // uncoercible vulnerable value or non-string function
  bool parse_failed = false;      // set by audit_unit when parsing raised

  nlohmann::json to_json() const;
};

enum class AuditMode { cot_pipeline, zero_shot_baseline };

std::string to_string(AuditMode mode);
AuditMode audit_mode_from_string(const std::string& name);

enum class RunStatus { ok, provider_failed, skipped_budget };

std::string to_string(RunStatus status);

struct AuditRun {
  std::string unit_id;
  int run_index = 0;
  std::string auditor_model;
  AuditMode mode = AuditMode::cot_pipeline;
  std::vector<Finding> findings;
  std::string raw_response;
  RunStatus status = RunStatus::ok;
  std::string error_message;
  std::string system_text;
  std::string user_text;
  ParseDiagnostics diagnostics;

  bool completed() const { return status == RunStatus::ok; }

  nlohmann::json to_json() const;  // the per-run transcript document
};

// (system_text, user_text) for the pipeline auditor role.
std::pair<std::string, std::string> assemble_audit_prompt(const std::string& cot_text,
                                                          const std::string& source_text);

// (system_text, user_text) for the zero-shot baseline; no knowledge and no
// generated CoT content appear.
std::pair<std::string, std::string> assemble_zero_shot_prompt(const std::string& source_text);

std::vector<Finding> parse_findings(const std::string& raw);
std::vector<Finding> parse_findings(const std::string& raw, ParseDiagnostics& diagnostics);

// Keeps the first finding per normalized (contract, function) key.
std::vector<Finding> dedupe_findings(const std::vector<Finding>& findings);

// Normalization shared by dedupe and ground-truth matching: trim + case-fold;
// function names additionally lose any parenthesized parameter list.
std::string normalize_identifier(const std::string& name);
std::string normalize_function_name(const std::string& name);
std::pair<std::string, std::string> normalized_key(const std::string& contract_name,
                                                   const std::string& function_name);

// Runs one source unit `runs` times through the gateway. Always returns
// exactly `runs` records; failed or budget-skipped runs are marked, never
// silently dropped.
std::vector<AuditRun> audit_unit(const std::optional<std::string>& cot_text, const SourceUnit& unit,
                                 const ModelSpec& spec, Gateway& gateway, AuditMode mode, int runs,
                                 const RoleParams& params = default_params(Role::auditor));

}  // namespace pomaudit
