#include "pomaudit/auditor.hpp"

#include <set>

#include "pomaudit/errors.hpp"
#include "pomaudit/extraction.hpp"
#include "pomaudit/text_util.hpp"

namespace pomaudit {

namespace {

constexpr const char* kAuditorSystem =
    "You are an experienced expert on auditing price oracle manipulation problems. Your task is "
    "to conduct a thorough audit on the provided solidity file to identify all potential price "
    "oracle manipulation vulnerabilities.";

constexpr const char* kZeroShotSystem =
    "You are an experienced expert on auditing price oracle manipulation problems. Your task is "
    "to conduct a thorough audit on the provided solidity file step by step to identify all "
    "potential price oracle manipulation vulnerabilities.";

constexpr const char* kFieldGlosses =
    "- vulnerable should be yes if the vulnerability exists, otherwise no.\n"
    "- beneficiary should be the role who will gain in the vulnerability.\n"
    "- victim should be the role who will suffer a loss or disadvantage in the vulnerability.\n"
    "- reason should describe why you think it is vulnerable and how to manipulate the price "
    "oracle to exploit this vulnerability.";

const std::string kOutputFormatBlock =
    std::string(
        "Analyze the smart contract delimited with ```. Respond all the vulnerabilities with the "
        "following JSON format: {vulnerable: yes, function: functionName, contract: contract name "
        "of the vulnerable function, beneficiary: ..., victim: ..., reason:...}\n") +
    kFieldGlosses;

const std::string kZeroShotFormatBlock =
    std::string(
        "Analyze the smart contract delimited with ```. Respond with all the vulnerabilities with "
        "the following JSON format: {vulnerable: yes, function: functionName, contract: contract "
        "name of the vulnerable function, beneficiary: ..., victim: ..., reason:...}\n") +
    kFieldGlosses;

// yes/no/true/false (case-insensitive) or a JSON boolean.
std::optional<bool> coerce_vulnerable(const nlohmann::json& value) {
  if (value.is_boolean()) return value.get<bool>();
  if (value.is_string()) {
    const std::string lowered = to_lower(trim(value.get<std::string>()));
    if (lowered == "yes" || lowered == "true") return true;
    if (lowered == "no" || lowered == "false") return false;
  }
  return std::nullopt;
}

std::string string_field(const nlohmann::json& object, const char* name) {
  if (!object.contains(name)) return "";
  const auto& value = object.at(name);
  return value.is_string() ? trim(value.get<std::string>()) : "";
}

void collect_findings(const nlohmann::json& node, std::vector<Finding>& out,
                      ParseDiagnostics& diag) {
  if (node.is_array()) {
    for (const auto& item : node) collect_findings(item, out, diag);
    return;
  }
  if (!node.is_object()) return;

  if (node.contains("vulnerable") && node.contains("function")) {
    ++diag.objects_considered;
    const auto vulnerable = coerce_vulnerable(node.at("vulnerable"));
    const std::string function_name = string_field(node, "function");
    if (!vulnerable || function_name.empty()) {
      ++diag.dropped_invalid;
      return;
    }
    if (!*vulnerable) {
      ++diag.dropped_not_vulnerable;
      return;
    }
    Finding finding;
    finding.vulnerable = true;
    finding.function_name = function_name;
    finding.contract_name = string_field(node, "contract");
    finding.beneficiary = string_field(node, "beneficiary");
    finding.victim = string_field(node, "victim");
    finding.reason = string_field(node, "reason");
    if (finding.reason.empty()) {
      ++diag.dropped_empty_reason;
      return;
    }
    out.push_back(std::move(finding));
    return;
  }
  for (const auto& [key, value] : node.items()) {
    (void)key;
    collect_findings(value, out, diag);
  }
}

}  // namespace

nlohmann::json Finding::to_json() const {
  return nlohmann::json{{"vulnerable", vulnerable},       {"function", function_name},
                        {"contract", contract_name},      {"beneficiary", beneficiary},
                        {"victim", victim},               {"reason", reason}};
}

Finding Finding::from_json(const nlohmann::json& j) {
  Finding finding;
  finding.vulnerable = j.value("vulnerable", true);
  finding.function_name = j.value("function", "");
  finding.contract_name = j.value("contract", "");
  finding.beneficiary = j.value("beneficiary", "");
  finding.victim = j.value("victim", "");
  finding.reason = j.value("reason", "");
  return finding;
}

nlohmann::json ParseDiagnostics::to_json() const {
  return nlohmann::json{{"candidates", candidates},
                        {"objects_considered", objects_considered},
                        {"dropped_not_vulnerable", dropped_not_vulnerable},
                        {"dropped_empty_reason", dropped_empty_reason},
                        {"dropped_invalid", dropped_invalid},
                        {"parse_failed", parse_failed}};
}

std::string to_string(AuditMode mode) {
  return mode == AuditMode::cot_pipeline ? "cot_pipeline" : "zero_shot_baseline";
}

AuditMode audit_mode_from_string(const std::string& name) {
  if (name == "cot_pipeline") return AuditMode::cot_pipeline;
  if (name == "zero_shot_baseline") return AuditMode::zero_shot_baseline;
  throw ConfigError("unknown audit mode: " + name);
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::ok: return "ok";
    case RunStatus::provider_failed: return "provider_failed";
    case RunStatus::skipped_budget: return "skipped_budget";
  }
  return "ok";
}

nlohmann::json AuditRun::to_json() const {
  nlohmann::json findings_json = nlohmann::json::array();
  for (const auto& finding : findings) findings_json.push_back(finding.to_json());
  return nlohmann::json{{"unit_id", unit_id},
                        {"run_index", run_index},
                        {"auditor_model", auditor_model},
                        {"mode", to_string(mode)},
                        {"status", to_string(status)},
                        {"error", error_message},
                        {"system", system_text},
                        {"user", user_text},
                        {"raw_response", raw_response},
                        {"findings", findings_json},
                        {"diagnostics", diagnostics.to_json()}};
}

std::pair<std::string, std::string> assemble_audit_prompt(const std::string& cot_text,
                                                          const std::string& source_text) {
  if (cot_text.empty() || source_text.empty()) {
    throw PipelineError("audit prompt needs both a CoT text and a source text");
  }
  return {kAuditorSystem, cot_text + "\n\n```" + source_text + "```\n\n" + kOutputFormatBlock};
}

std::pair<std::string, std::string> assemble_zero_shot_prompt(const std::string& source_text) {
  if (source_text.empty()) throw PipelineError("zero-shot prompt needs a source text");
  return {kZeroShotSystem, "```" + source_text + "```\n\n" + kZeroShotFormatBlock};
}

std::vector<Finding> parse_findings(const std::string& raw) {
  ParseDiagnostics diagnostics;
  return parse_findings(raw, diagnostics);
}

std::vector<Finding> parse_findings(const std::string& raw, ParseDiagnostics& diagnostics) {
  std::vector<Finding> findings;
  if (trim(raw).empty()) return findings;

  Extraction extraction = extract_structured(raw);
  diagnostics.candidates = extraction.candidates;
  if (extraction.candidates == 0) {
    throw ParseFailure("no bracket-balanced candidates in auditor response");
  }
  for (const auto& value : extraction.values) collect_findings(value, findings, diagnostics);
  return findings;
}

std::string normalize_identifier(const std::string& name) { return to_lower(trim(name)); }

std::string normalize_function_name(const std::string& name) {
  std::string bare = name;
  if (const size_t paren = bare.find('('); paren != std::string::npos) {
    bare.erase(paren);
  }
  return normalize_identifier(bare);
}

std::pair<std::string, std::string> normalized_key(const std::string& contract_name,
                                                   const std::string& function_name) {
  return {normalize_identifier(contract_name), normalize_function_name(function_name)};
}

std::vector<Finding> dedupe_findings(const std::vector<Finding>& findings) {
  std::vector<Finding> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& finding : findings) {
    if (seen.insert(normalized_key(finding.contract_name, finding.function_name)).second) {
      out.push_back(finding);
    }
  }
  return out;
}

std::vector<AuditRun> audit_unit(const std::optional<std::string>& cot_text, const SourceUnit& unit,
                                 const ModelSpec& spec, Gateway& gateway, AuditMode mode, int runs,
                                 const RoleParams& params) {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (mode == AuditMode::cot_pipeline && (!cot_text || cot_text->empty())) {
    throw ConfigError("cot_pipeline mode requires a rendered CoT prompt");
  }

  const auto [system_text, user_text] =
      mode == AuditMode::cot_pipeline ? assemble_audit_prompt(*cot_text, unit.text)
                                      : assemble_zero_shot_prompt(unit.text);

  std::vector<AuditRun> out;
  out.reserve(static_cast<size_t>(runs));

  const long long budget = estimate_tokens(system_text, spec.chars_per_token) +
                           estimate_tokens(user_text, spec.chars_per_token) +
                           params.max_output_tokens;
  const bool over_budget = unit.oversized || budget > spec.context_window;

  for (int run_index = 0; run_index < runs; ++run_index) {
    AuditRun run;
    run.unit_id = unit.unit_id;
    run.run_index = run_index;
    run.auditor_model = spec.model_name;
    run.mode = mode;
    run.system_text = system_text;
    run.user_text = user_text;

    if (over_budget) {
      run.status = RunStatus::skipped_budget;
      run.error_message = "unit exceeds context budget (" + std::to_string(budget) + " > " +
                          std::to_string(spec.context_window) + " estimated tokens)";
      out.push_back(std::move(run));
      continue;
    }

    try {
      run.raw_response = gateway.complete(spec, system_text, user_text, params, run_index);
      try {
        run.findings = parse_findings(run.raw_response, run.diagnostics);
      } catch (const ParseFailure&) {
        run.diagnostics.parse_failed = true;
      }
    } catch (const BudgetExceeded& ex) {
      run.status = RunStatus::skipped_budget;
      run.error_message = ex.what();
    } catch (const PipelineError& ex) {
      run.status = RunStatus::provider_failed;
      run.error_message = ex.what();
    }
    out.push_back(std::move(run));
  }
  return out;
}

}  // namespace pomaudit
