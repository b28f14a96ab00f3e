#include "pomaudit/cot_prompt.hpp"

#include "pomaudit/errors.hpp"
#include "pomaudit/extraction.hpp"
#include "pomaudit/text_util.hpp"

namespace pomaudit {

namespace {

constexpr const char* kGeneratorSystem = "You are an experienced prompt engineer.";

constexpr const char* kGeneratorUserPrefix =
    "Your task is to provide a chain-of-thought prompt to an AI language model to accurately "
    "detect price oracle manipulation issues which could lead to financial losses or unfair "
    "advantages in the given smart contract step by step. Remember to base your generated prompt "
    "solely on the price oracle description in triple backticks ```. Do not make assumptions "
    "about external factors or systems not mentioned in the given information. ```";

constexpr const char* kGeneratorUserSuffix =
    "```. Return the prompt in the JSON format: {\"description\": \"<prompt description>\", "
    "\"steps\": [{\"step\": 1, \"description\": \"<step description>\", \"questions\": "
    "[\"<question>\"]}]}.";

// Pulls steps out of a parsed candidate; steps missing a description or any
// questions are dropped, everything else is renumbered 1..n in array order.
std::vector<CotStep> steps_from_json(const nlohmann::json& array) {
  std::vector<CotStep> steps;
  for (const auto& entry : array) {
    if (!entry.is_object()) continue;
    CotStep step;
    if (entry.contains("description") && entry.at("description").is_string()) {
      step.description = trim(entry.at("description").get<std::string>());
    }
    if (entry.contains("questions") && entry.at("questions").is_array()) {
      for (const auto& q : entry.at("questions")) {
        if (q.is_string()) {
          std::string question = trim(q.get<std::string>());
          if (!question.empty()) step.questions.push_back(std::move(question));
        }
      }
    }
    if (step.description.empty() || step.questions.empty()) continue;
    step.step_number = static_cast<int>(steps.size()) + 1;
    steps.push_back(std::move(step));
  }
  return steps;
}

}  // namespace

nlohmann::json CotPrompt::to_json() const {
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto& step : steps) {
    steps_json.push_back({{"step", step.step_number},
                          {"description", step.description},
                          {"questions", step.questions}});
  }
  return nlohmann::json{{"description", description},
                        {"steps", steps_json},
                        {"generator_model", generator_model},
                        {"knowledge_origin", to_string(knowledge_origin)}};
}

CotPrompt CotPrompt::from_json(const nlohmann::json& j) {
  CotPrompt prompt;
  prompt.description = j.at("description").get<std::string>();
  prompt.steps = steps_from_json(j.at("steps"));
  if (prompt.steps.empty()) throw EmptySteps("stored prompt has no usable steps");
  if (j.contains("generator_model")) prompt.generator_model = j.at("generator_model").get<std::string>();
  if (j.contains("knowledge_origin")) {
    prompt.knowledge_origin = knowledge_origin_from_string(j.at("knowledge_origin").get<std::string>());
  }
  return prompt;
}

std::pair<std::string, std::string> assemble_generation_prompt(const SynthesizedKnowledge& knowledge) {
  if (knowledge.definition_text.empty()) {
    throw PipelineError("knowledge definition must be non-empty");
  }
  return {kGeneratorSystem,
          kGeneratorUserPrefix + knowledge.definition_text + kGeneratorUserSuffix};
}

CotPrompt generate_cot_prompt(const SynthesizedKnowledge& knowledge, const ModelSpec& spec,
                              Gateway& gateway, const RoleParams& params) {
  auto [system_text, user_text] = assemble_generation_prompt(knowledge);
  const std::string raw = gateway.complete(spec, system_text, user_text, params, /*run_index=*/0);

  Extraction extraction = extract_structured(raw);
  for (const auto& value : extraction.values) {
    if (!value.is_object() || !value.contains("steps") || !value.at("steps").is_array()) continue;
    CotPrompt prompt;
    if (value.contains("description") && value.at("description").is_string()) {
      prompt.description = trim(value.at("description").get<std::string>());
    }
    if (prompt.description.empty()) continue;
    prompt.steps = steps_from_json(value.at("steps"));
    if (prompt.steps.empty()) {
      throw EmptySteps("generator response parsed but contains zero usable steps");
    }
    prompt.generator_model = spec.model_name;
    prompt.knowledge_origin = knowledge.origin;
    return prompt;
  }
  throw ParseFailure("generator response contains no extractable prompt structure");
}

std::string question_label(size_t index) {
  std::string label;
  size_t n = index;
  while (true) {
    label.insert(label.begin(), static_cast<char>('a' + n % 26));
    if (n < 26) break;
    n = n / 26 - 1;
  }
  return label;
}

std::string render_cot_prompt(const CotPrompt& prompt) {
  std::string out = prompt.description;
  for (const auto& step : prompt.steps) {
    out += "\nStep " + std::to_string(step.step_number) + ": " + step.description;
    for (size_t i = 0; i < step.questions.size(); ++i) {
      out += "\n  " + question_label(i) + ". " + step.questions[i];
    }
  }
  return out;
}

}  // namespace pomaudit
