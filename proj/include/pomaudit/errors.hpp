#pragma once

#include <stdexcept>
#include <string>

namespace pomaudit {

// Base for everything the pipeline can throw; the CLI maps these to exit code 2.
class PipelineError : public std::runtime_error {
 public:
  explicit PipelineError(const std::string& message) : std::runtime_error(message) {}
};

// Request would not fit the model's context window. Raised before any network I/O.
class BudgetExceeded : public PipelineError {
 public:
  BudgetExceeded(long long estimated_tokens, long long context_window)
      : PipelineError("prompt budget exceeded: estimated " + std::to_string(estimated_tokens) +
                      " prompt+output tokens against a " + std::to_string(context_window) +
                      "-token context window"),
        estimated_tokens(estimated_tokens),
        context_window(context_window) {}

  long long estimated_tokens;
  long long context_window;
};

// Provider call failed permanently (after retries for transient statuses).
class ProviderError : public PipelineError {
 public:
  ProviderError(const std::string& message, int http_status, std::string body_excerpt)
      : PipelineError(message + (http_status > 0 ? " (HTTP " + std::to_string(http_status) + ")" : "") +
                      (body_excerpt.empty() ? "" : ": " + body_excerpt)),
        http_status(http_status),
        body_excerpt(std::move(body_excerpt)) {}

  int http_status = 0;
  std::string body_excerpt;
};

// The provider credential environment variable is unset.
class AuthMissing : public PipelineError {
 public:
  explicit AuthMissing(const std::string& env_var)
      : PipelineError("missing provider credential: set " + env_var), env_var(env_var) {}

  std::string env_var;
};

// No structured content could be extracted from a model response.
class ParseFailure : public PipelineError {
 public:
  explicit ParseFailure(const std::string& message) : PipelineError(message) {}
};

// A generated prompt structure parsed but contained zero usable steps.
class EmptySteps : public PipelineError {
 public:
  explicit EmptySteps(const std::string& message) : PipelineError(message) {}
};

class EmptyKnowledgeSet : public PipelineError {
 public:
  explicit EmptyKnowledgeSet(const std::string& path)
      : PipelineError("no excerpt files found in " + path) {}
};

class MalformedExcerpt : public PipelineError {
 public:
  MalformedExcerpt(const std::string& path, int line, const std::string& what)
      : PipelineError(path + ":" + std::to_string(line) + ": " + what), path(path), line(line) {}

  std::string path;
  int line = 0;
};

class NoSourcesFound : public PipelineError {
 public:
  explicit NoSourcesFound(const std::string& root)
      : PipelineError("no .sol source files found under " + root) {}
};

class DuplicateAnnotation : public PipelineError {
 public:
  DuplicateAnnotation(const std::string& path, int line, const std::string& key)
      : PipelineError(path + ":" + std::to_string(line) + ": duplicate annotation for " + key),
        line(line) {}

  int line = 0;
};

class MalformedAnnotation : public PipelineError {
 public:
  MalformedAnnotation(const std::string& path, int line, const std::string& what)
      : PipelineError(path + ":" + std::to_string(line) + ": " + what), line(line) {}

  int line = 0;
};

class EmptyRunSet : public PipelineError {
 public:
  EmptyRunSet() : PipelineError("cannot average an empty run set") {}
};

class ConfigError : public PipelineError {
 public:
  explicit ConfigError(const std::string& message) : PipelineError(message) {}
};

}  // namespace pomaudit
