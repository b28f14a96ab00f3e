#include "pomaudit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "pomaudit/errors.hpp"
#include "pomaudit/io_util.hpp"

namespace pomaudit {

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::string normalized_pair_key(const std::string& contract, const std::string& function) {
  return to_lower(trim(contract)) + "\x1f" + to_lower(trim(function));
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

}  // namespace

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::defihack: return "defihack";
    case DatasetKind::code4rena: return "code4rena";
    case DatasetKind::custom: return "custom";
  }
  return "custom";
}

DatasetKind dataset_from_string(const std::string& name) {
  if (name == "defihack") return DatasetKind::defihack;
  if (name == "code4rena") return DatasetKind::code4rena;
  if (name == "custom") return DatasetKind::custom;
  throw ConfigError("unknown dataset kind: " + name);
}

nlohmann::json ProjectManifest::to_json() const {
  nlohmann::json units_json = nlohmann::json::array();
  for (const auto& unit : units) {
    units_json.push_back({{"unit_id", unit.unit_id},
                          {"origin_file", unit.origin_file.generic_string()},
                          {"estimated_tokens", unit.estimated_tokens},
                          {"oversized", unit.oversized}});
  }
  nlohmann::json truth_json = nlohmann::json::array();
  for (const auto& entry : ground_truth) {
    truth_json.push_back({{"contract", entry.contract_name},
                          {"function", entry.function_name},
                          {"note", entry.note}});
  }
  return nlohmann::json{{"project_id", project_id},
                        {"dataset", to_string(dataset)},
                        {"units", units_json},
                        {"ground_truth", truth_json}};
}

std::vector<std::string> DiscoveryOptions::default_exclusion_globs() {
  return {"**/test/**", "**/tests/**", "**/mock/**", "**/mocks/**", "**/node_modules/**"};
}

std::vector<SourceUnit> discover_sources(const std::filesystem::path& root,
                                         const DiscoveryOptions& options) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw NoSourcesFound(root.string());

  std::vector<SourceUnit> units;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".sol") continue;
    const std::string rel = fs::relative(entry.path(), root).generic_string();
    const bool excluded = std::any_of(
        options.exclusion_globs.begin(), options.exclusion_globs.end(),
        [&](const std::string& pattern) { return glob_match(pattern, rel); });
    if (excluded) continue;

    SourceUnit unit;
    unit.unit_id = rel;
    unit.text = read_text_file(entry.path());
    if (unit.text.empty()) continue;
    unit.estimated_tokens = estimate_tokens(unit.text, options.chars_per_token);
    unit.origin_file = entry.path();
    units.push_back(std::move(unit));
  }
  if (units.empty()) throw NoSourcesFound(root.string());
  std::sort(units.begin(), units.end(),
            [](const auto& a, const auto& b) { return a.unit_id < b.unit_id; });
  return units;
}

std::vector<size_t> top_level_decl_offsets(const std::string& text) {
  enum class State { code, line_comment, block_comment, dquote, squote };
  State state = State::code;
  int depth = 0;
  std::vector<size_t> offsets;
  size_t word_start = std::string::npos;
  size_t last_abstract = std::string::npos;

  auto end_word = [&](size_t end) {
    if (word_start == std::string::npos) return;
    const std::string_view word(text.data() + word_start, end - word_start);
    if (depth == 0) {
      if (word == "contract" || word == "library" || word == "interface") {
        offsets.push_back(last_abstract != std::string::npos ? last_abstract : word_start);
        last_abstract = std::string::npos;
      } else if (word == "abstract") {
        last_abstract = word_start;
      } else {
        last_abstract = std::string::npos;
      }
    }
    word_start = std::string::npos;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    switch (state) {
      case State::code:
        if (is_ident_char(c)) {
          if (word_start == std::string::npos) word_start = i;
          continue;
        }
        end_word(i);
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
          state = State::line_comment;
          ++i;
        } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
          state = State::block_comment;
          ++i;
        } else if (c == '"') {
          state = State::dquote;
        } else if (c == '\'') {
          state = State::squote;
        } else if (c == '{') {
          ++depth;
          last_abstract = std::string::npos;
        } else if (c == '}') {
          if (depth > 0) --depth;
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
          last_abstract = std::string::npos;
        }
        break;
      case State::line_comment:
        if (c == '\n') state = State::code;
        break;
      case State::block_comment:
        if (c == '*' && i + 1 < text.size() && text[i + 1] == '/') {
          state = State::code;
          ++i;
        }
        break;
      case State::dquote:
        if (c == '\\') ++i;
        else if (c == '"') state = State::code;
        break;
      case State::squote:
        if (c == '\\') ++i;
        else if (c == '\'') state = State::code;
        break;
    }
  }
  end_word(text.size());
  return offsets;
}

std::vector<SourceUnit> split_oversized(const SourceUnit& unit, long long budget,
                                        double chars_per_token) {
  if (budget <= 0) throw ConfigError("split budget must be positive");
  if (estimate_tokens(unit.text, chars_per_token) <= budget) return {unit};

  std::vector<size_t> offsets = top_level_decl_offsets(unit.text);
  std::vector<std::string> segments;
  size_t prev = 0;
  for (size_t offset : offsets) {
    if (offset > prev) segments.push_back(unit.text.substr(prev, offset - prev));
    prev = offset;
  }
  segments.push_back(unit.text.substr(prev));

  // Greedy packing of consecutive segments.
  const double cpt = chars_per_token > 0 ? chars_per_token : 4.0;
  auto estimate_chars = [cpt](size_t chars) {
    return chars == 0 ? 0LL : static_cast<long long>(std::ceil(static_cast<double>(chars) / cpt));
  };
  std::vector<std::string> chunks;
  std::string current;
  for (auto& segment : segments) {
    if (current.empty()) {
      current = std::move(segment);
      continue;
    }
    if (estimate_chars(current.size() + segment.size()) <= budget) {
      current += segment;
    } else {
      chunks.push_back(std::move(current));
      current = std::move(segment);
    }
  }
  if (!current.empty()) chunks.push_back(std::move(current));

  std::vector<SourceUnit> out;
  for (size_t i = 0; i < chunks.size(); ++i) {
    SourceUnit chunk;
    chunk.unit_id = chunks.size() == 1 ? unit.unit_id
                                       : unit.unit_id + "#" + std::to_string(i + 1);
    chunk.text = std::move(chunks[i]);
    chunk.estimated_tokens = estimate_tokens(chunk.text, chars_per_token);
    chunk.origin_file = unit.origin_file;
    chunk.oversized = chunk.estimated_tokens > budget;
    out.push_back(std::move(chunk));
  }
  return out;
}

std::vector<GroundTruthEntry> load_ground_truth(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  std::istringstream in(content);
  std::string line;
  int line_number = 0;
  std::vector<GroundTruthEntry> entries;
  std::set<std::string> seen;

  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;

    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() < 2) {
      throw MalformedAnnotation(path.string(), line_number,
                                "expected contract<TAB>function<TAB>note");
    }
    GroundTruthEntry entry;
    entry.contract_name = trim(fields[0]);
    entry.function_name = trim(fields[1]);
    if (fields.size() >= 3) entry.note = trim(fields[2]);
    if (entry.contract_name.empty() || entry.function_name.empty()) {
      throw MalformedAnnotation(path.string(), line_number,
                                "contract and function must be non-empty");
    }
    const std::string key = normalized_pair_key(entry.contract_name, entry.function_name);
    if (!seen.insert(key).second) {
      throw DuplicateAnnotation(path.string(), line_number,
                                entry.contract_name + "." + entry.function_name);
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

ProjectManifest load_project(const std::filesystem::path& root, const DiscoveryOptions& options) {
  namespace fs = std::filesystem;
  ProjectManifest manifest;
  manifest.project_id = root.filename().string();
  if (manifest.project_id.empty()) manifest.project_id = root.parent_path().filename().string();

  const fs::path meta = root / "project.json";
  if (fs::exists(meta)) {
    nlohmann::json doc = nlohmann::json::parse(read_text_file(meta));
    if (doc.contains("project_id")) manifest.project_id = doc.at("project_id").get<std::string>();
    if (doc.contains("dataset")) manifest.dataset = dataset_from_string(doc.at("dataset").get<std::string>());
  }

  manifest.units = discover_sources(root, options);
  const fs::path truth = root / "ground_truth.tsv";
  if (fs::exists(truth)) manifest.ground_truth = load_ground_truth(truth);
  return manifest;
}

}  // namespace pomaudit
