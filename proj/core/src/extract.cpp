#include "pctdialog/extract.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pctdialog {

namespace {

// Bodies of ``` fenced blocks, in order of appearance.
std::vector<std::string_view> fenced_blocks(std::string_view text) {
  std::vector<std::string_view> blocks;
  std::size_t pos = 0;
  while (true) {
    auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    auto body_start = text.find('\n', open + 3);
    if (body_start == std::string_view::npos) break;
    auto close = text.find("```", body_start + 1);
    if (close == std::string_view::npos) {
      blocks.push_back(text.substr(body_start + 1));
      break;
    }
    blocks.push_back(text.substr(body_start + 1, close - body_start - 1));
    pos = close + 3;
  }
  return blocks;
}

// Index one past the bracket matching text[start], or nullopt when unbalanced.
// Mismatched closers (e.g. `]` closing `{`) count as unbalanced.
std::optional<std::size_t> balanced_end(std::string_view text, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      stack.push_back(c == '{' ? '}' : ']');
    } else if (c == '}' || c == ']') {
      if (stack.empty() || stack.back() != c) return std::nullopt;
      stack.pop_back();
      if (stack.empty()) return i + 1;
    }
  }
  return std::nullopt;
}

struct ScanResult {
  std::optional<Json> value;
  bool saw_bracket = false;
  bool saw_mismatch = false;
  bool saw_unbalanced = false;
  bool saw_invalid = false;
};

void scan(std::string_view text, JsonShape expected, ScanResult& result) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto start = text.find_first_of("{[", pos);
    if (start == std::string_view::npos) return;
    result.saw_bracket = true;
    auto end = balanced_end(text, start);
    if (!end) {
      result.saw_unbalanced = true;
      pos = start + 1;
      continue;
    }
    auto candidate = text.substr(start, *end - start);
    auto parsed = Json::parse(candidate, nullptr, false);
    if (parsed.is_discarded()) parsed = Json::parse(strip_trailing_commas(candidate), nullptr, false);
    if (parsed.is_discarded()) {
      result.saw_invalid = true;
      pos = start + 1;
      continue;
    }
    const bool matches = expected == JsonShape::Object ? parsed.is_object() : parsed.is_array();
    if (matches) {
      result.value = std::move(parsed);
      return;
    }
    // Valid JSON of the wrong shape: skip the whole value so nested members are not picked.
    result.saw_mismatch = true;
    pos = *end;
  }
}

}  // namespace

std::string strip_trailing_commas(std::string_view json_text) {
  std::string out;
  out.reserve(json_text.size());
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < json_text.size(); ++i) {
    const char c = json_text[i];
    if (in_string) {
      out.push_back(c);
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < json_text.size() && (json_text[j] == ' ' || json_text[j] == '\n' || json_text[j] == '\r' ||
                                      json_text[j] == '\t'))
        ++j;
      if (j < json_text.size() && (json_text[j] == '}' || json_text[j] == ']')) continue;
    }
    out.push_back(c);
  }
  return out;
}

Json extract_structured(std::string_view text, JsonShape expected) {
  ScanResult result;
  for (auto block : fenced_blocks(text)) {
    scan(block, expected, result);
    if (result.value) return std::move(*result.value);
  }
  scan(text, expected, result);
  if (result.value) return std::move(*result.value);

  ExtractionErrorKind kind = ExtractionErrorKind::NoJsonFound;
  if (result.saw_mismatch) kind = ExtractionErrorKind::ShapeMismatch;
  else if (result.saw_unbalanced) kind = ExtractionErrorKind::UnbalancedBrackets;
  else if (result.saw_invalid) kind = ExtractionErrorKind::InvalidJson;
  else if (result.saw_bracket) kind = ExtractionErrorKind::InvalidJson;
  throw ExtractionError(kind, std::string(text));
}

}  // namespace pctdialog
