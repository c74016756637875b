#pragma once

#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "pctdialog/extract.hpp"
#include "pctdialog/gateway.hpp"

namespace pctdialog {

inline constexpr int kDefaultRepairAttempts = 3;

template <class T>
struct Repaired {
  T value;
  int attempts = 1;
  std::vector<std::string> raw_outputs;
};

/// Text shown to the model after a rejected answer.
std::string repair_instruction(const std::string& error);

/// complete_chat -> parse -> accept, re-prompting with the parse error appended
/// as a user message until `parse` succeeds or `max_attempts` answers have been
/// rejected. `parse` signals rejection by throwing ValidationError or
/// ExtractionError; anything else (including GatewayError) propagates.
template <class Parse>
auto ask_with_repair_text(ChatGateway& gateway, ChatRequest request, Parse&& parse, int max_attempts)
    -> Repaired<std::invoke_result_t<Parse&, const std::string&>> {
  using T = std::invoke_result_t<Parse&, const std::string&>;
  std::vector<std::string> raw_outputs;
  std::string last_error = "no attempts made";
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    auto response = gateway.complete_chat(request);
    raw_outputs.push_back(response.content);
    try {
      T value = parse(response.content);
      return Repaired<T>{std::move(value), attempt, std::move(raw_outputs)};
    } catch (const ValidationError& e) {
      last_error = e.what();
    } catch (const ExtractionError& e) {
      last_error = std::string(e.what()) + " (expected a JSON value in the requested format)";
    }
    request.messages.push_back(ChatMessage{MessageRole::Assistant, response.content});
    request.messages.push_back(ChatMessage{MessageRole::User, repair_instruction(last_error)});
  }
  throw ValidationExhausted(last_error, std::move(raw_outputs));
}

/// Structured variant: extracts JSON of `shape` from each answer, then runs `validate`.
template <class Validate>
auto ask_with_repair(ChatGateway& gateway, ChatRequest request, JsonShape shape, Validate&& validate,
                     int max_attempts = kDefaultRepairAttempts)
    -> Repaired<std::invoke_result_t<Validate&, const Json&>> {
  return ask_with_repair_text(
      gateway, std::move(request),
      [&](const std::string& raw) { return validate(extract_structured(raw, shape)); }, max_attempts);
}

}  // namespace pctdialog
