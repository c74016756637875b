#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pctdialog {

/// Kinds of schema violations reported by the validate_* functions.
enum class IssueCode {
  // profile / generic records
  MissingField,
  EmptyField,
  WrongShape,
  // stage plans
  MissingStageKey,
  EmptyStage,
  UnknownOption,
  // complexity traits
  UnknownCharacteristic,
  DuplicateCharacteristic,
  CharacteristicCount,
  // storylines
  ProportionViolation,
  // transcripts
  EmptyTranscript,
  TurnGap,
  NonAlternatingRoles,
  UnknownRole,
  EmptyContent,
  MissingStage,
  StageOutOfRange,
  StageRegression,
  StageTurnLimitExceeded,
  WrongTurnCount,
  TooManyTurns,
  // scores
  UnknownMetricName,
  MissingMetric,
  DuplicateMetric,
  OutOfRangeScore,
  NonIntegerScore,
  IllegalZeroScore,
  MissingItem,
  DuplicateItem,
  UnknownItem,
  // filter decisions
  UnparseableDecision,
};

std::string_view to_string(IssueCode code);

/// One violated constraint. `field` names the offending key when there is one;
/// `stage` and `limit` are filled for stage-scoped checks.
struct Issue {
  IssueCode code;
  std::string field;
  std::string detail;
  int stage = 0;
  int limit = 0;

  /// Renders as e.g. `EmptyField(desired_outcome)` or `StageTurnLimitExceeded(1, 2)`.
  std::string to_string() const;
};

/// Thrown by validators. Carries every violated constraint, not just the first.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Issue> issues);
  explicit ValidationError(Issue issue) : ValidationError(std::vector<Issue>{std::move(issue)}) {}

  const std::vector<Issue>& issues() const noexcept { return issues_; }
  bool has(IssueCode code) const noexcept;
  const Issue* find(IssueCode code) const noexcept;

 private:
  std::vector<Issue> issues_;
};

enum class GatewayErrorKind { Timeout, RateLimited, AuthFailure, BadRequest, TransportError };

std::string_view to_string(GatewayErrorKind kind);

/// Failure of a chat completion after the retry policy has been applied.
class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrorKind kind, std::string message, int attempts, int http_status = 0);

  GatewayErrorKind kind() const noexcept { return kind_; }
  int attempts() const noexcept { return attempts_; }
  int http_status() const noexcept { return http_status_; }

 private:
  GatewayErrorKind kind_;
  int attempts_;
  int http_status_;
};

enum class ExtractionErrorKind { NoJsonFound, UnbalancedBrackets, ShapeMismatch, InvalidJson };

std::string_view to_string(ExtractionErrorKind kind);

/// No JSON value of the expected shape could be recovered from model output.
class ExtractionError : public std::runtime_error {
 public:
  ExtractionError(ExtractionErrorKind kind, std::string raw_text);

  ExtractionErrorKind kind() const noexcept { return kind_; }
  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  ExtractionErrorKind kind_;
  std::string raw_text_;
};

/// The repair loop ran out of attempts. Holds every raw model output seen.
class ValidationExhausted : public std::runtime_error {
 public:
  ValidationExhausted(std::string last_error, std::vector<std::string> raw_outputs);

  const std::string& last_error() const noexcept { return last_error_; }
  const std::vector<std::string>& raw_outputs() const noexcept { return raw_outputs_; }
  int attempts() const noexcept { return static_cast<int>(raw_outputs_.size()); }

 private:
  std::string last_error_;
  std::vector<std::string> raw_outputs_;
};

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StoreErrorKind { StoreUnavailable, DuplicateRecordId, CorruptManifest, UnknownCase, ConfigMismatch };

std::string_view to_string(StoreErrorKind kind);

class StoreError : public std::runtime_error {
 public:
  StoreError(StoreErrorKind kind, const std::string& message);
  StoreErrorKind kind() const noexcept { return kind_; }

 private:
  StoreErrorKind kind_;
};

}  // namespace pctdialog
