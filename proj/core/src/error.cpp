#include "pctdialog/error.hpp"

#include <algorithm>

namespace pctdialog {

std::string_view to_string(IssueCode code) {
  switch (code) {
    case IssueCode::MissingField: return "MissingField";
    case IssueCode::EmptyField: return "EmptyField";
    case IssueCode::WrongShape: return "WrongShape";
    case IssueCode::MissingStageKey: return "MissingStageKey";
    case IssueCode::EmptyStage: return "EmptyStage";
    case IssueCode::UnknownOption: return "UnknownOption";
    case IssueCode::UnknownCharacteristic: return "UnknownCharacteristic";
    case IssueCode::DuplicateCharacteristic: return "DuplicateCharacteristic";
    case IssueCode::CharacteristicCount: return "CharacteristicCount";
    case IssueCode::ProportionViolation: return "ProportionViolation";
    case IssueCode::EmptyTranscript: return "EmptyTranscript";
    case IssueCode::TurnGap: return "TurnGap";
    case IssueCode::NonAlternatingRoles: return "NonAlternatingRoles";
    case IssueCode::UnknownRole: return "UnknownRole";
    case IssueCode::EmptyContent: return "EmptyContent";
    case IssueCode::MissingStage: return "MissingStage";
    case IssueCode::StageOutOfRange: return "StageOutOfRange";
    case IssueCode::StageRegression: return "StageRegression";
    case IssueCode::StageTurnLimitExceeded: return "StageTurnLimitExceeded";
    case IssueCode::WrongTurnCount: return "WrongTurnCount";
    case IssueCode::TooManyTurns: return "TooManyTurns";
    case IssueCode::UnknownMetricName: return "UnknownMetricName";
    case IssueCode::MissingMetric: return "MissingMetric";
    case IssueCode::DuplicateMetric: return "DuplicateMetric";
    case IssueCode::OutOfRangeScore: return "OutOfRangeScore";
    case IssueCode::NonIntegerScore: return "NonIntegerScore";
    case IssueCode::IllegalZeroScore: return "IllegalZeroScore";
    case IssueCode::MissingItem: return "MissingItem";
    case IssueCode::DuplicateItem: return "DuplicateItem";
    case IssueCode::UnknownItem: return "UnknownItem";
    case IssueCode::UnparseableDecision: return "UnparseableDecision";
  }
  return "Unknown";
}

std::string Issue::to_string() const {
  std::string out(pctdialog::to_string(code));
  std::string args;
  switch (code) {
    case IssueCode::StageTurnLimitExceeded:
      args = std::to_string(stage) + ", " + std::to_string(limit);
      break;
    case IssueCode::UnknownOption:
      args = std::to_string(stage) + ", \"" + field + "\"";
      break;
    case IssueCode::EmptyStage:
    case IssueCode::StageRegression:
      args = std::to_string(stage);
      break;
    default:
      args = field;
  }
  if (!args.empty()) out += "(" + args + ")";
  if (!detail.empty()) out += ": " + detail;
  return out;
}

namespace {
std::string join_issues(const std::vector<Issue>& issues) {
  std::string msg;
  for (const auto& issue : issues) {
    if (!msg.empty()) msg += "; ";
    msg += issue.to_string();
  }
  return msg;
}
}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

bool ValidationError::has(IssueCode code) const noexcept { return find(code) != nullptr; }

const Issue* ValidationError::find(IssueCode code) const noexcept {
  auto it = std::find_if(issues_.begin(), issues_.end(), [&](const Issue& i) { return i.code == code; });
  return it == issues_.end() ? nullptr : &*it;
}

std::string_view to_string(GatewayErrorKind kind) {
  switch (kind) {
    case GatewayErrorKind::Timeout: return "Timeout";
    case GatewayErrorKind::RateLimited: return "RateLimited";
    case GatewayErrorKind::AuthFailure: return "AuthFailure";
    case GatewayErrorKind::BadRequest: return "BadRequest";
    case GatewayErrorKind::TransportError: return "TransportError";
  }
  return "Unknown";
}

GatewayError::GatewayError(GatewayErrorKind kind, std::string message, int attempts, int http_status)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      attempts_(attempts),
      http_status_(http_status) {}

std::string_view to_string(ExtractionErrorKind kind) {
  switch (kind) {
    case ExtractionErrorKind::NoJsonFound: return "NoJsonFound";
    case ExtractionErrorKind::UnbalancedBrackets: return "UnbalancedBrackets";
    case ExtractionErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ExtractionErrorKind::InvalidJson: return "InvalidJson";
  }
  return "Unknown";
}

ExtractionError::ExtractionError(ExtractionErrorKind kind, std::string raw_text)
    : std::runtime_error(std::string(to_string(kind))), kind_(kind), raw_text_(std::move(raw_text)) {}

ValidationExhausted::ValidationExhausted(std::string last_error, std::vector<std::string> raw_outputs)
    : std::runtime_error("ValidationExhausted after " + std::to_string(raw_outputs.size()) +
                         " attempt(s): " + last_error),
      last_error_(std::move(last_error)),
      raw_outputs_(std::move(raw_outputs)) {}

std::string_view to_string(StoreErrorKind kind) {
  switch (kind) {
    case StoreErrorKind::StoreUnavailable: return "StoreUnavailable";
    case StoreErrorKind::DuplicateRecordId: return "DuplicateRecordId";
    case StoreErrorKind::CorruptManifest: return "CorruptManifest";
    case StoreErrorKind::UnknownCase: return "UnknownCase";
    case StoreErrorKind::ConfigMismatch: return "ConfigMismatch";
  }
  return "Unknown";
}

StoreError::StoreError(StoreErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace pctdialog
