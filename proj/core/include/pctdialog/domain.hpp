#pragma once

// Domain values and their validators. Every value returned by a validate_*
// function satisfies its invariants; values are immutable once built and may
// be shared freely across workers.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pctdialog/catalog.hpp"
#include "pctdialog/error.hpp"

namespace pctdialog {

using Json = nlohmann::ordered_json;

// Limits enforced by the validators.
inline constexpr int kStage1TurnLimit = 2;
inline constexpr int kStage5TurnLimit = 4;
inline constexpr int kTwoAgentTurnCount = 20;
inline constexpr int kMaxScriptTurns = 60;
inline constexpr std::size_t kMaxCharacteristics = 5;
inline constexpr std::array<double, kStageCount> kStorylineTargetShares = {0.05, 0.30, 0.30, 0.30, 0.05};
inline constexpr double kStorylineShareTolerance = 0.10;

struct Question {
  std::string id;
  std::string text;
  std::string source;

  friend bool operator==(const Question&, const Question&) = default;
};

/// Throws ValidationError when the id or trimmed text is empty.
Question make_question(std::string id, std::string text, std::string source = "file");
Question question_from_json(const Json& raw);
Json to_json(const Question& q);

struct ClientProfile {
  std::vector<std::string> emotional_themes;
  std::vector<std::string> key_psychological_issues;
  std::vector<std::string> past_experiences;
  std::vector<std::string> patterns_and_behaviors;
  std::string desired_outcome;
  std::vector<std::string> contextual_factors;

  friend bool operator==(const ClientProfile&, const ClientProfile&) = default;
};

/// Checks all six fields; reports MissingField, EmptyField and WrongShape for every offender.
ClientProfile validate_profile(const Json& raw);
Json to_json(const ClientProfile& profile);

struct ComplexityTraits {
  bool applied = false;
  std::vector<int> selected;  // characteristic numbers, 1..30, in model order

  friend bool operator==(const ComplexityTraits&, const ComplexityTraits&) = default;
};

/// Parses `{"selected_characteristics": [...]}` from the model. Entries may be
/// numbers, numeric strings or the characteristic text. Result has applied = true.
ComplexityTraits validate_complexity(const Json& raw);
/// Reads the persisted form produced by to_json (which carries `applied`).
ComplexityTraits complexity_from_json(const Json& raw);
Json to_json(const ComplexityTraits& traits);
/// Bullet list of the selected characteristics, or "None" when not applied.
std::string describe(const ComplexityTraits& traits);

struct StagePlan {
  std::array<std::vector<OptionRef>, kStageCount> stages;

  const std::vector<OptionRef>& stage(int number) const { return stages.at(static_cast<std::size_t>(number - 1)); }
  friend bool operator==(const StagePlan&, const StagePlan&) = default;
};

StagePlan validate_stage_plan(const Json& raw,
                              const StageOptionCatalog& catalog = StageOptionCatalog::standard());
Json to_json(const StagePlan& plan);
std::vector<std::string> option_texts(const StagePlan& plan, int stage);

struct Storyline {
  std::array<std::string, kStageCount> stages;
  std::string language;

  friend bool operator==(const Storyline&, const Storyline&) = default;
};

/// Code-point share of each stage in the whole storyline.
std::array<double, kStageCount> storyline_shares(const Storyline& storyline);
/// Requires all five narratives, each share within kStorylineShareTolerance of
/// its target, and stages 1 and 5 strictly shorter than each of stages 2-4.
Storyline validate_storyline(const Json& raw, std::string language);
Json to_json(const Storyline& storyline);

enum class Role { Therapist, Client };
std::string_view to_string(Role role);

enum class TranscriptMode { Script, Hybrid, TwoAgent, Live };
std::string_view to_string(TranscriptMode mode);
std::optional<TranscriptMode> parse_mode(std::string_view name);

struct Turn {
  int turn = 0;
  Role role = Role::Client;
  std::optional<int> stage;
  std::string content;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Transcript {
  std::vector<Turn> turns;
  TranscriptMode mode = TranscriptMode::Script;
  std::string case_id;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

/// Checks turn numbering, strict role alternation, stage ordering and the
/// per-mode limits (stage 1 <= 2 turns, stage 5 <= 4 turns, two-agent == 20).
Transcript validate_transcript(const Json& raw, TranscriptMode mode, std::string case_id = {});
/// Turn array in the generation schema (turn, role, stage, content).
Json turns_to_json(const Transcript& transcript);
/// Full record: id, case_id, mode, turns.
Json to_json(const Transcript& transcript);
Transcript transcript_from_json(const Json& record);
/// "Therapist: ...\nClient: ..." rendering used inside prompts.
std::string render_dialogue(const Transcript& transcript);

struct GeneralScores {
  std::array<int, kGeneralMetricCount> dialogue_1{};
  std::array<int, kGeneralMetricCount> dialogue_2{};

  /// True when the judge gave both dialogues the same score on every metric.
  bool identical() const { return dialogue_1 == dialogue_2; }
  friend bool operator==(const GeneralScores&, const GeneralScores&) = default;
};

/// Parses the rubric rows {metric, dialogue_1_score, dialogue_2_score}.
/// Scores must be integers in [1, 10]; numeric strings are accepted.
GeneralScores validate_general_scores(const Json& raw);
Json to_json(const GeneralScores& scores);

struct BlriScores {
  std::array<int, kBlriItemCount> dialogue_1{};
  std::array<int, kBlriItemCount> dialogue_2{};

  friend bool operator==(const BlriScores&, const BlriScores&) = default;
};

/// Parses rows {question_number, dialogue_1_score, dialogue_2_score}; scores in
/// {-3,-2,-1,+1,+2,+3}. Zero is rejected with IllegalZeroScore.
BlriScores validate_blri_scores(const Json& raw);
Json to_json(const BlriScores& scores);

bool is_valid_general_score(int score);
bool is_valid_blri_score(int score);

struct MethodSummary {
  std::string label;
  double blri_mean = 0.0;
  double general_mean = 0.0;
  std::array<double, kGeneralMetricCount> per_metric{};
  std::array<double, kBlriItemCount> per_item{};
};

struct ComparisonReport {
  std::vector<MethodSummary> methods;
  std::size_t pair_count = 0;
  std::size_t identical_general_count = 0;
};

}  // namespace pctdialog
