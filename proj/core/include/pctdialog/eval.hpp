#pragma once

// Pairwise LLM judging (six-metric rubric and 12-item relationship
// inventory), live sessions against a simulated client, and aggregation of
// judged pairs into per-method summary scores.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pctdialog/domain.hpp"
#include "pctdialog/gateway.hpp"
#include "pctdialog/synthesis.hpp"
#include "pctdialog/templates.hpp"

namespace pctdialog {

struct DialoguePair {
  std::string id;  // usually the case id both dialogues came from
  Transcript dialogue_1;
  Transcript dialogue_2;
  std::string label_1;
  std::string label_2;

  /// Throws std::invalid_argument for an empty transcript or equal labels.
  void validate() const;
  DialoguePair swapped() const { return DialoguePair{id, dialogue_2, dialogue_1, label_2, label_1}; }
};

/// Scores for one pair, per dialogue, averaged over judging passes.
struct PairJudgement {
  std::string id;
  std::array<std::string, 2> labels;
  std::array<std::array<double, kGeneralMetricCount>, 2> general{};
  std::array<std::array<double, kBlriItemCount>, 2> blri{};
  bool identical_general = false;  // a pass scored both dialogues the same on every metric
  int passes = 1;

  Json to_json() const;
};

PairJudgement pair_judgement_from_json(const Json& raw);
/// Single-pass judgement from integer scores.
PairJudgement make_judgement(std::string id, std::array<std::string, 2> labels, const GeneralScores& general,
                             const BlriScores& blri);

class Judge {
 public:
  Judge(ChatGateway& gateway, const TemplateLibrary& templates,
        SamplingSettings settings = {"gpt-4o", 0.0, 4096}, int max_attempts = kDefaultRepairAttempts);

  /// One judging call each, dialogues in pair order. `pass` distinguishes request tags.
  GeneralScores general_eval(const DialoguePair& pair, std::string_view pass = {});
  BlriScores blri_eval(const DialoguePair& pair, std::string_view pass = {});

  /// With mitigation each rubric also runs on the swapped pair and the two
  /// passes are averaged per dialogue, which makes the result independent of
  /// which dialogue is shown first.
  PairJudgement judge_pair(const DialoguePair& pair, bool mitigate_position_bias = true);

 private:
  ChatRequest request(std::string tag, std::string prompt) const;

  ChatGateway& gateway_;
  const TemplateLibrary& templates_;
  SamplingSettings settings_;
  int max_attempts_;
};

struct JudgeOutcome {
  std::optional<PairJudgement> judgement;
  std::string error;
  std::vector<std::string> raw_outputs;
};

/// Judges pairs `workers` at a time. Outcomes come back in input order.
std::vector<JudgeOutcome> judge_pairs(Judge& judge, const std::vector<DialoguePair>& pairs, bool mitigate,
                                      int workers);

// ---------------------------------------------------------------------------

class EmptyTurn : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LiveSessionConfig {
  std::string case_id;
  ClientProfile profile;
  int max_turns = kTwoAgentTurnCount;
  std::string end_token = "<end>";
  SamplingSettings therapist;
  SamplingSettings client{"gpt-4o-mini", 0.7, 1024};

  void validate() const;
};

/// Therapist under test (speaks first) against a simulated client. Ends when
/// the therapist emits the end token or after max_turns turns. The token is
/// removed; a reply that was only the token is not stored.
Transcript live_session(const LiveSessionConfig& cfg, ChatGateway& therapist, ChatGateway& client,
                        const TemplateLibrary& templates);

// ---------------------------------------------------------------------------

class EmptyResults : public std::runtime_error {
 public:
  EmptyResults() : std::runtime_error("EmptyResults: nothing to aggregate") {}
};

/// Per method: BLRI score = mean of all item scores over all pairs, General
/// score = mean of all metric scores over all pairs. All results must carry
/// the same label pair.
ComparisonReport aggregate(const std::vector<PairJudgement>& results);
ComparisonReport aggregate(const std::vector<std::pair<GeneralScores, BlriScores>>& results,
                           const std::array<std::string, 2>& labels);

/// Splits judged pairs by label pair (first-seen order) and aggregates each group.
std::vector<ComparisonReport> aggregate_by_labels(const std::vector<PairJudgement>& results);

/// Plain-text table: "Method | BLRI Score | General Score", two decimals.
std::string render_table(const ComparisonReport& report);
Json report_to_json(const ComparisonReport& report);

}  // namespace pctdialog
