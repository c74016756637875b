#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pctdialog/domain.hpp"
#include "pctdialog/gateway.hpp"
#include "pctdialog/repair.hpp"
#include "pctdialog/templates.hpp"

namespace pctdialog {

enum class CaseStage { Ingested, Filtered, Profiled, Complexified, Planned, Storylined };

/// A question and everything derived from it so far. Downstream fields are only
/// populated for relevant questions; completion() is derived from them.
struct ClientCase {
  Question question;
  std::optional<bool> relevant;
  std::optional<ClientProfile> profile;
  std::optional<ComplexityTraits> traits;
  std::optional<StagePlan> plan;
  std::optional<Storyline> storyline;

  const std::string& id() const { return question.id; }
  CaseStage completion() const;
};

struct SamplingSettings {
  std::string model = "gpt-4o";
  double temperature = 0.7;
  int max_output_tokens = 4096;
};

struct SynthesisOptions {
  SamplingSettings generation;                          // profile, plan, storyline, script, two-agent
  SamplingSettings classification{"gpt-4o", 0.0, 16};  // filter decision
  SamplingSettings roleplay;                            // per-turn hybrid agents
  int max_attempts = kDefaultRepairAttempts;
  int turn_retries = 1;  // extra tries per refined turn before RefinementFailed
  std::string language = "persian";
};

/// Hybrid refinement stopped part way. Holds the turns refined so far.
class RefinementFailed : public std::runtime_error {
 public:
  RefinementFailed(const std::string& reason, Transcript partial)
      : std::runtime_error("RefinementFailed: " + reason), partial_(std::move(partial)) {}
  const Transcript& partial() const { return partial_; }

 private:
  Transcript partial_;
};

/// Exactly floor(ratio * n) cases get traits.applied = true, chosen by a
/// seeded Fisher-Yates shuffle. Same seed and input order give the same split.
/// Unflagged cases get empty traits. Throws std::invalid_argument for ratio outside [0, 1].
std::vector<ClientCase> assign_complexity_split(std::vector<ClientCase> cases, double ratio, std::uint64_t seed);

/// Indices flagged by the split, for callers that only need the partition.
std::vector<bool> complexity_flags(std::size_t n, double ratio, std::uint64_t seed);

/// Parses a yes/no decision: trimmed, case-insensitive, trailing punctuation ignored.
bool parse_decision(const std::string& raw);

/// The generation stages. Each call is sequential; a Synthesizer may be shared
/// between threads working on different cases.
class Synthesizer {
 public:
  Synthesizer(ChatGateway& gateway, const TemplateLibrary& templates, SynthesisOptions options = {});

  bool filter_question(const Question& q);
  ClientProfile build_profile(const Question& q);
  ComplexityTraits select_complexity(const ClientCase& c);
  StagePlan plan_stages(const ClientCase& c);
  Storyline write_storyline(const ClientCase& c);
  Transcript script_dialogue(const ClientCase& c);
  Transcript roleplay_refine(const ClientCase& c, const Transcript& script);
  Transcript two_agent_dialogue(const ClientCase& c);

  /// Per-turn message prefixes. The text after them is the scripted guidance.
  static constexpr std::string_view kMessageMarker = "Message: ";

 private:
  ChatRequest request(const SamplingSettings& s, std::string tag, std::string prompt) const;
  std::string stages_text() const;

  ChatGateway& gateway_;
  const TemplateLibrary& templates_;
  SynthesisOptions options_;
};

/// Readable rendering of a stage plan for prompts ("Stage 1 (title): a, b").
std::string describe(const StagePlan& plan);
std::string describe(const Storyline& storyline);

}  // namespace pctdialog
