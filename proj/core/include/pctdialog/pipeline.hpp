#pragma once

// Stage-major batch driver over a RunStore. Every stage processes the cases
// that finished the previous stage and have no record of their own yet, so a
// re-run after a crash issues no calls for work already on disk.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pctdialog/store.hpp"
#include "pctdialog/synthesis.hpp"

namespace pctdialog {

enum class PipelineStage { Filter, Profile, Complexity, Plan, Storyline, Script, Hybrid, TwoAgent };

inline constexpr std::array<PipelineStage, 8> kAllPipelineStages = {
    PipelineStage::Filter, PipelineStage::Profile, PipelineStage::Complexity, PipelineStage::Plan,
    PipelineStage::Storyline, PipelineStage::Script, PipelineStage::Hybrid, PipelineStage::TwoAgent,
};

/// Command name of the stage: filter, profile, complexify, plan, storyline, script, roleplay, two-agent.
std::string_view to_string(PipelineStage stage);
std::optional<PipelineStage> parse_stage(std::string_view name);

/// A stage was asked to run before the stage it depends on ever ran.
class MissingPriorStage : public std::runtime_error {
 public:
  MissingPriorStage(PipelineStage stage, std::string prior)
      : std::runtime_error("MissingPriorStage: " + std::string(to_string(stage)) + " needs " + prior +
                           " to have run first"),
        stage_(stage) {}
  PipelineStage stage() const { return stage_; }

 private:
  PipelineStage stage_;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  double complexity_ratio = 0.5;
  int workers = 1;
  std::vector<TranscriptMode> modes = {TranscriptMode::Script, TranscriptMode::Hybrid, TranscriptMode::TwoAgent};
  SynthesisOptions synthesis;

  /// Settings that change generated content. Frozen into the run manifest;
  /// workers and modes are left out because they do not.
  Json snapshot() const;
};

struct StageReport {
  PipelineStage stage;
  std::size_t pending = 0;
  std::size_t completed = 0;
  std::size_t quarantined = 0;
};

/// Adds questions not already in the run, in order. Returns how many were new.
std::size_t ingest(RunStore& store, const std::vector<Question>& questions);

/// Rebuilds the in-memory cases from the stage files, in ingestion order.
std::vector<ClientCase> load_cases(const RunStore& store);

class Pipeline {
 public:
  Pipeline(RunStore& store, ChatGateway& gateway, const TemplateLibrary& templates, PipelineConfig config);

  StageReport run_stage(PipelineStage stage);
  /// Runs the stages needed for the configured modes, in order.
  std::vector<StageReport> run_all();

 private:
  RunStore& store_;
  ChatGateway& gateway_;
  const TemplateLibrary& templates_;
  PipelineConfig config_;
  Synthesizer synth_;
};

struct VerifyReport {
  std::size_t records = 0;
  std::vector<std::string> problems;  // "<file>:<id>: <error>"
  bool ok() const { return problems.empty(); }
};

/// Re-validates every persisted record against its schema.
VerifyReport verify_run(const RunStore& store);

}  // namespace pctdialog
