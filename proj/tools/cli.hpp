#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pctdialog/gateway.hpp"
#include "pctdialog/pipeline.hpp"

namespace pctdialog::cli {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error("ConfigError: " + what) {}
};

/// One model endpoint: where to send requests and how to sample.
struct Endpoint {
  BackendConfig backend;
  SamplingSettings sampling;
};

struct CliConfig {
  std::filesystem::path run_dir;
  std::optional<std::filesystem::path> template_dir;
  std::optional<std::filesystem::path> questions;
  std::uint64_t seed = 0;
  double complexity_ratio = 0.5;
  int workers = 1;
  std::vector<TranscriptMode> modes = {TranscriptMode::Script, TranscriptMode::Hybrid, TranscriptMode::TwoAgent};
  std::string language = "persian";
  bool swap_judging = true;
  int live_max_turns = kTwoAgentTurnCount;

  Endpoint generation;
  Endpoint judge;
  Endpoint client;
  std::map<std::string, Endpoint> therapists;  // [therapist.<name>] sections

  /// Ratio in [0, 1], workers >= 1, template directory exists when given.
  void validate() const;
  PipelineConfig pipeline_config() const;
};

/// Reads an INI file. Relative paths are resolved against the file's directory.
CliConfig load_config(const std::filesystem::path& file);
std::vector<TranscriptMode> parse_modes(const std::string& list);

/// Questions from .jsonl ({"id", "text"}; id optional) or plain text, one per line.
std::vector<Question> read_questions(const std::filesystem::path& file);

inline constexpr int kExitOk = 0;
inline constexpr int kExitQuarantine = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitMissingPrior = 3;
inline constexpr int kExitFailure = 4;

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pctdialog::cli
