#pragma once

// Run directory persistence: one JSONL file per stage, a quarantine file, the
// provenance log and manifest.json. Appends are serialized through one writer
// per run and fsync'd; a torn final line left by a crash is cut off on open.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "pctdialog/domain.hpp"

namespace pctdialog {

enum class StageFile { Questions, Filtered, Profiles, Complexity, StagePlans, Storylines, Scripts, Dialogues, Evals };

inline constexpr std::array<StageFile, 9> kAllStageFiles = {
    StageFile::Questions,  StageFile::Filtered, StageFile::Profiles,  StageFile::Complexity, StageFile::StagePlans,
    StageFile::Storylines, StageFile::Scripts,  StageFile::Dialogues, StageFile::Evals,
};

std::string_view file_name(StageFile file);

inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kQuarantineFile = "quarantine.jsonl";
inline constexpr std::string_view kProvenanceFile = "provenance.jsonl";

struct RunManifest {
  std::string run_id;
  Json config = Json::object();
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t> counts;  // keyed by stage file name
  std::set<std::string> stages_run;           // stage commands that have executed at least once
  std::string created_at;
  std::string updated_at;

  Json to_json() const;
  static RunManifest from_json(const Json& raw);
};

struct QuarantineRecord {
  std::string case_id;
  std::string stage;
  std::string error;
  std::vector<std::string> raw_outputs;

  Json to_json() const;
  static QuarantineRecord from_json(const Json& raw);
};

class RunStore {
 public:
  /// Opens `dir`, creating it and a manifest when absent. An existing run must
  /// carry the same config snapshot and seed, else StoreError(ConfigMismatch).
  static std::unique_ptr<RunStore> create_or_open(const std::filesystem::path& dir, const std::string& run_id,
                                                  const Json& config, std::uint64_t seed);
  /// Opens an existing run. StoreUnavailable when missing, CorruptManifest when unreadable.
  static std::unique_ptr<RunStore> open(const std::filesystem::path& dir);

  RunStore(const RunStore&) = delete;
  RunStore& operator=(const RunStore&) = delete;

  /// Appends one record (must carry a string "id") and fsyncs.
  /// StoreError(DuplicateRecordId) if the id is already in that file.
  void append_record(StageFile file, const Json& record);
  std::vector<Json> read_records(StageFile file) const;
  bool has_record(StageFile file, const std::string& id) const;
  std::set<std::string> completed_ids(StageFile file) const;
  std::map<StageFile, std::set<std::string>> resume_state() const;

  /// Adds or replaces the entry for (case_id, stage). The case must have been ingested.
  void put_quarantine(const QuarantineRecord& record);
  void clear_quarantine(const std::string& case_id, const std::string& stage);
  std::vector<QuarantineRecord> quarantine() const;

  void mark_stage_run(const std::string& stage);
  bool stage_has_run(const std::string& stage) const;

  RunManifest manifest() const;
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(StageFile file) const { return dir_ / std::string(file_name(file)); }
  std::filesystem::path provenance_path() const { return dir_ / std::string(kProvenanceFile); }

 private:
  explicit RunStore(std::filesystem::path dir);
  void load();
  void write_manifest_locked();
  void write_quarantine_locked();

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  RunManifest manifest_;
  std::map<StageFile, std::set<std::string>> ids_;
  std::vector<QuarantineRecord> quarantine_;
};

/// Recovers from a crash mid-append: drops bytes after the last newline.
/// Returns true when something was cut.
bool truncate_torn_tail(const std::filesystem::path& file);

}  // namespace pctdialog
