#include "pctdialog/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace pctdialog {

namespace fs = std::filesystem;

std::string_view file_name(StageFile file) {
  switch (file) {
    case StageFile::Questions: return "questions.jsonl";
    case StageFile::Filtered: return "filtered.jsonl";
    case StageFile::Profiles: return "profiles.jsonl";
    case StageFile::Complexity: return "complexity.jsonl";
    case StageFile::StagePlans: return "stage_plans.jsonl";
    case StageFile::Storylines: return "storylines.jsonl";
    case StageFile::Scripts: return "scripts.jsonl";
    case StageFile::Dialogues: return "dialogues.jsonl";
    case StageFile::Evals: return "evals.jsonl";
  }
  return "unknown.jsonl";
}

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string errno_text() { return std::strerror(errno); }

// Writes all of `data` to `path` via O_APPEND and fsyncs before returning.
void durable_append(const fs::path& path, const std::string& data) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw StoreError(StoreErrorKind::StoreUnavailable, "open " + path.string() + ": " + errno_text());
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const auto msg = errno_text();
      ::close(fd);
      throw StoreError(StoreErrorKind::StoreUnavailable, "write " + path.string() + ": " + msg);
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const auto msg = errno_text();
    ::close(fd);
    throw StoreError(StoreErrorKind::StoreUnavailable, "fsync " + path.string() + ": " + msg);
  }
  ::close(fd);
}

// Replaces `path` atomically: write a sibling temp file, fsync, rename.
void atomic_write(const fs::path& path, const std::string& data) {
  const fs::path tmp = path.string() + ".tmp";
  {
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw StoreError(StoreErrorKind::StoreUnavailable, "open " + tmp.string() + ": " + errno_text());
    std::size_t done = 0;
    while (done < data.size()) {
      const auto n = ::write(fd, data.data() + done, data.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        const auto msg = errno_text();
        ::close(fd);
        throw StoreError(StoreErrorKind::StoreUnavailable, "write " + tmp.string() + ": " + msg);
      }
      done += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw StoreError(StoreErrorKind::StoreUnavailable, "rename " + tmp.string() + ": " + ec.message());
}

std::vector<Json> read_jsonl(const fs::path& path) {
  std::vector<Json> out;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    auto j = Json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw StoreError(StoreErrorKind::CorruptManifest,
                       path.filename().string() + " line " + std::to_string(number) + " is not valid JSON");
    out.push_back(std::move(j));
  }
  return out;
}

std::string record_id(const Json& record) {
  if (!record.is_object() || !record.contains("id") || !record["id"].is_string())
    throw std::invalid_argument("record has no string id");
  return record["id"].get<std::string>();
}

}  // namespace

bool truncate_torn_tail(const fs::path& file) {
  std::error_code ec;
  const auto size = fs::file_size(file, ec);
  if (ec || size == 0) return false;
  std::ifstream in(file, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.back() == '\n') return false;
  const auto last = data.rfind('\n');
  const auto keep = last == std::string::npos ? 0 : last + 1;
  fs::resize_file(file, keep);
  return true;
}

Json RunManifest::to_json() const {
  Json counts_json = Json::object();
  for (const auto& [k, v] : counts) counts_json[k] = v;
  Json stages = Json::array();
  for (const auto& s : stages_run) stages.push_back(s);
  return Json{{"run_id", run_id},     {"seed", seed},         {"config", config},          {"counts", counts_json},
              {"stages_run", stages}, {"created_at", created_at}, {"updated_at", updated_at}};
}

RunManifest RunManifest::from_json(const Json& raw) {
  if (!raw.is_object() || !raw.contains("run_id") || !raw.contains("seed"))
    throw StoreError(StoreErrorKind::CorruptManifest, "manifest lacks run_id or seed");
  try {
    RunManifest m;
    m.run_id = raw.at("run_id").get<std::string>();
    m.seed = raw.at("seed").get<std::uint64_t>();
    m.config = raw.value("config", Json::object());
    if (raw.contains("counts"))
      for (const auto& [k, v] : raw["counts"].items()) m.counts[k] = v.get<std::size_t>();
    if (raw.contains("stages_run"))
      for (const auto& s : raw["stages_run"]) m.stages_run.insert(s.get<std::string>());
    m.created_at = raw.value("created_at", "");
    m.updated_at = raw.value("updated_at", "");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw StoreError(StoreErrorKind::CorruptManifest, std::string("manifest: ") + e.what());
  }
}

Json QuarantineRecord::to_json() const {
  Json raws = Json::array();
  for (const auto& r : raw_outputs) raws.push_back(r);
  return Json{{"case_id", case_id}, {"stage", stage}, {"error", error}, {"raw_outputs", raws}};
}

QuarantineRecord QuarantineRecord::from_json(const Json& raw) {
  QuarantineRecord q;
  q.case_id = raw.at("case_id").get<std::string>();
  q.stage = raw.at("stage").get<std::string>();
  q.error = raw.value("error", "");
  if (raw.contains("raw_outputs"))
    for (const auto& r : raw["raw_outputs"]) q.raw_outputs.push_back(r.get<std::string>());
  return q;
}

RunStore::RunStore(fs::path dir) : dir_(std::move(dir)) {}

std::unique_ptr<RunStore> RunStore::create_or_open(const fs::path& dir, const std::string& run_id, const Json& config,
                                                   std::uint64_t seed) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StoreError(StoreErrorKind::StoreUnavailable, "cannot create " + dir.string() + ": " + ec.message());
  if (!fs::exists(dir / kManifestFile)) {
    std::unique_ptr<RunStore> store(new RunStore(dir));
    store->manifest_.run_id = run_id;
    store->manifest_.config = config;
    store->manifest_.seed = seed;
    store->manifest_.created_at = store->manifest_.updated_at = utc_now();
    store->load();
    std::lock_guard lock(store->mutex_);
    store->write_manifest_locked();
    return store;
  }
  auto store = open(dir);
  const auto& m = store->manifest_;
  if (m.seed != seed || m.config != config) {
    throw StoreError(StoreErrorKind::ConfigMismatch,
                     "run " + m.run_id + " was started with seed " + std::to_string(m.seed) + " and config " +
                         m.config.dump() + "; got seed " + std::to_string(seed) + " and config " + config.dump());
  }
  return store;
}

std::unique_ptr<RunStore> RunStore::open(const fs::path& dir) {
  const auto manifest_path = dir / kManifestFile;
  if (!fs::is_directory(dir) || !fs::exists(manifest_path))
    throw StoreError(StoreErrorKind::StoreUnavailable, "no run at " + dir.string());
  std::ifstream in(manifest_path, std::ios::binary);
  auto raw = Json::parse(in, nullptr, false);
  if (raw.is_discarded()) throw StoreError(StoreErrorKind::CorruptManifest, manifest_path.string() + " is not valid JSON");
  std::unique_ptr<RunStore> store(new RunStore(dir));
  store->manifest_ = RunManifest::from_json(raw);
  store->load();
  return store;
}

void RunStore::load() {
  bool repaired = false;
  for (auto file : kAllStageFiles) {
    const auto p = path(file);
    repaired |= truncate_torn_tail(p);
    auto& ids = ids_[file];
    std::size_t lines = 0;
    for (const auto& record : read_jsonl(p)) {
      ++lines;
      ids.insert(record_id(record));
    }
    const auto name = std::string(file_name(file));
    const auto counted = manifest_.counts.count(name) ? manifest_.counts[name] : 0;
    // Counts are bumped only after a record is durable, so the file may be ahead but never behind.
    if (lines < counted)
      throw StoreError(StoreErrorKind::CorruptManifest,
                       name + " holds " + std::to_string(lines) + " records but the manifest counts " +
                           std::to_string(counted));
    if (lines != counted) repaired = true;
    manifest_.counts[name] = lines;
  }
  const auto qpath = dir_ / kQuarantineFile;
  truncate_torn_tail(qpath);
  for (const auto& raw : read_jsonl(qpath)) quarantine_.push_back(QuarantineRecord::from_json(raw));
  truncate_torn_tail(provenance_path());
  if (repaired && fs::exists(dir_ / kManifestFile)) {
    std::lock_guard lock(mutex_);
    write_manifest_locked();
  }
}

void RunStore::write_manifest_locked() {
  manifest_.updated_at = utc_now();
  atomic_write(dir_ / kManifestFile, manifest_.to_json().dump(2) + "\n");
}

void RunStore::write_quarantine_locked() {
  std::string data;
  for (const auto& q : quarantine_) data += q.to_json().dump() + "\n";
  atomic_write(dir_ / kQuarantineFile, data);
}

void RunStore::append_record(StageFile file, const Json& record) {
  const auto id = record_id(record);
  std::lock_guard lock(mutex_);
  auto& ids = ids_[file];
  if (ids.count(id))
    throw StoreError(StoreErrorKind::DuplicateRecordId,
                     "record " + id + " already exists in " + std::string(file_name(file)));
  durable_append(path(file), record.dump() + "\n");
  ids.insert(id);
  ++manifest_.counts[std::string(file_name(file))];
  write_manifest_locked();
}

std::vector<Json> RunStore::read_records(StageFile file) const {
  std::lock_guard lock(mutex_);
  return read_jsonl(path(file));
}

bool RunStore::has_record(StageFile file, const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = ids_.find(file);
  return it != ids_.end() && it->second.count(id) > 0;
}

std::set<std::string> RunStore::completed_ids(StageFile file) const {
  std::lock_guard lock(mutex_);
  auto it = ids_.find(file);
  return it == ids_.end() ? std::set<std::string>{} : it->second;
}

std::map<StageFile, std::set<std::string>> RunStore::resume_state() const {
  std::lock_guard lock(mutex_);
  return ids_;
}

void RunStore::put_quarantine(const QuarantineRecord& record) {
  std::lock_guard lock(mutex_);
  if (!ids_[StageFile::Questions].count(record.case_id))
    throw StoreError(StoreErrorKind::UnknownCase, "cannot quarantine unknown case " + record.case_id);
  auto it = std::find_if(quarantine_.begin(), quarantine_.end(), [&](const QuarantineRecord& q) {
    return q.case_id == record.case_id && q.stage == record.stage;
  });
  if (it != quarantine_.end())
    *it = record;
  else
    quarantine_.push_back(record);
  write_quarantine_locked();
}

void RunStore::clear_quarantine(const std::string& case_id, const std::string& stage) {
  std::lock_guard lock(mutex_);
  const auto before = quarantine_.size();
  std::erase_if(quarantine_, [&](const QuarantineRecord& q) { return q.case_id == case_id && q.stage == stage; });
  if (quarantine_.size() != before) write_quarantine_locked();
}

std::vector<QuarantineRecord> RunStore::quarantine() const {
  std::lock_guard lock(mutex_);
  return quarantine_;
}

void RunStore::mark_stage_run(const std::string& stage) {
  std::lock_guard lock(mutex_);
  if (manifest_.stages_run.insert(stage).second) write_manifest_locked();
}

bool RunStore::stage_has_run(const std::string& stage) const {
  std::lock_guard lock(mutex_);
  return manifest_.stages_run.count(stage) > 0;
}

RunManifest RunStore::manifest() const {
  std::lock_guard lock(mutex_);
  return manifest_;
}

}  // namespace pctdialog
