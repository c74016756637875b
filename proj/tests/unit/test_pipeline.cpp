#include <doctest.h>

#include <fstream>

#include "pctdialog/pipeline.hpp"
#include "support.hpp"

using namespace pctdialog;
using testing::TempDir;
using testing::fixture;

namespace {

std::vector<Question> fixture_questions() {
  std::vector<Question> out;
  std::ifstream in(fixture("questions.jsonl"));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(question_from_json(Json::parse(line)));
  return out;
}

struct Harness {
  TempDir tmp;
  std::shared_ptr<MockChatBackend> mock = MockChatBackend::from_directory(fixture("mock"));
  std::unique_ptr<ChatGateway> gateway = testing::mock_gateway(mock);
  TemplateLibrary templates = TemplateLibrary::builtin();
  PipelineConfig config;
  std::unique_ptr<RunStore> store;

  explicit Harness(int workers = 1) {
    config.seed = 11;
    config.workers = workers;
    store = RunStore::create_or_open(tmp.path(), "test", config.snapshot(), config.seed);
    ingest(*store, fixture_questions());
  }
  Pipeline pipeline() { return Pipeline(*store, *gateway, templates, config); }
};

}  // namespace

TEST_CASE("stage names round-trip") {
  for (auto s : {PipelineStage::Filter, PipelineStage::Profile, PipelineStage::Complexity, PipelineStage::Plan,
                 PipelineStage::Storyline, PipelineStage::Script, PipelineStage::Hybrid, PipelineStage::TwoAgent})
    CHECK(parse_stage(to_string(s)) == s);
  CHECK_FALSE(parse_stage("bogus").has_value());
}

TEST_CASE("ingest skips known ids") {
  Harness h;
  CHECK(ingest(*h.store, fixture_questions()) == 0);
  CHECK(h.store->read_records(StageFile::Questions).size() == 10);
}

TEST_CASE("full mock run produces every output") {
  Harness h;
  auto p = h.pipeline();
  const auto reports = p.run_all();
  CHECK(reports.size() == 8);
  for (const auto& r : reports) CHECK(r.quarantined == 0);
  CHECK(h.store->read_records(StageFile::Scripts).size() == 10);
  CHECK(h.store->read_records(StageFile::Dialogues).size() == 20);
  const auto complexity = h.store->read_records(StageFile::Complexity);
  const auto applied = std::count_if(complexity.begin(), complexity.end(),
                                     [](const Json& r) { return r["applied"].get<bool>(); });
  CHECK(applied == 5);
  CHECK(h.mock->calls_with_prefix("complexity") == 5);
  CHECK(verify_run(*h.store).ok());
  CHECK(h.store->quarantine().empty());
}

TEST_CASE("re-running a completed run calls nothing") {
  Harness h;
  h.pipeline().run_all();
  const auto calls = h.mock->total_calls();
  const auto reports = h.pipeline().run_all();
  CHECK(h.mock->total_calls() == calls);
  for (const auto& r : reports) CHECK(r.pending == 0);
}

TEST_CASE("a stage needs its predecessor") {
  Harness h;
  auto p = h.pipeline();
  CHECK_THROWS_AS(p.run_stage(PipelineStage::Script), MissingPriorStage);
  CHECK_THROWS_AS(p.run_stage(PipelineStage::Profile), MissingPriorStage);
  CHECK(h.mock->total_calls() == 0);
  p.run_stage(PipelineStage::Filter);
  CHECK_NOTHROW(p.run_stage(PipelineStage::Profile));
}

TEST_CASE("irrelevant questions stop at the filter") {
  Harness h;
  h.mock->script("filter/q03", {"No"});
  auto p = h.pipeline();
  p.run_stage(PipelineStage::Filter);
  p.run_stage(PipelineStage::Profile);
  CHECK(h.store->read_records(StageFile::Profiles).size() == 9);
  CHECK_FALSE(h.store->has_record(StageFile::Profiles, "q03"));
}

TEST_CASE("invalid output quarantines one case and the rest continue") {
  Harness h;
  h.mock->script("profile/q02", {Json{{"json", Json{{"emotional_themes", Json::array()}}}}});
  auto p = h.pipeline();
  p.run_stage(PipelineStage::Filter);
  const auto report = p.run_stage(PipelineStage::Profile);
  CHECK(report.completed == 9);
  CHECK(report.quarantined == 1);
  const auto q = h.store->quarantine();
  REQUIRE(q.size() == 1);
  CHECK(q[0].case_id == "q02");
  CHECK(q[0].stage == "profile");
  CHECK(q[0].raw_outputs.size() == kDefaultRepairAttempts);

  // Once the model behaves, re-running only retries the quarantined case.
  h.mock->script("profile/q02", {Json{{"json", testing::load_json(fixture("profile.json"))}}});
  const auto calls = h.mock->total_calls();
  const auto retry = p.run_stage(PipelineStage::Profile);
  CHECK(retry.pending == 1);
  CHECK(h.mock->total_calls() == calls + 1);
  CHECK(h.store->quarantine().empty());
}

TEST_CASE("worker count does not change the stored records") {
  Harness one(1);
  Harness four(4);
  one.pipeline().run_all();
  four.pipeline().run_all();
  for (auto f : {StageFile::Filtered, StageFile::Complexity, StageFile::Scripts, StageFile::Dialogues})
    CHECK(one.store->read_records(f) == four.store->read_records(f));
}

TEST_CASE("modes limit which stages run") {
  Harness h;
  h.config.modes = {TranscriptMode::TwoAgent};
  const auto reports = h.pipeline().run_all();
  CHECK(reports.size() == 4);
  CHECK(h.mock->calls_with_prefix("script") == 0);
  CHECK(h.store->read_records(StageFile::Dialogues).size() == 10);
}

TEST_CASE("snapshot ignores execution-only settings") {
  PipelineConfig a, b;
  b.workers = 8;
  b.modes = {TranscriptMode::Script};
  CHECK(a.snapshot() == b.snapshot());
  b.complexity_ratio = 0.3;
  CHECK(a.snapshot() != b.snapshot());
}

TEST_CASE("load_cases rebuilds state") {
  Harness h;
  auto p = h.pipeline();
  p.run_stage(PipelineStage::Filter);
  p.run_stage(PipelineStage::Profile);
  const auto cases = load_cases(*h.store);
  REQUIRE(cases.size() == 10);
  CHECK(cases[0].id() == "q01");
  CHECK(cases[0].completion() == CaseStage::Profiled);
}
