#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "pctdialog/eval.hpp"
#include "pctdialog/store.hpp"
#include "support.hpp"

using namespace pctdialog;
using testing::fixture;
using testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "pctdialog");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> base(const TempDir& tmp, const std::string& sub = "run") {
  return {"--mock", fixture("mock").string(), "--run-dir", (tmp.path() / sub).string(), "--seed", "3"};
}

std::vector<std::string> with(std::vector<std::string> a, std::initializer_list<std::string> more) {
  a.insert(a.end(), more);
  return a;
}

void write(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

}  // namespace

TEST_CASE("run with the mock backend completes") {
  TempDir tmp;
  const auto r = invoke(with(base(tmp), {"run", "--questions", fixture("questions.jsonl").string()}));
  INFO(r.err);
  CHECK(r.code == cli::kExitOk);
  auto store = RunStore::open(tmp.path() / "run");
  CHECK(store->read_records(StageFile::Dialogues).size() == 20);
  CHECK(store->read_records(StageFile::Scripts).size() == 10);
}

TEST_CASE("a stage without its predecessor exits with the missing-prior code") {
  TempDir tmp;
  REQUIRE(invoke(with(base(tmp), {"ingest", "--questions", fixture("questions.jsonl").string()})).code == 0);
  const auto r = invoke(with(base(tmp), {"script"}));
  CHECK(r.code == cli::kExitMissingPrior);
  CHECK(r.err.find("storyline") != std::string::npos);
}

TEST_CASE("run equals the individual stage commands") {
  TempDir tmp;
  const auto q = fixture("questions.jsonl").string();
  REQUIRE(invoke(with(base(tmp, "a"), {"run", "--questions", q})).code == 0);
  REQUIRE(invoke(with(base(tmp, "b"), {"ingest", "--questions", q})).code == 0);
  for (const char* stage : {"filter", "profile", "complexify", "plan", "storyline", "script", "roleplay", "two-agent"})
    REQUIRE(invoke(with(base(tmp, "b"), {stage})).code == 0);
  for (const char* file : {"filtered.jsonl", "profiles.jsonl", "complexity.jsonl", "stage_plans.jsonl",
                           "storylines.jsonl", "scripts.jsonl", "dialogues.jsonl"})
    CHECK(testing::read_file(tmp.path() / "a" / file) == testing::read_file(tmp.path() / "b" / file));
}

TEST_CASE("re-running a finished run makes no model calls") {
  TempDir tmp;
  const auto q = fixture("questions.jsonl").string();
  REQUIRE(invoke(with(base(tmp), {"run", "--questions", q})).code == 0);
  const auto log = tmp.path() / "run" / "provenance.jsonl";
  const auto before = testing::read_file(log);
  REQUIRE(invoke(with(base(tmp), {"run", "--questions", q})).code == 0);
  CHECK(testing::read_file(log) == before);
}

TEST_CASE("evaluate then report") {
  TempDir tmp;
  REQUIRE(invoke(with(base(tmp), {"run", "--questions", fixture("questions.jsonl").string()})).code == 0);
  const auto r = invoke(with(base(tmp), {"evaluate", "Hybrid=mode:hybrid", "Script Mode=mode:script"}));
  INFO(r.err);
  REQUIRE(r.code == 0);
  // The fixture judge scores whichever dialogue is shown first higher, so swapping averages it out.
  CHECK(r.out.find("Hybrid      | 1.50       | 7.50") != std::string::npos);
  CHECK(RunStore::open(tmp.path() / "run")->read_records(StageFile::Evals).size() == 10);

  const auto rep = invoke(with(base(tmp), {"report", "--json"}));
  REQUIRE(rep.code == 0);
  const auto reports = Json::parse(rep.out);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0]["methods"][1]["label"] == "Script Mode");
  CHECK(reports[0]["pairs"] == 10);
}

TEST_CASE("report over the reference fixture") {
  TempDir tmp;
  const auto rows = testing::table_fixture();
  {
    std::ofstream out(tmp.path() / "scores.jsonl");
    for (std::size_t i = 0; i < rows.size(); ++i)
      out << make_judgement(std::to_string(i), {"Hybrid", "Script Mode"}, rows[i].first, rows[i].second).to_json().dump()
          << '\n';
  }
  const auto r = invoke({"report", "--from", (tmp.path() / "scores.jsonl").string()});
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Hybrid      | 2.85       | 9.31") != std::string::npos);
  CHECK(r.out.find("Script Mode | 1.84       | 8.06") != std::string::npos);
}

TEST_CASE("live evaluation through a configured therapist") {
  TempDir tmp;
  const auto mock = tmp.path() / "mock";
  std::filesystem::copy(fixture("mock"), mock);
  write(mock / "live.therapist.json", R"(["How are you feeling today?"])");
  write(mock / "live.client.json", R"(["Tired, mostly."])");
  write(tmp.path() / "cfg.ini", "[run]\ndir = run\nquestions = " + fixture("questions.jsonl").string() +
                                    "\nlive_max_turns = 8\n[therapist.candidate]\nmodel = candidate\n");
  const std::vector<std::string> args = {"--config", (tmp.path() / "cfg.ini").string(), "--mock", mock.string()};
  REQUIRE(invoke(with(args, {"run"})).code == 0);
  const auto r = invoke(with(args, {"evaluate", "live:candidate", "mode:hybrid", "--no-swap"}));
  INFO(r.err);
  REQUIRE(r.code == 0);
  auto store = RunStore::open(tmp.path() / "run");
  std::size_t live = 0;
  for (const auto& d : store->read_records(StageFile::Dialogues))
    if (d["id"].get<std::string>().find(":live:candidate") != std::string::npos) {
      ++live;
      CHECK(d["turns"].size() == 8);
    }
  CHECK(live == 10);
}

TEST_CASE("configuration errors") {
  TempDir tmp;
  write(tmp.path() / "bad.ini", "[run]\ndir = x\ncolour = blue\n");
  CHECK_THROWS_AS(cli::load_config(tmp.path() / "bad.ini"), cli::ConfigError);
  CHECK(invoke({"--config", (tmp.path() / "bad.ini").string(), "report"}).code == cli::kExitConfig);

  write(tmp.path() / "ratio.ini", "[run]\ndir = x\ncomplexity_ratio = 1.5\n");
  CHECK(invoke({"--config", (tmp.path() / "ratio.ini").string(), "filter"}).code == cli::kExitConfig);

  write(tmp.path() / "section.ini", "[runner]\ndir = x\n");
  CHECK_THROWS_AS(cli::load_config(tmp.path() / "section.ini"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_modes("script,poetry"), cli::ConfigError);
}

TEST_CASE("config paths resolve against the file's directory") {
  TempDir tmp;
  std::filesystem::create_directories(tmp.path() / "conf");
  write(tmp.path() / "conf" / "c.ini", "[run]\ndir = runs/a\nquestions = q.txt\nseed = 9\nmodes = two_agent\n");
  const auto c = cli::load_config(tmp.path() / "conf" / "c.ini");
  CHECK(c.run_dir == tmp.path() / "conf" / "runs" / "a");
  CHECK(c.questions == tmp.path() / "conf" / "q.txt");
  CHECK(c.seed == 9);
  CHECK(c.modes == std::vector<TranscriptMode>{TranscriptMode::TwoAgent});
  CHECK(c.pipeline_config().seed == 9);
}

TEST_CASE("questions from plain text get generated ids") {
  TempDir tmp;
  write(tmp.path() / "q.txt", "First question?\n\n  Second question?\n");
  const auto qs = cli::read_questions(tmp.path() / "q.txt");
  REQUIRE(qs.size() == 2);
  CHECK(qs[1].text == "Second question?");
  CHECK(qs[0].id != qs[1].id);
}

TEST_CASE("the example configuration loads") {
  const auto c = cli::load_config(std::filesystem::path(PCTDIALOG_SOURCE_DIR) / "tools" / "example.ini");
  CHECK(c.therapists.count("candidate") == 1);
  CHECK(c.workers == 4);
}
