#include <doctest.h>

#include <numeric>

#include "pctdialog/synthesis.hpp"
#include "support.hpp"

using namespace pctdialog;
using testing::fixture;
using testing::load_json;

namespace {

ClientCase full_case(const std::string& id = "c1") {
  ClientCase c{make_question(id, "I always say yes and then resent it.")};
  c.relevant = true;
  c.profile = validate_profile(load_json(fixture("profile.json")));
  c.traits = ComplexityTraits{};
  c.plan = validate_stage_plan(load_json(fixture("stage_plan.json")));
  c.storyline = validate_storyline(load_json(fixture("storyline.json")), "english");
  return c;
}

std::shared_ptr<MockChatBackend> fixture_mock() { return MockChatBackend::from_directory(fixture("mock")); }

}  // namespace

TEST_CASE("decision parsing") {
  CHECK(parse_decision("yes"));
  CHECK(parse_decision("  Yes.\n"));
  CHECK(parse_decision("\"YES\""));
  CHECK_FALSE(parse_decision("No!"));
  CHECK_FALSE(parse_decision("no"));
  CHECK_THROWS_AS(parse_decision("maybe"), ValidationError);
  CHECK_THROWS_AS(parse_decision("yes, definitely"), ValidationError);
  CHECK_THROWS_AS(parse_decision(""), ValidationError);
}

TEST_CASE("complexity split") {
  SUBCASE("exact count") {
    for (std::size_t n : {0u, 1u, 2u, 7u, 10u, 101u}) {
      for (int pct : {0, 29, 50, 100}) {
        const auto flags = complexity_flags(n, pct / 100.0, 42);
        const auto count = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
        CHECK(count == n * static_cast<std::size_t>(pct) / 100);
      }
    }
  }
  SUBCASE("seeded") {
    CHECK(complexity_flags(50, 0.5, 1) == complexity_flags(50, 0.5, 1));
    CHECK(complexity_flags(50, 0.5, 1) != complexity_flags(50, 0.5, 2));
  }
  SUBCASE("ratio domain") {
    CHECK_THROWS_AS(complexity_flags(5, -0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(complexity_flags(5, 1.01, 0), std::invalid_argument);
  }
  SUBCASE("assignment marks traits") {
    std::vector<ClientCase> cases;
    for (int i = 0; i < 10; ++i) cases.push_back(ClientCase{make_question("q" + std::to_string(i), "text")});
    const auto out = assign_complexity_split(cases, 0.3, 9);
    const auto applied = std::count_if(out.begin(), out.end(), [](const ClientCase& c) { return c.traits->applied; });
    CHECK(applied == 3);
  }
}

TEST_CASE("case completion follows populated fields") {
  ClientCase c{make_question("x", "t")};
  CHECK(c.completion() == CaseStage::Ingested);
  c.relevant = true;
  CHECK(c.completion() == CaseStage::Filtered);
  CHECK(full_case().completion() == CaseStage::Storylined);
}

TEST_CASE("generation stages against the fixture mock") {
  auto mock = fixture_mock();
  auto g = testing::mock_gateway(mock);
  const auto lib = TemplateLibrary::builtin();
  Synthesizer synth(*g, lib);
  const auto c = full_case();

  CHECK(synth.filter_question(c.question));
  CHECK(synth.build_profile(c.question) == *c.profile);
  CHECK(synth.select_complexity(c).selected == std::vector<int>{2, 13, 28});
  CHECK(synth.plan_stages(c) == *c.plan);
  CHECK(synth.write_storyline(c).stages == c.storyline->stages);
  const auto script = synth.script_dialogue(c);
  CHECK(script.turns.size() == 20);
  CHECK(script.mode == TranscriptMode::Script);
  CHECK(synth.two_agent_dialogue(c).turns.size() == 20);

  // Filter runs deterministically; generation uses the configured temperature.
  const auto reqs = mock->requests();
  CHECK(reqs[0].request_tag == "filter/c1");
  CHECK(reqs[0].temperature == 0.0);
  CHECK(reqs[1].temperature == doctest::Approx(0.7));
  // The script prompt carries the storyline, the question and the stage definitions.
  const auto& script_prompt = reqs[5].messages[0].content;
  CHECK(script_prompt.find(c.question.text) != std::string::npos);
  CHECK(script_prompt.find(c.storyline->stages[2]) != std::string::npos);
  CHECK(script_prompt.find("{{") == std::string::npos);
}

TEST_CASE("filter decisions are repaired when unparseable") {
  auto mock = std::make_shared<MockChatBackend>();
  mock->script("filter", {"It depends.", "No"});
  auto g = testing::mock_gateway(mock);
  const auto lib = TemplateLibrary::builtin();
  Synthesizer synth(*g, lib);
  CHECK_FALSE(synth.filter_question(make_question("q", "What is the capital of France?")));
  CHECK(mock->total_calls() == 2);
}

TEST_CASE("hybrid refinement keeps structure and echoes guidance under an echo mock") {
  auto mock = fixture_mock();
  auto g = testing::mock_gateway(mock);
  const auto lib = TemplateLibrary::builtin();
  Synthesizer synth(*g, lib);
  const auto c = full_case();
  const auto script = synth.script_dialogue(c);
  const auto hybrid = synth.roleplay_refine(c, script);
  CHECK(hybrid.mode == TranscriptMode::Hybrid);
  REQUIRE(hybrid.turns.size() == script.turns.size());
  for (std::size_t i = 0; i < script.turns.size(); ++i) {
    CHECK(hybrid.turns[i].turn == script.turns[i].turn);
    CHECK(hybrid.turns[i].role == script.turns[i].role);
    CHECK(hybrid.turns[i].stage == script.turns[i].stage);
    CHECK(hybrid.turns[i].content == script.turns[i].content);
  }
  CHECK(mock->calls_with_prefix("roleplay.therapist") == 10);
  CHECK(mock->calls_with_prefix("roleplay.client") == 10);

  // Client turns see the emotions planned for their stage; history is role-relative.
  const auto reqs = mock->requests();
  const auto client_turn_2 = std::find_if(reqs.begin(), reqs.end(), [](const ChatRequest& r) {
    return r.request_tag == "roleplay.client/c1/2";
  });
  REQUIRE(client_turn_2 != reqs.end());
  CHECK(client_turn_2->messages.front().role == MessageRole::System);
  CHECK(client_turn_2->messages[1].role == MessageRole::User);  // the therapist's first turn
  CHECK(client_turn_2->messages.back().content.rfind("Emotions: Anxiety and tension", 0) == 0);
}

TEST_CASE("refinement failure keeps the partial transcript") {
  auto mock = fixture_mock();
  mock->script("roleplay.client/c1/4", {""});
  auto g = testing::mock_gateway(mock);
  const auto lib = TemplateLibrary::builtin();
  SynthesisOptions opts;
  opts.turn_retries = 1;
  Synthesizer synth(*g, lib, opts);
  const auto c = full_case();
  const auto script = synth.script_dialogue(c);
  try {
    synth.roleplay_refine(c, script);
    FAIL("expected RefinementFailed");
  } catch (const RefinementFailed& e) {
    CHECK(e.partial().turns.size() == 3);
    CHECK(std::string(e.what()).find("turn 4") != std::string::npos);
  }
  CHECK(mock->calls_with_prefix("roleplay.client/c1/4") == 2);
}

TEST_CASE("invalid script output exhausts the repair budget") {
  auto mock = fixture_mock();
  Json bad = load_json(fixture("script_dialogue.json"));
  bad[2]["stage"] = "1";  // three opening turns
  mock->script("script", {Json{{"json", bad}}});
  auto g = testing::mock_gateway(mock);
  const auto lib = TemplateLibrary::builtin();
  Synthesizer synth(*g, lib);
  try {
    synth.script_dialogue(full_case());
    FAIL("expected ValidationExhausted");
  } catch (const ValidationExhausted& e) {
    CHECK(e.attempts() == kDefaultRepairAttempts);
    CHECK(e.last_error().find("StageTurnLimitExceeded(1, 2)") != std::string::npos);
  }
}
