#include <doctest.h>

#include "pctdialog/gateway.hpp"
#include "pctdialog/repair.hpp"
#include "support.hpp"

using namespace pctdialog;
using namespace std::chrono_literals;

namespace {

ChatRequest simple(const std::string& tag) {
  ChatRequest r;
  r.model = "m";
  r.request_tag = tag;
  r.messages.push_back(ChatMessage{MessageRole::User, "hi"});
  return r;
}

GatewayErrorKind failure_kind(ChatGateway& g, const ChatRequest& r, int* attempts = nullptr) {
  try {
    g.complete_chat(r);
  } catch (const GatewayError& e) {
    if (attempts) *attempts = e.attempts();
    return e.kind();
  }
  FAIL("expected GatewayError");
  return GatewayErrorKind::TransportError;
}

}  // namespace

TEST_CASE("request validation") {
  ChatRequest r;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r.messages.push_back(ChatMessage{MessageRole::Assistant, "x"});
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r.messages[0].role = MessageRole::User;
  r.temperature = -0.1;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("backoff grows geometrically and is capped") {
  BackoffPolicy p;
  CHECK(p.delay_for(1) == 500ms);
  CHECK(p.delay_for(2) == 1000ms);
  CHECK(p.delay_for(3) == 2000ms);
  CHECK(p.delay_for(20) == p.max);
}

TEST_CASE("transient failures are retried then succeed") {
  auto mock = std::make_shared<MockChatBackend>();
  mock->script("t", {Json{{"status", 429}}, Json{{"timeout", true}}, Json{{"status", 503}}, "done"});
  auto log = std::make_shared<ProvenanceLog>();
  testing::FakeClock fc;
  ChatGateway g(mock, BackendConfig{}, log, fc.clock());
  auto resp = g.complete_chat(simple("t"));
  CHECK(resp.content == "done");
  CHECK(resp.attempt == 4);
  CHECK(mock->total_calls() == 4);
  CHECK(*fc.slept == 500ms + 1000ms + 2000ms);
  const auto entries = log->entries();
  REQUIRE(entries.size() == 4);
  CHECK(entries[0].outcome == "http_429");
  CHECK(entries[1].outcome == "timeout");
  CHECK(entries[3].outcome == "ok");
}

TEST_CASE("retries are bounded") {
  auto mock = std::make_shared<MockChatBackend>();
  mock->script("t", {Json{{"status", 500}}});
  BackendConfig cfg;
  cfg.max_retries = 2;
  auto g = testing::mock_gateway(mock, nullptr, cfg);
  int attempts = 0;
  CHECK(failure_kind(*g, simple("t"), &attempts) == GatewayErrorKind::TransportError);
  CHECK(attempts == 3);
  CHECK(mock->total_calls() == 3);
}

TEST_CASE("exhausted 429 is RateLimited, timeouts are Timeout") {
  auto mock = std::make_shared<MockChatBackend>();
  mock->script("a", {Json{{"status", 429}}});
  mock->script("b", {Json{{"timeout", true}}});
  auto g = testing::mock_gateway(mock);
  CHECK(failure_kind(*g, simple("a")) == GatewayErrorKind::RateLimited);
  CHECK(failure_kind(*g, simple("b")) == GatewayErrorKind::Timeout);
}

TEST_CASE("client errors are not retried") {
  auto mock = std::make_shared<MockChatBackend>();
  mock->script("auth", {Json{{"status", 401}}});
  mock->script("bad", {Json{{"status", 400}}});
  auto g = testing::mock_gateway(mock);
  CHECK(failure_kind(*g, simple("auth")) == GatewayErrorKind::AuthFailure);
  CHECK(failure_kind(*g, simple("bad")) == GatewayErrorKind::BadRequest);
  CHECK(mock->total_calls() == 2);
}

TEST_CASE("mock tags fall back to their prefix and count per full tag") {
  auto mock = std::make_shared<MockChatBackend>();
  mock->script("profile", {"first", "second"});
  mock->script("profile/q2", {"special"});
  auto g = testing::mock_gateway(mock);
  CHECK(g->complete_chat(simple("profile/q1")).content == "first");
  CHECK(g->complete_chat(simple("profile/q1")).content == "second");
  CHECK(g->complete_chat(simple("profile/q1")).content == "second");  // last entry repeats
  CHECK(g->complete_chat(simple("profile/q3")).content == "first");
  CHECK(g->complete_chat(simple("profile/q2")).content == "special");
  CHECK(mock->calls_with_prefix("profile") == 5);
  CHECK(failure_kind(*g, simple("unscripted")) == GatewayErrorKind::BadRequest);
}

TEST_CASE("echo entries return the text after the marker") {
  auto mock = std::make_shared<MockChatBackend>();
  mock->script("echo", {Json{{"echo_after", "Message: "}}});
  auto g = testing::mock_gateway(mock);
  auto r = simple("echo");
  r.messages.back().content = "Emotions: calm\nMessage: hello there";
  CHECK(g->complete_chat(r).content == "hello there");
}

TEST_CASE("rate limiter spaces requests over a sliding minute") {
  testing::FakeClock fc;
  RateLimiter limiter(2, fc.clock());
  limiter.acquire();
  limiter.acquire();
  CHECK(*fc.slept == 0ms);
  limiter.acquire();
  CHECK(*fc.slept == 60000ms);
}

TEST_CASE("provenance log appends JSONL with continuing sequence numbers") {
  testing::TempDir dir;
  const auto file = dir.path() / "provenance.jsonl";
  auto mock = std::make_shared<MockChatBackend>();
  mock->script("t", {"ok"});
  {
    auto g = testing::mock_gateway(mock, std::make_shared<ProvenanceLog>(file));
    g->complete_chat(simple("t"));
  }
  {
    auto g = testing::mock_gateway(mock, std::make_shared<ProvenanceLog>(file));
    g->complete_chat(simple("t"));
  }
  std::ifstream in(file);
  std::string line;
  std::vector<Json> rows;
  while (std::getline(in, line)) rows.push_back(Json::parse(line));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["seq"] == 0);
  CHECK(rows[1]["seq"] == 1);
  CHECK(rows[1]["request_tag"] == "t");
  CHECK(rows[1]["messages"][0]["content"] == "hi");

  // A replay backend built from the log answers the same tags.
  auto replay = MockChatBackend::from_provenance(file);
  auto g = testing::mock_gateway(replay);
  CHECK(g->complete_chat(simple("t")).content == "ok");
}

TEST_CASE("repair loop feeds the error back and gives up after the budget") {
  auto mock = std::make_shared<MockChatBackend>();
  mock->script("fix", {"not json", "{\"v\": 0}", "{\"v\": 2}"});
  auto g = testing::mock_gateway(mock);
  auto validate = [](const Json& j) {
    if (j.at("v").get<int>() < 1) throw ValidationError(Issue{IssueCode::OutOfRangeScore, "v"});
    return j.at("v").get<int>();
  };
  auto result = ask_with_repair(*g, simple("fix"), JsonShape::Object, validate, 3);
  CHECK(result.value == 2);
  CHECK(result.attempts == 3);
  const auto last = mock->requests().back();
  REQUIRE(last.messages.size() == 5);
  CHECK(last.messages[1].role == MessageRole::Assistant);
  CHECK(last.messages[4].content.find("OutOfRangeScore(v)") != std::string::npos);

  mock->script("never", {"still not json"});
  try {
    ask_with_repair(*g, simple("never"), JsonShape::Object, validate, 2);
    FAIL("expected ValidationExhausted");
  } catch (const ValidationExhausted& e) {
    CHECK(e.attempts() == 2);
    CHECK(e.raw_outputs().front() == "still not json");
  }
}

TEST_CASE("http backend request body") {
  ChatRequest r = simple("t");
  r.temperature = 0.0;
  r.max_output_tokens = 16;
  const auto body = HttpChatBackend::request_body(r);
  CHECK(body["model"] == "m");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["max_tokens"] == 16);
  CHECK(body["messages"][0]["role"] == "user");
}

TEST_CASE("http backend without credentials is an auth failure") {
  BackendConfig cfg;
  cfg.api_key_env = "PCTDIALOG_TEST_UNSET_KEY_VARIABLE";
  cfg.base_url = "http://127.0.0.1:9";
  ChatGateway g(std::make_shared<HttpChatBackend>(), cfg);
  CHECK(failure_kind(g, simple("t")) == GatewayErrorKind::AuthFailure);
}
