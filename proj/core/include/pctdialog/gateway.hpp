#pragma once

// Chat-completion access: request/response types, the backend interface with
// an HTTP and a scripted implementation, sliding-window rate limiting,
// retry with exponential backoff, and a JSONL provenance log.

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pctdialog/domain.hpp"

namespace pctdialog {

enum class MessageRole { System, User, Assistant };
std::string_view to_string(MessageRole role);

struct ChatMessage {
  MessageRole role = MessageRole::User;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  int max_output_tokens = 4096;
  std::string request_tag;  // "<stage>/<case id>[/<turn>]", used for logging and mock lookup

  /// Throws std::invalid_argument when messages are empty, the first message is
  /// an assistant message, temperature is negative or the token cap is not positive.
  void validate() const;
};

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string content;
  TokenUsage usage;
  std::chrono::milliseconds latency{0};
  int attempt = 1;
};

struct BackoffPolicy {
  std::chrono::milliseconds initial{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max{30'000};

  /// Delay before retry number `retry` (1-based).
  std::chrono::milliseconds delay_for(int retry) const;
};

struct BackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::milliseconds timeout{120'000};
  int max_retries = 3;
  BackoffPolicy backoff;
  int requests_per_minute = 0;  // 0 = unlimited

  void validate() const;
};

/// Outcome of a single physical call, before any retry policy.
struct BackendReply {
  enum class Status { Ok, Http, Timeout, Transport };
  Status status = Status::Ok;
  int http_status = 200;
  std::string content;
  TokenUsage usage;
  std::string error;

  static BackendReply ok(std::string content) { return BackendReply{Status::Ok, 200, std::move(content), {}, {}}; }
  static BackendReply http(int status, std::string body = {}) {
    return BackendReply{Status::Http, status, {}, {}, std::move(body)};
  }
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual BackendReply send(const ChatRequest& request, const BackendConfig& config) = 0;
};

/// OpenAI-compatible `POST {base_url}/chat/completions` with bearer auth read
/// from the environment variable named in the config.
class HttpChatBackend final : public ChatBackend {
 public:
  BackendReply send(const ChatRequest& request, const BackendConfig& config) override;

  static Json request_body(const ChatRequest& request);
};

/// Scripted offline backend. Responses are keyed by request tag; each tag has
/// its own call counter, so the n-th call for a tag gets the n-th scripted entry
/// (the last entry repeats). A tag with no script falls back to its parent tag
/// by dropping trailing "/segments", so a script for "profile" answers
/// "profile/q001" and "profile/q002" alike.
///
/// Entry forms (JSON):
///   "text"                          reply with that text
///   {"content": "..."}              same
///   {"json": <value>}               reply with the value serialized
///   {"status": 429}                 HTTP error with that status
///   {"timeout": true}               simulated timeout
///   {"transport_error": "..."}      simulated connection failure
///   {"echo_after": "Message: "}     reply with the text of the last user message
///                                   after the first occurrence of the marker
class MockChatBackend final : public ChatBackend {
 public:
  using Handler = std::function<std::optional<BackendReply>(const ChatRequest&)>;

  MockChatBackend() = default;

  /// Loads every `*.json` file in `dir`; file stem is the tag with '@' standing for '/'.
  static std::shared_ptr<MockChatBackend> from_directory(const std::filesystem::path& dir);
  /// Replays a provenance log: each successful call's content becomes a scripted entry for its tag.
  static std::shared_ptr<MockChatBackend> from_provenance(const std::filesystem::path& log);

  void script(const std::string& tag, std::vector<Json> entries);
  /// Consulted before scripts; return nullopt to fall through.
  void set_handler(Handler handler);

  BackendReply send(const ChatRequest& request, const BackendConfig& config) override;

  std::size_t total_calls() const;
  /// Number of calls whose tag equals `prefix` or starts with `prefix` followed by '/'.
  std::size_t calls_with_prefix(const std::string& prefix) const;
  std::vector<ChatRequest> requests() const;

 private:
  const std::vector<Json>* find_script(const std::string& tag) const;
  static BackendReply render(const Json& entry, const ChatRequest& request);

  mutable std::mutex mutex_;
  std::map<std::string, std::vector<Json>> scripts_;
  std::map<std::string, std::size_t> counters_;
  std::vector<ChatRequest> requests_;
  Handler handler_;
};

/// Time source and sleep function; swapped out in tests.
struct Clock {
  using time_point = std::chrono::steady_clock::time_point;
  std::function<time_point()> now;
  std::function<void(std::chrono::milliseconds)> sleep;

  static Clock system();
};

/// Admits at most `per_minute` acquisitions in any sliding 60 s window.
class RateLimiter {
 public:
  RateLimiter(int per_minute, Clock clock);

  /// Blocks until a slot is free. No-op when per_minute is 0.
  void acquire();

 private:
  int per_minute_;
  Clock clock_;
  std::mutex mutex_;
  std::deque<Clock::time_point> admitted_;
};

struct ProvenanceEntry {
  std::string request_tag;
  std::string model;
  int attempt = 1;
  std::string outcome;  // "ok", "http_429", "timeout", "transport", ...
  int http_status = 0;
  std::int64_t latency_ms = 0;
  std::vector<ChatMessage> messages;
  std::string content;
  std::string error;
  TokenUsage usage;
};

/// Append-only JSONL log with one record per physical backend call.
class ProvenanceLog {
 public:
  ProvenanceLog() = default;  // in-memory only
  explicit ProvenanceLog(const std::filesystem::path& file);

  void record(ProvenanceEntry entry);
  std::vector<ProvenanceEntry> entries() const;
  std::size_t size() const;

  static Json to_json(const ProvenanceEntry& entry, std::uint64_t seq);

 private:
  mutable std::mutex mutex_;
  std::vector<ProvenanceEntry> entries_;
  std::optional<std::filesystem::path> file_;
  std::uint64_t next_seq_ = 0;
};

/// Applies the retry policy around a backend: retries transport failures,
/// timeouts, HTTP 429 and 5xx with exponential backoff; never retries other 4xx.
class ChatGateway {
 public:
  ChatGateway(std::shared_ptr<ChatBackend> backend, BackendConfig config,
              std::shared_ptr<ProvenanceLog> log = nullptr, Clock clock = Clock::system());

  ChatResponse complete_chat(const ChatRequest& request);

  const BackendConfig& config() const { return config_; }

 private:
  std::shared_ptr<ChatBackend> backend_;
  BackendConfig config_;
  std::shared_ptr<ProvenanceLog> log_;
  Clock clock_;
  std::shared_ptr<RateLimiter> limiter_;
};

}  // namespace pctdialog
