#include "pctdialog/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace pctdialog {

std::string_view to_string(MessageRole role) {
  switch (role) {
    case MessageRole::System: return "system";
    case MessageRole::User: return "user";
    case MessageRole::Assistant: return "assistant";
  }
  return "user";
}

void ChatRequest::validate() const {
  if (messages.empty()) throw std::invalid_argument("chat request has no messages");
  if (messages.front().role == MessageRole::Assistant)
    throw std::invalid_argument("first message must be a system or user message");
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (max_output_tokens <= 0) throw std::invalid_argument("max_output_tokens must be positive");
}

std::chrono::milliseconds BackoffPolicy::delay_for(int retry) const {
  const double factor = std::pow(multiplier, std::max(0, retry - 1));
  const double ms = static_cast<double>(initial.count()) * factor;
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::min(ms, static_cast<double>(max.count()))));
}

void BackendConfig::validate() const {
  if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (timeout.count() <= 0) throw std::invalid_argument("timeout must be > 0");
  if (requests_per_minute < 0) throw std::invalid_argument("requests_per_minute must be >= 0");
}

Clock Clock::system() {
  return Clock{[] { return std::chrono::steady_clock::now(); },
               [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }};
}

// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(int per_minute, Clock clock) : per_minute_(per_minute), clock_(std::move(clock)) {}

void RateLimiter::acquire() {
  if (per_minute_ <= 0) return;
  constexpr auto kWindow = std::chrono::seconds(60);
  std::lock_guard lock(mutex_);
  while (true) {
    const auto now = clock_.now();
    while (!admitted_.empty() && now - admitted_.front() >= kWindow) admitted_.pop_front();
    if (static_cast<int>(admitted_.size()) < per_minute_) {
      admitted_.push_back(now);
      return;
    }
    auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(admitted_.front() + kWindow - now);
    clock_.sleep(std::max(wait, std::chrono::milliseconds(1)));
  }
}

// ---------------------------------------------------------------------------

ProvenanceLog::ProvenanceLog(const std::filesystem::path& file) : file_(file) {
  // Continue numbering after records from earlier invocations of the same run.
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++next_seq_;
  }
}

Json ProvenanceLog::to_json(const ProvenanceEntry& e, std::uint64_t seq) {
  Json messages = Json::array();
  for (const auto& m : e.messages) messages.push_back(Json{{"role", std::string(to_string(m.role))}, {"content", m.content}});
  Json out{{"seq", seq},
           {"request_tag", e.request_tag},
           {"model", e.model},
           {"attempt", e.attempt},
           {"outcome", e.outcome},
           {"http_status", e.http_status},
           {"latency_ms", e.latency_ms},
           {"messages", std::move(messages)},
           {"content", e.content}};
  if (!e.error.empty()) out["error"] = e.error;
  out["usage"] = Json{{"prompt_tokens", e.usage.prompt_tokens}, {"completion_tokens", e.usage.completion_tokens}};
  return out;
}

void ProvenanceLog::record(ProvenanceEntry entry) {
  std::lock_guard lock(mutex_);
  if (file_) {
    std::ofstream out(*file_, std::ios::app | std::ios::binary);
    out << to_json(entry, next_seq_).dump() << '\n';
  }
  ++next_seq_;
  entries_.push_back(std::move(entry));
}

std::vector<ProvenanceEntry> ProvenanceLog::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::size_t ProvenanceLog::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------

ChatGateway::ChatGateway(std::shared_ptr<ChatBackend> backend, BackendConfig config,
                         std::shared_ptr<ProvenanceLog> log, Clock clock)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      log_(std::move(log)),
      clock_(std::move(clock)),
      limiter_(std::make_shared<RateLimiter>(config_.requests_per_minute, clock_)) {
  config_.validate();
  if (!backend_) throw std::invalid_argument("ChatGateway needs a backend");
}

namespace {

std::string outcome_label(const BackendReply& r) {
  switch (r.status) {
    case BackendReply::Status::Ok: return "ok";
    case BackendReply::Status::Http: return "http_" + std::to_string(r.http_status);
    case BackendReply::Status::Timeout: return "timeout";
    case BackendReply::Status::Transport: return "transport";
  }
  return "unknown";
}

bool retryable(const BackendReply& r) {
  switch (r.status) {
    case BackendReply::Status::Ok: return false;
    case BackendReply::Status::Timeout:
    case BackendReply::Status::Transport: return true;
    case BackendReply::Status::Http: return r.http_status == 429 || r.http_status >= 500;
  }
  return false;
}

GatewayError to_error(const BackendReply& r, int attempts) {
  switch (r.status) {
    case BackendReply::Status::Timeout:
      return GatewayError(GatewayErrorKind::Timeout, r.error.empty() ? "request timed out" : r.error, attempts);
    case BackendReply::Status::Transport:
      return GatewayError(GatewayErrorKind::TransportError, r.error, attempts);
    case BackendReply::Status::Http:
      if (r.http_status == 429)
        return GatewayError(GatewayErrorKind::RateLimited, "HTTP 429 after retries", attempts, 429);
      if (r.http_status == 401 || r.http_status == 403)
        return GatewayError(GatewayErrorKind::AuthFailure, "HTTP " + std::to_string(r.http_status), attempts,
                            r.http_status);
      if (r.http_status >= 500)
        return GatewayError(GatewayErrorKind::TransportError, "HTTP " + std::to_string(r.http_status), attempts,
                            r.http_status);
      return GatewayError(GatewayErrorKind::BadRequest, "HTTP " + std::to_string(r.http_status) + " " + r.error,
                          attempts, r.http_status);
    case BackendReply::Status::Ok: break;
  }
  return GatewayError(GatewayErrorKind::TransportError, "unexpected state", attempts);
}

}  // namespace

ChatResponse ChatGateway::complete_chat(const ChatRequest& request) {
  request.validate();
  const int max_attempts = 1 + config_.max_retries;
  for (int attempt = 1;; ++attempt) {
    limiter_->acquire();
    const auto started = clock_.now();
    BackendReply reply;
    try {
      reply = backend_->send(request, config_);
    } catch (const std::exception& e) {
      reply.status = BackendReply::Status::Transport;
      reply.error = e.what();
    }
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(clock_.now() - started);

    if (log_) {
      log_->record(ProvenanceEntry{request.request_tag, request.model, attempt, outcome_label(reply),
                                   reply.status == BackendReply::Status::Http || reply.status == BackendReply::Status::Ok
                                       ? reply.http_status
                                       : 0,
                                   latency.count(), request.messages, reply.content, reply.error, reply.usage});
    }

    if (reply.status == BackendReply::Status::Ok) {
      return ChatResponse{std::move(reply.content), reply.usage, latency, attempt};
    }
    if (!retryable(reply) || attempt >= max_attempts) throw to_error(reply, attempt);
    clock_.sleep(config_.backoff.delay_for(attempt));
  }
}

}  // namespace pctdialog

#include "pctdialog/repair.hpp"

namespace pctdialog {

std::string repair_instruction(const std::string& error) {
  return "Your previous answer could not be accepted: " + error +
         "\nReply again with only the corrected output in the required format.";
}

}  // namespace pctdialog
