#include <chrono>
#include <cstdlib>

#include <httplib.h>

#include "pctdialog/gateway.hpp"

namespace pctdialog {

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

ParsedUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  ParsedUrl parsed;
  parsed.scheme_host_port = url.substr(0, path_start);
  if (path_start != std::string::npos) parsed.path_prefix = url.substr(path_start);
  while (!parsed.path_prefix.empty() && parsed.path_prefix.back() == '/') parsed.path_prefix.pop_back();
  return parsed;
}

}  // namespace

Json HttpChatBackend::request_body(const ChatRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back(Json{{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  return Json{{"model", request.model},
              {"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_output_tokens}};
}

BackendReply HttpChatBackend::send(const ChatRequest& request, const BackendConfig& config) {
  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      // Missing credentials behave like a rejected key: not retryable.
      BackendReply r = BackendReply::http(401, "environment variable " + config.api_key_env + " is not set");
      return r;
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const auto url = split_url(config.base_url);
  httplib::Client client(url.scheme_host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const auto started = std::chrono::steady_clock::now();
  auto result = client.Post(url.path_prefix + "/chat/completions", headers, request_body(request).dump(),
                            "application/json");
  if (!result) {
    BackendReply r;
    const auto err = result.error();
    const bool elapsed = std::chrono::steady_clock::now() - started >= config.timeout;
    r.status = err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed)
                   ? BackendReply::Status::Timeout
                   : BackendReply::Status::Transport;
    r.error = httplib::to_string(err);
    return r;
  }
  if (result->status != 200) return BackendReply::http(result->status, result->body);

  auto body = Json::parse(result->body, nullptr, false);
  if (body.is_discarded() || !body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
    BackendReply r;
    r.status = BackendReply::Status::Transport;
    r.error = "malformed completion response";
    return r;
  }
  const auto& message = body["choices"][0]["message"];
  BackendReply reply = BackendReply::ok(message.contains("content") && message["content"].is_string()
                                            ? message["content"].get<std::string>()
                                            : std::string());
  if (body.contains("usage") && body["usage"].is_object()) {
    reply.usage.prompt_tokens = body["usage"].value("prompt_tokens", 0);
    reply.usage.completion_tokens = body["usage"].value("completion_tokens", 0);
  }
  return reply;
}

}  // namespace pctdialog
