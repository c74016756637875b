#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pctdialog/gateway.hpp"

namespace pctdialog {

namespace {

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read mock script " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto parsed = Json::parse(buf.str(), nullptr, false);
  if (parsed.is_discarded()) throw std::runtime_error("mock script is not valid JSON: " + path.string());
  return parsed;
}

}  // namespace

std::shared_ptr<MockChatBackend> MockChatBackend::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("mock directory not found: " + dir.string());
  auto mock = std::make_shared<MockChatBackend>();
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::string tag = file.stem().string();
    std::replace(tag.begin(), tag.end(), '@', '/');
    auto value = read_json_file(file);
    std::vector<Json> entries;
    if (value.is_array()) {
      for (auto& e : value) entries.push_back(e);
    } else {
      entries.push_back(value);
    }
    mock->script(tag, std::move(entries));
  }
  return mock;
}

std::shared_ptr<MockChatBackend> MockChatBackend::from_provenance(const std::filesystem::path& log) {
  std::ifstream in(log, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read provenance log " + log.string());
  std::map<std::string, std::vector<Json>> scripts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto rec = Json::parse(line, nullptr, false);
    if (rec.is_discarded()) continue;
    const auto tag = rec.value("request_tag", std::string());
    const auto outcome = rec.value("outcome", std::string());
    if (outcome == "ok") {
      scripts[tag].push_back(Json{{"content", rec.value("content", std::string())}});
    } else if (outcome.rfind("http_", 0) == 0) {
      scripts[tag].push_back(Json{{"status", rec.value("http_status", 500)}});
    } else if (outcome == "timeout") {
      scripts[tag].push_back(Json{{"timeout", true}});
    } else {
      scripts[tag].push_back(Json{{"transport_error", rec.value("error", std::string("replayed failure"))}});
    }
  }
  auto mock = std::make_shared<MockChatBackend>();
  for (auto& [tag, entries] : scripts) mock->script(tag, std::move(entries));
  return mock;
}

void MockChatBackend::script(const std::string& tag, std::vector<Json> entries) {
  std::lock_guard lock(mutex_);
  scripts_[tag] = std::move(entries);
}

void MockChatBackend::set_handler(Handler handler) {
  std::lock_guard lock(mutex_);
  handler_ = std::move(handler);
}

const std::vector<Json>* MockChatBackend::find_script(const std::string& tag) const {
  std::string key = tag;
  while (true) {
    auto it = scripts_.find(key);
    if (it != scripts_.end() && !it->second.empty()) return &it->second;
    auto slash = key.rfind('/');
    if (slash == std::string::npos) return nullptr;
    key.resize(slash);
  }
}

BackendReply MockChatBackend::render(const Json& entry, const ChatRequest& request) {
  if (entry.is_string()) return BackendReply::ok(entry.get<std::string>());
  if (!entry.is_object()) return BackendReply::ok(entry.dump());
  if (entry.contains("content")) return BackendReply::ok(entry["content"].get<std::string>());
  if (entry.contains("json")) return BackendReply::ok(entry["json"].dump(2));
  if (entry.contains("status")) return BackendReply::http(entry["status"].get<int>(), "scripted failure");
  if (entry.contains("timeout")) {
    BackendReply r;
    r.status = BackendReply::Status::Timeout;
    r.error = "scripted timeout";
    return r;
  }
  if (entry.contains("transport_error")) {
    BackendReply r;
    r.status = BackendReply::Status::Transport;
    r.error = entry["transport_error"].get<std::string>();
    return r;
  }
  if (entry.contains("echo_after")) {
    const auto marker = entry["echo_after"].get<std::string>();
    auto last_user = std::find_if(request.messages.rbegin(), request.messages.rend(),
                                  [](const ChatMessage& m) { return m.role == MessageRole::User; });
    if (last_user == request.messages.rend()) return BackendReply::ok("");
    const auto& text = last_user->content;
    auto pos = marker.empty() ? std::string::npos : text.find(marker);
    return BackendReply::ok(pos == std::string::npos ? text : text.substr(pos + marker.size()));
  }
  return BackendReply::ok(entry.dump());
}

BackendReply MockChatBackend::send(const ChatRequest& request, const BackendConfig&) {
  Handler handler;
  Json entry;
  bool have_entry = false;
  {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    const auto n = counters_[request.request_tag]++;
    handler = handler_;
    if (const auto* script = find_script(request.request_tag)) {
      entry = (*script)[std::min<std::size_t>(n, script->size() - 1)];
      have_entry = true;
    }
  }
  if (handler) {
    if (auto reply = handler(request)) return *reply;
  }
  if (!have_entry) {
    BackendReply r;
    r.status = BackendReply::Status::Http;
    r.http_status = 404;
    r.error = "no mock script for tag " + request.request_tag;
    return r;
  }
  return render(entry, request);
}

std::size_t MockChatBackend::total_calls() const {
  std::lock_guard lock(mutex_);
  return requests_.size();
}

std::size_t MockChatBackend::calls_with_prefix(const std::string& prefix) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(std::count_if(requests_.begin(), requests_.end(), [&](const ChatRequest& r) {
    return r.request_tag == prefix ||
           (r.request_tag.size() > prefix.size() && r.request_tag.compare(0, prefix.size(), prefix) == 0 &&
            r.request_tag[prefix.size()] == '/');
  }));
}

std::vector<ChatRequest> MockChatBackend::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

}  // namespace pctdialog
