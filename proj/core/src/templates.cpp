#include "pctdialog/templates.hpp"

#include <fstream>
#include <sstream>

#include "pctdialog/error.hpp"

namespace pctdialog {

namespace detail {
const std::map<std::string, std::string>& embedded_templates();
}

namespace {

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Calls on_text / on_placeholder for each segment of `body`.
template <class OnText, class OnPlaceholder>
void walk(const std::string& body, OnText&& on_text, OnPlaceholder&& on_placeholder) {
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto open = body.find("{{", pos);
    if (open == std::string::npos) break;
    auto close = body.find("}}", open + 2);
    if (close == std::string::npos) break;
    auto name = body.substr(open + 2, close - open - 2);
    bool valid = !name.empty();
    for (char c : name) valid = valid && is_name_char(c);
    if (!valid) {
      on_text(body.substr(pos, open + 2 - pos));
      pos = open + 2;
      continue;
    }
    on_text(body.substr(pos, open - pos));
    on_placeholder(name);
    pos = close + 2;
  }
  on_text(body.substr(pos));
}

}  // namespace

PromptTemplate::PromptTemplate(std::string id, std::string body) : id_(std::move(id)), body_(std::move(body)) {
  walk(body_, [](const std::string&) {}, [&](const std::string& name) { placeholders_.insert(name); });
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
  std::string out;
  std::string missing;
  walk(
      body_, [&](const std::string& text) { out += text; },
      [&](const std::string& name) {
        auto it = bindings.find(name);
        if (it == bindings.end()) {
          if (missing.find("{{" + name + "}}") == std::string::npos) missing += " {{" + name + "}}";
          return;
        }
        out += it->second;
      });
  if (!missing.empty()) throw TemplateError("template '" + id_ + "' has unbound placeholders:" + missing);
  return out;
}

TemplateLibrary TemplateLibrary::builtin() {
  TemplateLibrary lib;
  for (const auto& [id, body] : detail::embedded_templates()) lib.templates_.emplace(id, PromptTemplate(id, body));
  return lib;
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw TemplateError("template directory not found: " + dir.string());
  TemplateLibrary lib = builtin();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto id = entry.path().stem().string();
    lib.templates_.insert_or_assign(id, PromptTemplate(id, buf.str()));
  }
  return lib;
}

const PromptTemplate& TemplateLibrary::get(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw TemplateError("unknown template id: " + std::string(id));
  return it->second;
}

bool TemplateLibrary::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

std::set<std::string> TemplateLibrary::ids() const {
  std::set<std::string> out;
  for (const auto& [id, _] : templates_) out.insert(id);
  return out;
}

}  // namespace pctdialog
