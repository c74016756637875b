#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace pctdialog {

/// Template ids shipped with the library.
namespace template_id {
inline constexpr std::string_view kFilter = "filter";
inline constexpr std::string_view kProfile = "profile";
inline constexpr std::string_view kComplexity = "complexity";
inline constexpr std::string_view kStagePlan = "stage_plan";
inline constexpr std::string_view kStoryline = "storyline";
inline constexpr std::string_view kScript = "script";
inline constexpr std::string_view kClientRoleplay = "client_roleplay";
inline constexpr std::string_view kTherapistRoleplay = "therapist_roleplay";
inline constexpr std::string_view kTwoAgent = "two_agent";
inline constexpr std::string_view kLiveClient = "live_client";
inline constexpr std::string_view kLiveTherapist = "live_therapist";
inline constexpr std::string_view kGeneralEval = "general_eval";
inline constexpr std::string_view kBlriEval = "blri_eval";
/// Not a prompt: the five stage descriptions substituted for {{stages}}.
inline constexpr std::string_view kStageDefinitions = "stage_definitions";
}  // namespace template_id

/// Text with `{{name}}` placeholders.
class PromptTemplate {
 public:
  PromptTemplate(std::string id, std::string body);

  const std::string& id() const { return id_; }
  const std::string& body() const { return body_; }
  const std::set<std::string>& placeholders() const { return placeholders_; }

  /// Single-pass substitution; bound values are never re-scanned. Throws
  /// TemplateError naming every placeholder without a binding.
  std::string render(const std::map<std::string, std::string>& bindings) const;

 private:
  std::string id_;
  std::string body_;
  std::set<std::string> placeholders_;
};

class TemplateLibrary {
 public:
  /// Templates compiled into the library.
  static TemplateLibrary builtin();
  /// Built-ins overridden by `<id>.txt` files found in `dir`.
  static TemplateLibrary load(const std::filesystem::path& dir);

  const PromptTemplate& get(std::string_view id) const;
  bool contains(std::string_view id) const;
  std::set<std::string> ids() const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace pctdialog
