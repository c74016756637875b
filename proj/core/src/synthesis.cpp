#include "pctdialog/synthesis.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pctdialog/text.hpp"

namespace pctdialog {

using text::join;
using text::to_lower_ascii;
using text::trim;

CaseStage ClientCase::completion() const {
  if (storyline) return CaseStage::Storylined;
  if (plan) return CaseStage::Planned;
  if (traits) return CaseStage::Complexified;
  if (profile) return CaseStage::Profiled;
  if (relevant) return CaseStage::Filtered;
  return CaseStage::Ingested;
}

namespace {

// Uniform integer in [0, bound] by rejection, so the draw sequence does not
// depend on the standard library's distribution implementation.
std::uint64_t uniform_upto(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t range = bound + 1;
  if (range == 0) return rng();
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % range;
}

}  // namespace

std::vector<bool> complexity_flags(std::size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument("complexity ratio must be in [0, 1]");
  // The epsilon keeps ratios such as 0.29 * 100 from flooring to 28.
  auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  k = std::min(k, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_upto(rng, i - 1));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<bool> flags(n, false);
  for (std::size_t i = 0; i < k; ++i) flags[order[i]] = true;
  return flags;
}

std::vector<ClientCase> assign_complexity_split(std::vector<ClientCase> cases, double ratio, std::uint64_t seed) {
  const auto flags = complexity_flags(cases.size(), ratio, seed);
  for (std::size_t i = 0; i < cases.size(); ++i) cases[i].traits = ComplexityTraits{flags[i], {}};
  return cases;
}

bool parse_decision(const std::string& raw) {
  std::string s = to_lower_ascii(trim(raw));
  auto strip = [](char c) { return c == '.' || c == '!' || c == '"' || c == '\'' || c == '`' || c == '*'; };
  while (!s.empty() && strip(s.back())) s.pop_back();
  while (!s.empty() && strip(s.front())) s.erase(s.begin());
  s = std::string(trim(s));
  if (s == "yes") return true;
  if (s == "no") return false;
  throw ValidationError(Issue{IssueCode::UnparseableDecision, "decision", "expected \"yes\" or \"no\", got \"" + raw + "\""});
}

std::string describe(const StagePlan& plan) {
  std::ostringstream out;
  for (int stage = 1; stage <= static_cast<int>(kStageCount); ++stage) {
    out << "Stage " << stage << " (" << kStageTitles[static_cast<std::size_t>(stage - 1)] << "): "
        << join(option_texts(plan, stage), ", ");
    if (stage < static_cast<int>(kStageCount)) out << '\n';
  }
  return out.str();
}

std::string describe(const Storyline& storyline) {
  std::ostringstream out;
  for (std::size_t i = 0; i < kStageCount; ++i) {
    out << "Stage " << (i + 1) << ": " << storyline.stages[i];
    if (i + 1 < kStageCount) out << "\n\n";
  }
  return out.str();
}

Synthesizer::Synthesizer(ChatGateway& gateway, const TemplateLibrary& templates, SynthesisOptions options)
    : gateway_(gateway), templates_(templates), options_(std::move(options)) {
  if (options_.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  if (options_.turn_retries < 0) throw std::invalid_argument("turn_retries must be >= 0");
}

ChatRequest Synthesizer::request(const SamplingSettings& s, std::string tag, std::string prompt) const {
  ChatRequest r;
  r.model = s.model;
  r.temperature = s.temperature;
  r.max_output_tokens = s.max_output_tokens;
  r.request_tag = std::move(tag);
  r.messages.push_back(ChatMessage{MessageRole::User, std::move(prompt)});
  return r;
}

std::string Synthesizer::stages_text() const {
  return std::string(trim(templates_.get(template_id::kStageDefinitions).body()));
}

namespace {

const ClientProfile& need_profile(const ClientCase& c) {
  if (!c.profile) throw std::invalid_argument("case " + c.id() + " has no profile");
  return *c.profile;
}

std::string profile_text(const ClientProfile& p) { return to_json(p).dump(2); }

std::string traits_text(const ClientCase& c) {
  return c.traits ? describe(*c.traits) : describe(ComplexityTraits{});
}

}  // namespace

bool Synthesizer::filter_question(const Question& q) {
  auto prompt = templates_.get(template_id::kFilter).render({{"question", q.text}});
  return ask_with_repair_text(gateway_, request(options_.classification, "filter/" + q.id, std::move(prompt)),
                              parse_decision, options_.max_attempts)
      .value;
}

ClientProfile Synthesizer::build_profile(const Question& q) {
  auto prompt = templates_.get(template_id::kProfile).render({{"question", q.text}});
  return ask_with_repair(gateway_, request(options_.generation, "profile/" + q.id, std::move(prompt)),
                         JsonShape::Object, validate_profile, options_.max_attempts)
      .value;
}

ComplexityTraits Synthesizer::select_complexity(const ClientCase& c) {
  auto prompt = templates_.get(template_id::kComplexity).render({{"profile", profile_text(need_profile(c))}});
  return ask_with_repair(gateway_, request(options_.generation, "complexity/" + c.id(), std::move(prompt)),
                         JsonShape::Object, validate_complexity, options_.max_attempts)
      .value;
}

StagePlan Synthesizer::plan_stages(const ClientCase& c) {
  auto prompt = templates_.get(template_id::kStagePlan).render({{"profile", profile_text(need_profile(c))}});
  return ask_with_repair(
             gateway_, request(options_.generation, "stage_plan/" + c.id(), std::move(prompt)), JsonShape::Object,
             [](const Json& raw) { return validate_stage_plan(raw); }, options_.max_attempts)
      .value;
}

Storyline Synthesizer::write_storyline(const ClientCase& c) {
  if (!c.plan) throw std::invalid_argument("case " + c.id() + " has no stage plan");
  auto prompt = templates_.get(template_id::kStoryline)
                    .render({{"stages", stages_text()},
                             {"profile", profile_text(need_profile(c))},
                             {"stage_plan", describe(*c.plan)}});
  const auto& language = options_.language;
  return ask_with_repair(
             gateway_, request(options_.generation, "storyline/" + c.id(), std::move(prompt)), JsonShape::Object,
             [&](const Json& raw) { return validate_storyline(raw, language); }, options_.max_attempts)
      .value;
}

Transcript Synthesizer::script_dialogue(const ClientCase& c) {
  if (!c.storyline) throw std::invalid_argument("case " + c.id() + " has no storyline");
  auto prompt = templates_.get(template_id::kScript)
                    .render({{"stages", stages_text()},
                             {"profile", profile_text(need_profile(c))},
                             {"characteristics", traits_text(c)},
                             {"question", c.question.text},
                             {"storyline", describe(*c.storyline)}});
  const auto& id = c.id();
  return ask_with_repair(
             gateway_, request(options_.generation, "script/" + id, std::move(prompt)), JsonShape::Array,
             [&](const Json& raw) { return validate_transcript(raw, TranscriptMode::Script, id); },
             options_.max_attempts)
      .value;
}

Transcript Synthesizer::two_agent_dialogue(const ClientCase& c) {
  auto prompt = templates_.get(template_id::kTwoAgent)
                    .render({{"profile", profile_text(need_profile(c))}, {"characteristics", traits_text(c)}});
  const auto& id = c.id();
  return ask_with_repair(
             gateway_, request(options_.generation, "two_agent/" + id, std::move(prompt)), JsonShape::Array,
             [&](const Json& raw) { return validate_transcript(raw, TranscriptMode::TwoAgent, id); },
             options_.max_attempts)
      .value;
}

Transcript Synthesizer::roleplay_refine(const ClientCase& c, const Transcript& script) {
  if (!c.plan) throw std::invalid_argument("case " + c.id() + " has no stage plan");
  const auto therapist_system =
      templates_.get(template_id::kTherapistRoleplay).render({{"stages", stages_text()}});
  const auto client_system =
      templates_.get(template_id::kClientRoleplay).render({{"profile", profile_text(need_profile(c))}});

  Transcript out;
  out.mode = TranscriptMode::Hybrid;
  out.case_id = c.id();

  for (const auto& scripted : script.turns) {
    const bool therapist = scripted.role == Role::Therapist;
    ChatRequest req;
    req.model = options_.roleplay.model;
    req.temperature = options_.roleplay.temperature;
    req.max_output_tokens = options_.roleplay.max_output_tokens;
    req.request_tag = std::string(therapist ? "roleplay.therapist/" : "roleplay.client/") + c.id() + "/" +
                      std::to_string(scripted.turn);
    req.messages.push_back(ChatMessage{MessageRole::System, therapist ? therapist_system : client_system});
    // Each agent sees its own turns as assistant messages and the other side as user messages.
    for (const auto& prior : out.turns) {
      const bool own = prior.role == scripted.role;
      req.messages.push_back(ChatMessage{own ? MessageRole::Assistant : MessageRole::User, prior.content});
    }
    std::string guidance;
    if (therapist) {
      guidance = "Prompt for this turn. Follow it, adapting to what the client just said, without repeating yourself.\n";
    } else {
      guidance = "Emotions: " + (scripted.stage ? join(option_texts(*c.plan, *scripted.stage), ", ") : "") + "\n";
    }
    guidance += std::string(kMessageMarker) + scripted.content;
    req.messages.push_back(ChatMessage{MessageRole::User, std::move(guidance)});

    std::string content;
    std::string failure;
    for (int attempt = 0; attempt <= options_.turn_retries; ++attempt) {
      try {
        content = gateway_.complete_chat(req).content;
        if (!trim(content).empty()) {
          failure.clear();
          break;
        }
        failure = "empty output for turn " + std::to_string(scripted.turn);
      } catch (const GatewayError& e) {
        failure = "turn " + std::to_string(scripted.turn) + ": " + e.what();
      }
    }
    if (!failure.empty()) throw RefinementFailed(failure, out);
    out.turns.push_back(Turn{scripted.turn, scripted.role, scripted.stage, std::move(content)});
  }

  // The refined transcript must satisfy the same structural rules as the script.
  try {
    return validate_transcript(turns_to_json(out), TranscriptMode::Hybrid, c.id());
  } catch (const ValidationError& e) {
    throw RefinementFailed(e.what(), out);
  }
}

}  // namespace pctdialog
