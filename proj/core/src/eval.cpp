#include "pctdialog/eval.hpp"

#include <thread>

#include "pctdialog/repair.hpp"
#include "pctdialog/text.hpp"

namespace pctdialog {

void DialoguePair::validate() const {
  if (dialogue_1.turns.empty() || dialogue_2.turns.empty())
    throw std::invalid_argument("dialogue pair " + id + " has an empty transcript");
  if (label_1 == label_2) throw std::invalid_argument("dialogue pair " + id + " has identical labels " + label_1);
}

namespace {

template <std::size_t N>
Json row_json(const std::array<double, N>& a) {
  Json out = Json::array();
  for (double v : a) out.push_back(v);
  return out;
}

template <std::size_t N>
std::array<double, N> row_from(const Json& raw, const char* what) {
  if (!raw.is_array() || raw.size() != N)
    throw ValidationError(Issue{IssueCode::WrongShape, what, "expected " + std::to_string(N) + " numbers"});
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!raw[i].is_number()) throw ValidationError(Issue{IssueCode::WrongShape, what, "non-numeric score"});
    out[i] = raw[i].get<double>();
  }
  return out;
}

template <std::size_t N>
std::array<double, N> to_real(const std::array<int, N>& a) {
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = a[i];
  return out;
}

}  // namespace

Json PairJudgement::to_json() const {
  return Json{{"id", id},
              {"labels", Json::array({labels[0], labels[1]})},
              {"general", Json::array({row_json(general[0]), row_json(general[1])})},
              {"blri", Json::array({row_json(blri[0]), row_json(blri[1])})},
              {"identical_general", identical_general},
              {"passes", passes}};
}

PairJudgement pair_judgement_from_json(const Json& raw) {
  if (!raw.is_object()) throw ValidationError(Issue{IssueCode::WrongShape, "judgement"});
  for (const char* key : {"id", "labels", "general", "blri"})
    if (!raw.contains(key)) throw ValidationError(Issue{IssueCode::MissingField, key});
  PairJudgement j;
  j.id = raw["id"].get<std::string>();
  const auto& labels = raw["labels"];
  if (!labels.is_array() || labels.size() != 2 || !labels[0].is_string() || !labels[1].is_string())
    throw ValidationError(Issue{IssueCode::WrongShape, "labels"});
  j.labels = {labels[0].get<std::string>(), labels[1].get<std::string>()};
  if (!raw["general"].is_array() || raw["general"].size() != 2 || !raw["blri"].is_array() || raw["blri"].size() != 2)
    throw ValidationError(Issue{IssueCode::WrongShape, "scores"});
  std::vector<Issue> issues;
  for (std::size_t d = 0; d < 2; ++d) {
    j.general[d] = row_from<kGeneralMetricCount>(raw["general"][d], "general");
    j.blri[d] = row_from<kBlriItemCount>(raw["blri"][d], "blri");
    for (double v : j.general[d])
      if (v < 1.0 || v > 10.0) issues.push_back(Issue{IssueCode::OutOfRangeScore, "general", std::to_string(v)});
    for (double v : j.blri[d])
      if (v < -3.0 || v > 3.0) issues.push_back(Issue{IssueCode::OutOfRangeScore, "blri", std::to_string(v)});
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  j.identical_general = raw.value("identical_general", false);
  j.passes = raw.value("passes", 1);
  return j;
}

PairJudgement make_judgement(std::string id, std::array<std::string, 2> labels, const GeneralScores& general,
                             const BlriScores& blri) {
  PairJudgement j;
  j.id = std::move(id);
  j.labels = std::move(labels);
  j.general = {to_real(general.dialogue_1), to_real(general.dialogue_2)};
  j.blri = {to_real(blri.dialogue_1), to_real(blri.dialogue_2)};
  j.identical_general = general.identical();
  return j;
}

// ---------------------------------------------------------------------------

Judge::Judge(ChatGateway& gateway, const TemplateLibrary& templates, SamplingSettings settings, int max_attempts)
    : gateway_(gateway), templates_(templates), settings_(std::move(settings)), max_attempts_(max_attempts) {}

ChatRequest Judge::request(std::string tag, std::string prompt) const {
  ChatRequest r;
  r.model = settings_.model;
  r.temperature = settings_.temperature;
  r.max_output_tokens = settings_.max_output_tokens;
  r.request_tag = std::move(tag);
  r.messages.push_back(ChatMessage{MessageRole::User, std::move(prompt)});
  return r;
}

namespace {

std::string tag_for(std::string_view rubric, const DialoguePair& pair, std::string_view pass) {
  std::string tag(rubric);
  if (!pair.id.empty()) tag += "/" + pair.id;
  if (!pass.empty()) tag += "/" + std::string(pass);
  return tag;
}

}  // namespace

GeneralScores Judge::general_eval(const DialoguePair& pair, std::string_view pass) {
  pair.validate();
  auto prompt = templates_.get(template_id::kGeneralEval)
                    .render({{"dialogue_1", render_dialogue(pair.dialogue_1)},
                             {"dialogue_2", render_dialogue(pair.dialogue_2)}});
  return ask_with_repair(gateway_, request(tag_for("judge.general", pair, pass), std::move(prompt)),
                         JsonShape::Array, validate_general_scores, max_attempts_)
      .value;
}

BlriScores Judge::blri_eval(const DialoguePair& pair, std::string_view pass) {
  pair.validate();
  auto prompt = templates_.get(template_id::kBlriEval)
                    .render({{"dialogue_1", render_dialogue(pair.dialogue_1)},
                             {"dialogue_2", render_dialogue(pair.dialogue_2)}});
  return ask_with_repair(gateway_, request(tag_for("judge.blri", pair, pass), std::move(prompt)), JsonShape::Array,
                         validate_blri_scores, max_attempts_)
      .value;
}

PairJudgement Judge::judge_pair(const DialoguePair& pair, bool mitigate_position_bias) {
  pair.validate();
  const auto general = general_eval(pair);
  const auto blri = blri_eval(pair);
  auto result = make_judgement(pair.id, {pair.label_1, pair.label_2}, general, blri);
  if (!mitigate_position_bias) return result;

  const auto flipped = pair.swapped();
  const auto general_b = general_eval(flipped, "swapped");
  const auto blri_b = blri_eval(flipped, "swapped");
  // In the swapped pass dialogue_1 of the prompt is our dialogue_2.
  for (std::size_t m = 0; m < kGeneralMetricCount; ++m) {
    result.general[0][m] = (general.dialogue_1[m] + general_b.dialogue_2[m]) / 2.0;
    result.general[1][m] = (general.dialogue_2[m] + general_b.dialogue_1[m]) / 2.0;
  }
  for (std::size_t i = 0; i < kBlriItemCount; ++i) {
    result.blri[0][i] = (blri.dialogue_1[i] + blri_b.dialogue_2[i]) / 2.0;
    result.blri[1][i] = (blri.dialogue_2[i] + blri_b.dialogue_1[i]) / 2.0;
  }
  result.identical_general = general.identical() || general_b.identical();
  result.passes = 2;
  return result;
}

std::vector<JudgeOutcome> judge_pairs(Judge& judge, const std::vector<DialoguePair>& pairs, bool mitigate,
                                      int workers) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  std::vector<JudgeOutcome> out(pairs.size());
  auto one = [&](std::size_t i) {
    try {
      out[i].judgement = judge.judge_pair(pairs[i], mitigate);
    } catch (const ValidationExhausted& e) {
      out[i].error = e.what();
      out[i].raw_outputs = e.raw_outputs();
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  };
  const auto chunk = static_cast<std::size_t>(workers);
  for (std::size_t start = 0; start < pairs.size(); start += chunk) {
    const auto end = std::min(pairs.size(), start + chunk);
    std::vector<std::thread> threads;
    for (std::size_t i = start + 1; i < end; ++i) threads.emplace_back(one, i);
    one(start);
    for (auto& t : threads) t.join();
  }
  return out;
}

// ---------------------------------------------------------------------------

void LiveSessionConfig::validate() const {
  if (max_turns < 2) throw std::invalid_argument("max_turns must be >= 2");
  if (end_token.empty()) throw std::invalid_argument("end token must not be empty");
}

namespace {

std::string strip_all(std::string s, const std::string& token) {
  for (auto pos = s.find(token); pos != std::string::npos; pos = s.find(token, pos)) s.erase(pos, token.size());
  return s;
}

}  // namespace

Transcript live_session(const LiveSessionConfig& cfg, ChatGateway& therapist, ChatGateway& client,
                        const TemplateLibrary& templates) {
  cfg.validate();
  const auto therapist_system = templates.get(template_id::kLiveTherapist).render({});
  const auto client_system =
      templates.get(template_id::kLiveClient).render({{"profile", to_json(cfg.profile).dump(2)}});

  Transcript t;
  t.mode = TranscriptMode::Live;
  t.case_id = cfg.case_id;

  for (int turn = 1; turn <= cfg.max_turns; ++turn) {
    const bool therapist_turn = turn % 2 == 1;
    const Role role = therapist_turn ? Role::Therapist : Role::Client;
    const auto& settings = therapist_turn ? cfg.therapist : cfg.client;
    ChatRequest req;
    req.model = settings.model;
    req.temperature = settings.temperature;
    req.max_output_tokens = settings.max_output_tokens;
    req.request_tag = std::string(therapist_turn ? "live.therapist/" : "live.client/") + cfg.case_id + "/" +
                      std::to_string(turn);
    req.messages.push_back(ChatMessage{MessageRole::System, therapist_turn ? therapist_system : client_system});
    for (const auto& prior : t.turns)
      req.messages.push_back(ChatMessage{prior.role == role ? MessageRole::Assistant : MessageRole::User, prior.content});

    auto& gateway = therapist_turn ? therapist : client;
    std::string content;
    bool ended = false;
    for (int attempt = 0; attempt < 2; ++attempt) {
      content = gateway.complete_chat(req).content;
      if (therapist_turn && content.find(cfg.end_token) != std::string::npos) {
        ended = true;
        content = std::string(text::trim(strip_all(content, cfg.end_token)));
        break;
      }
      if (!text::trim(content).empty()) break;
      content.clear();
    }
    if (!ended && content.empty())
      throw EmptyTurn("EmptyTurn: " + std::string(to_string(role)) + " returned blank content at turn " +
                      std::to_string(turn));
    if (!content.empty()) t.turns.push_back(Turn{turn, role, std::nullopt, std::move(content)});
    if (ended) break;
  }
  return t;
}

}  // namespace pctdialog
