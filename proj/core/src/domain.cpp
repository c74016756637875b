#include "pctdialog/domain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "pctdialog/text.hpp"

namespace pctdialog {

namespace {

std::string stage_key(int stage) { return "stage_" + std::to_string(stage); }

Issue issue(IssueCode code, std::string field = {}, std::string detail = {}) {
  return Issue{code, std::move(field), std::move(detail), 0, 0};
}

Issue stage_issue(IssueCode code, int stage, std::string field = {}, int limit = 0) {
  return Issue{code, std::move(field), {}, stage, limit};
}

void throw_if_any(std::vector<Issue>& issues) {
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

// Reads a non-empty list of non-empty strings. Appends issues and returns what it could read.
std::vector<std::string> read_text_list(const Json& raw, const std::string& key, std::vector<Issue>& issues) {
  std::vector<std::string> out;
  auto it = raw.find(key);
  if (it == raw.end()) {
    issues.push_back(issue(IssueCode::MissingField, key));
    return out;
  }
  if (!it->is_array()) {
    issues.push_back(issue(IssueCode::WrongShape, key, "expected a list"));
    return out;
  }
  if (it->empty()) {
    issues.push_back(issue(IssueCode::EmptyField, key));
    return out;
  }
  bool reported = false;
  for (const auto& entry : *it) {
    if (!entry.is_string()) {
      if (!reported) issues.push_back(issue(IssueCode::WrongShape, key, "list entries must be text"));
      reported = true;
      continue;
    }
    auto value = std::string(text::trim(entry.get<std::string>()));
    if (value.empty()) {
      if (!reported) issues.push_back(issue(IssueCode::EmptyField, key, "blank list entry"));
      reported = true;
      continue;
    }
    out.push_back(std::move(value));
  }
  return out;
}

std::string read_text(const Json& raw, const std::string& key, std::vector<Issue>& issues) {
  auto it = raw.find(key);
  if (it == raw.end()) {
    issues.push_back(issue(IssueCode::MissingField, key));
    return {};
  }
  if (!it->is_string()) {
    issues.push_back(issue(IssueCode::WrongShape, key, "expected text"));
    return {};
  }
  auto value = std::string(text::trim(it->get<std::string>()));
  if (value.empty()) issues.push_back(issue(IssueCode::EmptyField, key));
  return value;
}

// Integer from a JSON number or numeric string ("+2", " 7 "). nullopt when not integral.
std::optional<int> read_int(const Json& v) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (std::isfinite(d) && std::floor(d) == d && std::fabs(d) < 1e6) return static_cast<int>(d);
    return std::nullopt;
  }
  if (v.is_string()) {
    auto s = text::trim(v.get_ref<const std::string&>());
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc{} && ptr == s.data() + s.size() && !s.empty()) return value;
  }
  return std::nullopt;
}

// Accepts a bare array, a single nested array ("[[...]]") or an object wrapping one array.
const Json* unwrap_rows(const Json& raw) {
  const Json* rows = &raw;
  if (rows->is_object()) {
    const Json* found = nullptr;
    for (const auto& [key, value] : rows->items()) {
      if (value.is_array()) {
        if (found) return nullptr;
        found = &value;
      }
    }
    rows = found;
  }
  if (rows && rows->is_array() && rows->size() == 1 && (*rows)[0].is_array()) rows = &(*rows)[0];
  return rows && rows->is_array() ? rows : nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Question

Question make_question(std::string id, std::string text_value, std::string source) {
  std::vector<Issue> issues;
  if (text::trim(id).empty()) issues.push_back(issue(IssueCode::EmptyField, "id"));
  if (text::trim(text_value).empty()) issues.push_back(issue(IssueCode::EmptyField, "text"));
  throw_if_any(issues);
  return Question{std::move(id), std::move(text_value), std::move(source)};
}

Question question_from_json(const Json& raw) {
  if (!raw.is_object()) throw ValidationError(issue(IssueCode::WrongShape, "question"));
  std::vector<Issue> issues;
  auto id = read_text(raw, "id", issues);
  auto body = read_text(raw, "text", issues);
  throw_if_any(issues);
  return make_question(std::move(id), raw.at("text").get<std::string>(), raw.value("source", std::string("file")));
}

Json to_json(const Question& q) { return Json{{"id", q.id}, {"text", q.text}, {"source", q.source}}; }

// ---------------------------------------------------------------------------
// ClientProfile

ClientProfile validate_profile(const Json& raw) {
  if (!raw.is_object()) throw ValidationError(issue(IssueCode::WrongShape, "profile", "expected an object"));
  std::vector<Issue> issues;
  ClientProfile p;
  p.emotional_themes = read_text_list(raw, "emotional_themes", issues);
  p.key_psychological_issues = read_text_list(raw, "key_psychological_issues", issues);
  p.past_experiences = read_text_list(raw, "past_experiences", issues);
  p.patterns_and_behaviors = read_text_list(raw, "patterns_and_behaviors", issues);
  p.desired_outcome = read_text(raw, "desired_outcome", issues);
  p.contextual_factors = read_text_list(raw, "contextual_factors", issues);
  throw_if_any(issues);
  return p;
}

Json to_json(const ClientProfile& p) {
  return Json{
      {"emotional_themes", p.emotional_themes},
      {"key_psychological_issues", p.key_psychological_issues},
      {"past_experiences", p.past_experiences},
      {"patterns_and_behaviors", p.patterns_and_behaviors},
      {"desired_outcome", p.desired_outcome},
      {"contextual_factors", p.contextual_factors},
  };
}

// ---------------------------------------------------------------------------
// ComplexityTraits

ComplexityTraits validate_complexity(const Json& raw) {
  if (!raw.is_object()) throw ValidationError(issue(IssueCode::WrongShape, "selected_characteristics"));
  auto it = raw.find("selected_characteristics");
  if (it == raw.end()) throw ValidationError(issue(IssueCode::MissingField, "selected_characteristics"));
  if (!it->is_array()) throw ValidationError(issue(IssueCode::WrongShape, "selected_characteristics"));

  std::vector<Issue> issues;
  ComplexityTraits traits{true, {}};
  std::set<int> seen;
  for (const auto& entry : *it) {
    std::optional<int> number;
    std::string shown;
    if (entry.is_number_integer()) {
      int n = entry.get<int>();
      shown = std::to_string(n);
      if (n >= 1 && n <= static_cast<int>(kComplexityCharacteristicCount)) number = n;
    } else if (entry.is_string()) {
      shown = entry.get<std::string>();
      number = find_characteristic(shown);
    } else {
      shown = entry.dump();
    }
    if (!number) {
      issues.push_back(issue(IssueCode::UnknownCharacteristic, shown));
      continue;
    }
    if (!seen.insert(*number).second) {
      issues.push_back(issue(IssueCode::DuplicateCharacteristic, std::to_string(*number)));
      continue;
    }
    traits.selected.push_back(*number);
  }
  if (it->empty() || it->size() > kMaxCharacteristics) {
    issues.push_back(issue(IssueCode::CharacteristicCount, "selected_characteristics",
                           "select between 1 and " + std::to_string(kMaxCharacteristics) + ", got " +
                               std::to_string(it->size())));
  }
  throw_if_any(issues);
  return traits;
}

ComplexityTraits complexity_from_json(const Json& raw) {
  if (!raw.is_object() || !raw.contains("applied") || !raw["applied"].is_boolean())
    throw ValidationError(issue(IssueCode::MissingField, "applied"));
  if (!raw["applied"].get<bool>()) {
    auto sel = raw.find("selected_characteristics");
    if (sel != raw.end() && !sel->empty())
      throw ValidationError(issue(IssueCode::CharacteristicCount, "selected_characteristics",
                                  "unapplied traits must select nothing"));
    return ComplexityTraits{};
  }
  return validate_complexity(raw);
}

Json to_json(const ComplexityTraits& traits) {
  Json selected = Json::array();
  for (int n : traits.selected) selected.push_back(std::to_string(n));
  return Json{{"applied", traits.applied}, {"selected_characteristics", selected}};
}

std::string describe(const ComplexityTraits& traits) {
  if (!traits.applied || traits.selected.empty()) return "None";
  std::string out;
  for (int n : traits.selected) {
    const auto& c = kComplexityCharacteristics[static_cast<std::size_t>(n - 1)];
    if (!out.empty()) out += "\n";
    out += "- " + std::string(kComplexityCategories[c.category]) + ": " + std::string(c.text);
  }
  return out;
}

// ---------------------------------------------------------------------------
// StagePlan

StagePlan validate_stage_plan(const Json& raw, const StageOptionCatalog& catalog) {
  if (!raw.is_object()) throw ValidationError(issue(IssueCode::WrongShape, "stage_plan", "expected an object"));
  std::vector<Issue> issues;
  StagePlan plan;
  for (int stage = 1; stage <= static_cast<int>(kStageCount); ++stage) {
    const auto key = stage_key(stage);
    auto it = raw.find(key);
    if (it == raw.end()) {
      issues.push_back(stage_issue(IssueCode::MissingStageKey, stage, key));
      continue;
    }
    if (!it->is_array()) {
      issues.push_back(stage_issue(IssueCode::WrongShape, stage, key));
      continue;
    }
    if (it->empty()) {
      issues.push_back(stage_issue(IssueCode::EmptyStage, stage, key));
      continue;
    }
    auto& refs = plan.stages[static_cast<std::size_t>(stage - 1)];
    for (const auto& entry : *it) {
      if (!entry.is_string()) {
        issues.push_back(stage_issue(IssueCode::UnknownOption, stage, entry.dump()));
        continue;
      }
      auto ref = catalog.find(stage, entry.get<std::string>());
      if (!ref) {
        issues.push_back(stage_issue(IssueCode::UnknownOption, stage, entry.get<std::string>()));
        continue;
      }
      if (std::find(refs.begin(), refs.end(), *ref) == refs.end()) refs.push_back(*ref);
    }
  }
  throw_if_any(issues);
  return plan;
}

std::vector<std::string> option_texts(const StagePlan& plan, int stage) {
  std::vector<std::string> out;
  for (const auto& ref : plan.stage(stage)) out.emplace_back(StageOptionCatalog::standard().text(ref));
  return out;
}

Json to_json(const StagePlan& plan) {
  Json out = Json::object();
  for (int stage = 1; stage <= static_cast<int>(kStageCount); ++stage) out[stage_key(stage)] = option_texts(plan, stage);
  return out;
}

// ---------------------------------------------------------------------------
// Storyline

std::array<double, kStageCount> storyline_shares(const Storyline& s) {
  std::array<double, kStageCount> shares{};
  std::size_t total = 0;
  std::array<std::size_t, kStageCount> lengths{};
  for (std::size_t i = 0; i < kStageCount; ++i) {
    lengths[i] = text::utf8_length(s.stages[i]);
    total += lengths[i];
  }
  if (total == 0) return shares;
  for (std::size_t i = 0; i < kStageCount; ++i) shares[i] = static_cast<double>(lengths[i]) / static_cast<double>(total);
  return shares;
}

Storyline validate_storyline(const Json& raw, std::string language) {
  if (!raw.is_object()) throw ValidationError(issue(IssueCode::WrongShape, "storyline", "expected an object"));
  std::vector<Issue> issues;
  Storyline s;
  s.language = std::move(language);
  for (int stage = 1; stage <= static_cast<int>(kStageCount); ++stage) {
    s.stages[static_cast<std::size_t>(stage - 1)] = read_text(raw, stage_key(stage), issues);
  }
  throw_if_any(issues);

  // Small epsilon so a share sitting exactly on the tolerance edge is accepted.
  constexpr double kEps = 1e-9;
  const auto shares = storyline_shares(s);
  std::array<std::size_t, kStageCount> lengths{};
  for (std::size_t i = 0; i < kStageCount; ++i) lengths[i] = text::utf8_length(s.stages[i]);
  for (std::size_t i = 0; i < kStageCount; ++i) {
    const int stage = static_cast<int>(i) + 1;
    bool bad = std::fabs(shares[i] - kStorylineTargetShares[i]) > kStorylineShareTolerance + kEps;
    if (i == 0 || i == kStageCount - 1) {
      for (std::size_t mid = 1; mid + 1 < kStageCount; ++mid) bad = bad || lengths[i] >= lengths[mid];
    }
    if (bad) {
      Issue v = stage_issue(IssueCode::ProportionViolation, stage, stage_key(stage));
      v.detail = "share " + std::to_string(static_cast<int>(std::lround(shares[i] * 100))) + "% vs target " +
                 std::to_string(static_cast<int>(std::lround(kStorylineTargetShares[i] * 100))) + "%";
      issues.push_back(std::move(v));
    }
  }
  throw_if_any(issues);
  return s;
}

Json to_json(const Storyline& s) {
  Json out = Json::object();
  for (int stage = 1; stage <= static_cast<int>(kStageCount); ++stage)
    out[stage_key(stage)] = s.stages[static_cast<std::size_t>(stage - 1)];
  return out;
}

// ---------------------------------------------------------------------------
// Transcript

std::string_view to_string(Role role) { return role == Role::Therapist ? "therapist" : "client"; }

std::string_view to_string(TranscriptMode mode) {
  switch (mode) {
    case TranscriptMode::Script: return "script";
    case TranscriptMode::Hybrid: return "hybrid";
    case TranscriptMode::TwoAgent: return "two_agent";
    case TranscriptMode::Live: return "live";
  }
  return "script";
}

std::optional<TranscriptMode> parse_mode(std::string_view name) {
  auto n = text::normalize(name);
  if (n == "script") return TranscriptMode::Script;
  if (n == "hybrid") return TranscriptMode::Hybrid;
  if (n == "two_agent" || n == "two-agent") return TranscriptMode::TwoAgent;
  if (n == "live") return TranscriptMode::Live;
  return std::nullopt;
}

Transcript validate_transcript(const Json& raw, TranscriptMode mode, std::string case_id) {
  const Json* rows = unwrap_rows(raw);
  if (!rows) throw ValidationError(issue(IssueCode::WrongShape, "turns", "expected a list of turns"));
  if (rows->empty()) throw ValidationError(issue(IssueCode::EmptyTranscript));

  std::vector<Issue> issues;
  auto add_once = [&](Issue i) {
    for (const auto& existing : issues)
      if (existing.code == i.code) return;
    issues.push_back(std::move(i));
  };

  Transcript t;
  t.mode = mode;
  t.case_id = std::move(case_id);
  const bool stages_required = mode == TranscriptMode::Script || mode == TranscriptMode::Hybrid;

  for (std::size_t i = 0; i < rows->size(); ++i) {
    const auto& row = (*rows)[i];
    const int expected = static_cast<int>(i) + 1;
    if (!row.is_object()) {
      add_once(issue(IssueCode::WrongShape, "turn " + std::to_string(expected)));
      continue;
    }
    Turn turn;
    auto number = row.contains("turn") ? read_int(row["turn"]) : std::nullopt;
    if (!number || *number != expected) {
      add_once(issue(IssueCode::TurnGap, std::to_string(expected)));
    }
    turn.turn = expected;

    auto role = row.contains("role") && row["role"].is_string() ? text::normalize(row["role"].get<std::string>())
                                                                  : std::string{};
    if (role == "therapist" || role == "psychologist") {
      turn.role = Role::Therapist;
    } else if (role == "client") {
      turn.role = Role::Client;
    } else {
      add_once(issue(IssueCode::UnknownRole, std::to_string(expected)));
    }

    if (row.contains("stage") && !row["stage"].is_null()) {
      auto stage = read_int(row["stage"]);
      if (!stage || *stage < 1 || *stage > static_cast<int>(kStageCount)) {
        add_once(issue(IssueCode::StageOutOfRange, std::to_string(expected)));
      } else {
        turn.stage = *stage;
      }
    }

    if (!row.contains("content") || !row["content"].is_string() ||
        text::trim(row["content"].get_ref<const std::string&>()).empty()) {
      add_once(issue(IssueCode::EmptyContent, std::to_string(expected)));
    } else {
      turn.content = row["content"].get<std::string>();
    }
    t.turns.push_back(std::move(turn));
  }

  const int n = static_cast<int>(t.turns.size());
  for (int i = 1; i < n; ++i) {
    if (t.turns[i].role == t.turns[i - 1].role) {
      add_once(issue(IssueCode::NonAlternatingRoles, std::to_string(i + 1)));
      break;
    }
  }

  const auto tagged = std::count_if(t.turns.begin(), t.turns.end(), [](const Turn& x) { return x.stage.has_value(); });
  if (stages_required && tagged != n) {
    add_once(issue(IssueCode::MissingStage, "stage", "every turn needs a stage tag in this mode"));
  } else if (!stages_required && tagged != 0 && tagged != n) {
    add_once(issue(IssueCode::MissingStage, "stage", "stage tags must be on all turns or none"));
  }

  if (tagged > 0) {
    std::array<int, kStageCount> span{};
    int prev = 0;
    for (const auto& turn : t.turns) {
      if (!turn.stage) continue;
      if (*turn.stage < prev) {
        Issue r = stage_issue(IssueCode::StageRegression, *turn.stage);
        r.detail = "turn " + std::to_string(turn.turn) + " returns to stage " + std::to_string(*turn.stage);
        add_once(std::move(r));
      }
      prev = std::max(prev, *turn.stage);
      ++span[static_cast<std::size_t>(*turn.stage - 1)];
    }
    if (span[0] > kStage1TurnLimit) issues.push_back(stage_issue(IssueCode::StageTurnLimitExceeded, 1, "stage_1", kStage1TurnLimit));
    if (span[4] > kStage5TurnLimit) issues.push_back(stage_issue(IssueCode::StageTurnLimitExceeded, 5, "stage_5", kStage5TurnLimit));
    if (stages_required) {
      for (std::size_t s = 0; s < kStageCount; ++s) {
        if (span[s] == 0) {
          Issue m = stage_issue(IssueCode::MissingStage, static_cast<int>(s) + 1, stage_key(static_cast<int>(s) + 1));
          m.detail = "no turns tagged with this stage";
          issues.push_back(std::move(m));
        }
      }
    }
  }

  if (stages_required && n > kMaxScriptTurns) {
    issues.push_back(issue(IssueCode::TooManyTurns, "turns", std::to_string(n) + " > " + std::to_string(kMaxScriptTurns)));
  }
  if (mode == TranscriptMode::TwoAgent && n != kTwoAgentTurnCount) {
    issues.push_back(issue(IssueCode::WrongTurnCount, "turns",
                           "expected " + std::to_string(kTwoAgentTurnCount) + ", got " + std::to_string(n)));
  }
  throw_if_any(issues);
  return t;
}

Json turns_to_json(const Transcript& t) {
  Json turns = Json::array();
  for (const auto& turn : t.turns) {
    Json row = Json::object();
    row["turn"] = turn.turn;
    row["role"] = std::string(to_string(turn.role));
    if (turn.stage) row["stage"] = std::to_string(*turn.stage);
    row["content"] = turn.content;
    turns.push_back(std::move(row));
  }
  return turns;
}

Json to_json(const Transcript& t) {
  return Json{{"case_id", t.case_id}, {"mode", std::string(to_string(t.mode))}, {"turns", turns_to_json(t)}};
}

Transcript transcript_from_json(const Json& record) {
  if (!record.is_object()) throw ValidationError(issue(IssueCode::WrongShape, "transcript"));
  std::vector<Issue> issues;
  auto mode_name = read_text(record, "mode", issues);
  auto case_id = read_text(record, "case_id", issues);
  throw_if_any(issues);
  auto mode = parse_mode(mode_name);
  if (!mode) throw ValidationError(issue(IssueCode::WrongShape, "mode", "unknown mode " + mode_name));
  if (!record.contains("turns")) throw ValidationError(issue(IssueCode::MissingField, "turns"));
  return validate_transcript(record["turns"], *mode, case_id);
}

std::string render_dialogue(const Transcript& t) {
  std::string out;
  for (const auto& turn : t.turns) {
    if (!out.empty()) out += "\n";
    out += turn.role == Role::Therapist ? "Therapist: " : "Client: ";
    out += turn.content;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scores

bool is_valid_general_score(int score) { return score >= 1 && score <= 10; }
bool is_valid_blri_score(int score) { return score != 0 && score >= -3 && score <= 3; }

namespace {

std::string metric_key(std::string_view name) {
  std::string s(name);
  std::string replaced;
  for (char c : s) {
    if (c == '&') replaced += " and ";
    else if (c == '_' || c == '-') replaced += ' ';
    else replaced += c;
  }
  return text::normalize(replaced);
}

}  // namespace

GeneralScores validate_general_scores(const Json& raw) {
  const Json* rows = unwrap_rows(raw);
  if (!rows) throw ValidationError(issue(IssueCode::WrongShape, "metrics", "expected a list of metric rows"));
  std::vector<Issue> issues;
  GeneralScores scores;
  std::array<bool, kGeneralMetricCount> seen{};
  for (const auto& row : *rows) {
    if (!row.is_object() || !row.contains("metric") || !row["metric"].is_string()) {
      issues.push_back(issue(IssueCode::WrongShape, "metric", "rows need a metric name"));
      continue;
    }
    const auto name = row["metric"].get<std::string>();
    const auto key = metric_key(name);
    std::optional<std::size_t> index;
    for (std::size_t m = 0; m < kGeneralMetricCount; ++m)
      if (metric_key(kGeneralMetrics[m]) == key) index = m;
    if (!index) {
      issues.push_back(issue(IssueCode::UnknownMetricName, name));
      continue;
    }
    if (seen[*index]) {
      issues.push_back(issue(IssueCode::DuplicateMetric, std::string(kGeneralMetrics[*index])));
      continue;
    }
    seen[*index] = true;
    for (int d = 1; d <= 2; ++d) {
      const std::string field = "dialogue_" + std::to_string(d) + "_score";
      auto value = row.contains(field) ? read_int(row[field]) : std::nullopt;
      if (!value) {
        issues.push_back(issue(IssueCode::NonIntegerScore, std::string(kGeneralMetrics[*index]), field));
        continue;
      }
      if (!is_valid_general_score(*value)) {
        issues.push_back(issue(IssueCode::OutOfRangeScore, std::string(kGeneralMetrics[*index]),
                               field + " = " + std::to_string(*value) + " (allowed 1..10)"));
        continue;
      }
      (d == 1 ? scores.dialogue_1 : scores.dialogue_2)[*index] = *value;
    }
  }
  for (std::size_t m = 0; m < kGeneralMetricCount; ++m)
    if (!seen[m]) issues.push_back(issue(IssueCode::MissingMetric, std::string(kGeneralMetrics[m])));
  throw_if_any(issues);
  return scores;
}

Json to_json(const GeneralScores& scores) {
  Json rows = Json::array();
  for (std::size_t m = 0; m < kGeneralMetricCount; ++m) {
    rows.push_back(Json{{"metric", std::string(kGeneralMetrics[m])},
                        {"dialogue_1_score", scores.dialogue_1[m]},
                        {"dialogue_2_score", scores.dialogue_2[m]}});
  }
  return rows;
}

BlriScores validate_blri_scores(const Json& raw) {
  const Json* rows = unwrap_rows(raw);
  if (!rows) throw ValidationError(issue(IssueCode::WrongShape, "items", "expected a list of item rows"));
  std::vector<Issue> issues;
  BlriScores scores;
  std::array<bool, kBlriItemCount> seen{};
  for (const auto& row : *rows) {
    auto number = row.is_object() && row.contains("question_number") ? read_int(row["question_number"]) : std::nullopt;
    if (!number) {
      issues.push_back(issue(IssueCode::WrongShape, "question_number", "rows need an item number"));
      continue;
    }
    if (*number < 1 || *number > static_cast<int>(kBlriItemCount)) {
      issues.push_back(issue(IssueCode::UnknownItem, std::to_string(*number)));
      continue;
    }
    const auto idx = static_cast<std::size_t>(*number - 1);
    if (seen[idx]) {
      issues.push_back(issue(IssueCode::DuplicateItem, std::to_string(*number)));
      continue;
    }
    seen[idx] = true;
    for (int d = 1; d <= 2; ++d) {
      const std::string field = "dialogue_" + std::to_string(d) + "_score";
      auto value = row.contains(field) ? read_int(row[field]) : std::nullopt;
      if (!value) {
        issues.push_back(issue(IssueCode::NonIntegerScore, std::to_string(*number), field));
        continue;
      }
      if (*value == 0) {
        issues.push_back(issue(IssueCode::IllegalZeroScore, std::to_string(*number), field));
        continue;
      }
      if (!is_valid_blri_score(*value)) {
        issues.push_back(issue(IssueCode::OutOfRangeScore, std::to_string(*number),
                               field + " = " + std::to_string(*value) + " (allowed -3..-1, +1..+3)"));
        continue;
      }
      (d == 1 ? scores.dialogue_1 : scores.dialogue_2)[idx] = *value;
    }
  }
  for (std::size_t i = 0; i < kBlriItemCount; ++i)
    if (!seen[i]) issues.push_back(issue(IssueCode::MissingItem, std::to_string(i + 1)));
  throw_if_any(issues);
  return scores;
}

Json to_json(const BlriScores& scores) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < kBlriItemCount; ++i) {
    rows.push_back(Json{{"question_number", static_cast<int>(i + 1)},
                        {"dialogue_1_score", scores.dialogue_1[i]},
                        {"dialogue_2_score", scores.dialogue_2[i]}});
  }
  return rows;
}

}  // namespace pctdialog
