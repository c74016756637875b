#include "pctdialog/pipeline.hpp"

#include <algorithm>
#include <map>
#include <thread>

#include "pctdialog/eval.hpp"

namespace pctdialog {

std::string_view to_string(PipelineStage stage) {
  switch (stage) {
    case PipelineStage::Filter: return "filter";
    case PipelineStage::Profile: return "profile";
    case PipelineStage::Complexity: return "complexify";
    case PipelineStage::Plan: return "plan";
    case PipelineStage::Storyline: return "storyline";
    case PipelineStage::Script: return "script";
    case PipelineStage::Hybrid: return "roleplay";
    case PipelineStage::TwoAgent: return "two-agent";
  }
  return "unknown";
}

std::optional<PipelineStage> parse_stage(std::string_view name) {
  for (auto s : kAllPipelineStages)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

Json PipelineConfig::snapshot() const {
  auto sampling = [](const SamplingSettings& s) {
    return Json{{"model", s.model}, {"temperature", s.temperature}, {"max_output_tokens", s.max_output_tokens}};
  };
  return Json{{"complexity_ratio", complexity_ratio},
              {"language", synthesis.language},
              {"generation", sampling(synthesis.generation)},
              {"classification", sampling(synthesis.classification)},
              {"roleplay", sampling(synthesis.roleplay)},
              {"max_attempts", synthesis.max_attempts},
              {"turn_retries", synthesis.turn_retries}};
}

std::size_t ingest(RunStore& store, const std::vector<Question>& questions) {
  std::size_t added = 0;
  for (const auto& q : questions) {
    if (store.has_record(StageFile::Questions, q.id)) continue;
    store.append_record(StageFile::Questions, to_json(q));
    ++added;
  }
  store.mark_stage_run("ingest");
  return added;
}

namespace {

std::string dialogue_id(const std::string& case_id, TranscriptMode mode) {
  return case_id + ":" + std::string(to_string(mode));
}

Json with_id(const std::string& id, const Json& body) {
  Json out{{"id", id}};
  for (const auto& [k, v] : body.items()) out[k] = v;
  return out;
}

}  // namespace

std::vector<ClientCase> load_cases(const RunStore& store) {
  std::vector<ClientCase> cases;
  std::map<std::string, std::size_t> index;
  for (const auto& r : store.read_records(StageFile::Questions)) {
    index[r.at("id").get<std::string>()] = cases.size();
    cases.push_back(ClientCase{question_from_json(r)});
  }
  auto each = [&](StageFile file, auto&& apply) {
    for (const auto& r : store.read_records(file)) {
      auto it = index.find(r.at("id").get<std::string>());
      if (it != index.end()) apply(cases[it->second], r);
    }
  };
  each(StageFile::Filtered, [](ClientCase& c, const Json& r) { c.relevant = r.at("relevant").get<bool>(); });
  each(StageFile::Profiles, [](ClientCase& c, const Json& r) { c.profile = validate_profile(r.at("profile")); });
  each(StageFile::Complexity, [](ClientCase& c, const Json& r) { c.traits = complexity_from_json(r); });
  each(StageFile::StagePlans, [](ClientCase& c, const Json& r) { c.plan = validate_stage_plan(r.at("stage_plan")); });
  each(StageFile::Storylines, [](ClientCase& c, const Json& r) {
    c.storyline = validate_storyline(r.at("storyline"), r.value("language", ""));
  });
  return cases;
}

Pipeline::Pipeline(RunStore& store, ChatGateway& gateway, const TemplateLibrary& templates, PipelineConfig config)
    : store_(store),
      gateway_(gateway),
      templates_(templates),
      config_(std::move(config)),
      synth_(gateway_, templates_, config_.synthesis) {
  if (config_.workers < 1) throw std::invalid_argument("workers must be >= 1");
}

namespace {

struct Outcome {
  std::optional<Json> record;
  std::optional<QuarantineRecord> failure;
};

const char* prior_of(PipelineStage stage) {
  switch (stage) {
    case PipelineStage::Filter: return "ingest";
    case PipelineStage::Profile: return "filter";
    case PipelineStage::Complexity: return "profile";
    case PipelineStage::Plan: return "complexify";
    case PipelineStage::Storyline: return "plan";
    case PipelineStage::Script: return "storyline";
    case PipelineStage::Hybrid: return "script";
    case PipelineStage::TwoAgent: return "complexify";
  }
  return "";
}

StageFile output_file(PipelineStage stage) {
  switch (stage) {
    case PipelineStage::Filter: return StageFile::Filtered;
    case PipelineStage::Profile: return StageFile::Profiles;
    case PipelineStage::Complexity: return StageFile::Complexity;
    case PipelineStage::Plan: return StageFile::StagePlans;
    case PipelineStage::Storyline: return StageFile::Storylines;
    case PipelineStage::Script: return StageFile::Scripts;
    case PipelineStage::Hybrid:
    case PipelineStage::TwoAgent: return StageFile::Dialogues;
  }
  return StageFile::Dialogues;
}

// Runs `work` on every case, `workers` at a time. Failures become quarantine
// entries instead of propagating, so one bad case never stops the batch.
template <class Work>
std::vector<Outcome> run_chunked(const std::vector<const ClientCase*>& cases, int workers, const std::string& stage,
                                 Work&& work) {
  std::vector<Outcome> outcomes(cases.size());
  auto guarded = [&](std::size_t i) {
    const auto& c = *cases[i];
    try {
      outcomes[i].record = work(c);
    } catch (const ValidationExhausted& e) {
      outcomes[i].failure = QuarantineRecord{c.id(), stage, e.what(), e.raw_outputs()};
    } catch (const RefinementFailed& e) {
      outcomes[i].failure = QuarantineRecord{c.id(), stage, e.what(), {turns_to_json(e.partial()).dump()}};
    } catch (const std::exception& e) {
      outcomes[i].failure = QuarantineRecord{c.id(), stage, e.what(), {}};
    }
  };
  const auto chunk = static_cast<std::size_t>(workers);
  for (std::size_t start = 0; start < cases.size(); start += chunk) {
    const auto end = std::min(cases.size(), start + chunk);
    if (end - start == 1) {
      guarded(start);
      continue;
    }
    std::vector<std::thread> threads;
    for (std::size_t i = start; i < end; ++i) threads.emplace_back(guarded, i);
    for (auto& t : threads) t.join();
  }
  return outcomes;
}

}  // namespace

StageReport Pipeline::run_stage(PipelineStage stage) {
  const std::string name(to_string(stage));
  if (!store_.stage_has_run(prior_of(stage))) throw MissingPriorStage(stage, prior_of(stage));

  const auto cases = load_cases(store_);
  const auto file = output_file(stage);
  const auto done = store_.completed_ids(file);
  const auto scripts = store_.completed_ids(StageFile::Scripts);

  std::map<std::string, Transcript> script_by_case;
  if (stage == PipelineStage::Hybrid) {
    for (const auto& r : store_.read_records(StageFile::Scripts)) {
      auto t = transcript_from_json(r);
      script_by_case.emplace(t.case_id, std::move(t));
    }
  }

  auto output_id = [&](const ClientCase& c) {
    if (stage == PipelineStage::Hybrid) return dialogue_id(c.id(), TranscriptMode::Hybrid);
    if (stage == PipelineStage::TwoAgent) return dialogue_id(c.id(), TranscriptMode::TwoAgent);
    return c.id();
  };
  auto ready = [&](const ClientCase& c) {
    switch (stage) {
      case PipelineStage::Filter: return true;
      case PipelineStage::Profile: return c.relevant.value_or(false);
      case PipelineStage::Complexity: return c.profile.has_value();
      case PipelineStage::Plan: return c.traits.has_value();
      case PipelineStage::Storyline: return c.plan.has_value();
      case PipelineStage::Script: return c.storyline.has_value();
      case PipelineStage::Hybrid: return scripts.count(c.id()) > 0;
      case PipelineStage::TwoAgent: return c.traits.has_value();
    }
    return false;
  };

  std::vector<const ClientCase*> pending;
  for (const auto& c : cases)
    if (ready(c) && !done.count(output_id(c))) pending.push_back(&c);

  // The split is a function of the whole profiled set, so it is stable no
  // matter which cases are still pending.
  std::map<std::string, bool> complex_flag;
  if (stage == PipelineStage::Complexity) {
    std::vector<std::string> profiled;
    for (const auto& c : cases)
      if (c.profile) profiled.push_back(c.id());
    const auto flags = complexity_flags(profiled.size(), config_.complexity_ratio, store_.manifest().seed);
    for (std::size_t i = 0; i < profiled.size(); ++i) complex_flag[profiled[i]] = flags[i];
  }

  auto work = [&](const ClientCase& c) -> Json {
    switch (stage) {
      case PipelineStage::Filter: return Json{{"id", c.id()}, {"relevant", synth_.filter_question(c.question)}};
      case PipelineStage::Profile: return Json{{"id", c.id()}, {"profile", to_json(synth_.build_profile(c.question))}};
      case PipelineStage::Complexity: {
        const auto traits = complex_flag.at(c.id()) ? synth_.select_complexity(c) : ComplexityTraits{};
        return with_id(c.id(), to_json(traits));
      }
      case PipelineStage::Plan: return Json{{"id", c.id()}, {"stage_plan", to_json(synth_.plan_stages(c))}};
      case PipelineStage::Storyline:
        return Json{{"id", c.id()},
                    {"language", config_.synthesis.language},
                    {"storyline", to_json(synth_.write_storyline(c))}};
      case PipelineStage::Script: return with_id(c.id(), to_json(synth_.script_dialogue(c)));
      case PipelineStage::Hybrid:
        return with_id(output_id(c), to_json(synth_.roleplay_refine(c, script_by_case.at(c.id()))));
      case PipelineStage::TwoAgent: return with_id(output_id(c), to_json(synth_.two_agent_dialogue(c)));
    }
    throw std::logic_error("unhandled stage");
  };

  StageReport report{stage, pending.size(), 0, 0};
  const auto outcomes = run_chunked(pending, config_.workers, name, work);
  // Appends happen here, in input order, so the files do not depend on thread timing.
  for (std::size_t i = 0; i < pending.size(); ++i) {
    if (outcomes[i].record) {
      store_.append_record(file, *outcomes[i].record);
      store_.clear_quarantine(pending[i]->id(), name);
      ++report.completed;
    } else {
      store_.put_quarantine(*outcomes[i].failure);
      ++report.quarantined;
    }
  }
  store_.mark_stage_run(name);
  return report;
}

std::vector<StageReport> Pipeline::run_all() {
  auto wants = [&](TranscriptMode m) {
    return std::find(config_.modes.begin(), config_.modes.end(), m) != config_.modes.end();
  };
  std::vector<PipelineStage> stages = {PipelineStage::Filter, PipelineStage::Profile, PipelineStage::Complexity};
  if (wants(TranscriptMode::Script) || wants(TranscriptMode::Hybrid)) {
    stages.insert(stages.end(), {PipelineStage::Plan, PipelineStage::Storyline, PipelineStage::Script});
  }
  if (wants(TranscriptMode::Hybrid)) stages.push_back(PipelineStage::Hybrid);
  if (wants(TranscriptMode::TwoAgent)) stages.push_back(PipelineStage::TwoAgent);

  std::vector<StageReport> reports;
  for (auto s : stages) reports.push_back(run_stage(s));
  return reports;
}

VerifyReport verify_run(const RunStore& store) {
  VerifyReport report;
  for (auto file : kAllStageFiles) {
    std::vector<Json> records;
    try {
      records = store.read_records(file);
    } catch (const std::exception& e) {
      report.problems.push_back(std::string(file_name(file)) + ": " + e.what());
      continue;
    }
    for (const auto& r : records) {
      ++report.records;
      const std::string id = r.is_object() && r.contains("id") && r["id"].is_string() ? r["id"].get<std::string>() : "?";
      try {
        switch (file) {
          case StageFile::Questions: question_from_json(r); break;
          case StageFile::Filtered:
            if (!r.contains("relevant") || !r["relevant"].is_boolean())
              throw ValidationError(Issue{IssueCode::MissingField, "relevant"});
            break;
          case StageFile::Profiles: validate_profile(r.at("profile")); break;
          case StageFile::Complexity: complexity_from_json(r); break;
          case StageFile::StagePlans: validate_stage_plan(r.at("stage_plan")); break;
          case StageFile::Storylines: validate_storyline(r.at("storyline"), r.value("language", "")); break;
          case StageFile::Scripts: {
            auto t = transcript_from_json(r);
            if (t.mode != TranscriptMode::Script || t.case_id != id)
              throw ValidationError(Issue{IssueCode::WrongShape, "mode", "script record must be a script of its case"});
            break;
          }
          case StageFile::Dialogues: {
            auto t = transcript_from_json(r);
            if (t.mode != TranscriptMode::Live && id != dialogue_id(t.case_id, t.mode))
              throw ValidationError(Issue{IssueCode::WrongShape, "id", "expected " + dialogue_id(t.case_id, t.mode)});
            break;
          }
          case StageFile::Evals: pair_judgement_from_json(r); break;
        }
      } catch (const std::exception& e) {
        report.problems.push_back(std::string(file_name(file)) + ":" + id + ": " + e.what());
      }
    }
  }
  return report;
}

}  // namespace pctdialog
