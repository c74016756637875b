#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pctdialog/eval.hpp"
#include "pctdialog/text.hpp"

namespace pctdialog::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

// ---------------------------------------------------------------------------
// Configuration

void CliConfig::validate() const {
  if (!(complexity_ratio >= 0.0 && complexity_ratio <= 1.0)) throw ConfigError("complexity_ratio must be in [0, 1]");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (live_max_turns < 2) throw ConfigError("live_max_turns must be >= 2");
  if (template_dir && !fs::is_directory(*template_dir))
    throw ConfigError("template directory " + template_dir->string() + " does not exist");
  if (modes.empty()) throw ConfigError("no modes selected");
}

PipelineConfig CliConfig::pipeline_config() const {
  PipelineConfig p;
  p.seed = seed;
  p.complexity_ratio = complexity_ratio;
  p.workers = workers;
  p.modes = modes;
  p.synthesis.generation = generation.sampling;
  p.synthesis.roleplay = generation.sampling;
  p.synthesis.classification = SamplingSettings{generation.sampling.model, 0.0, 16};
  p.synthesis.language = language;
  return p;
}

std::vector<TranscriptMode> parse_modes(const std::string& list) {
  std::vector<TranscriptMode> modes;
  for (const auto& part : text::split(list, ',')) {
    const auto name = std::string(text::trim(part));
    if (name.empty()) continue;
    auto mode = parse_mode(name);
    if (!mode || *mode == TranscriptMode::Live) throw ConfigError("unknown mode '" + name + "'");
    if (std::find(modes.begin(), modes.end(), *mode) == modes.end()) modes.push_back(*mode);
  }
  if (modes.empty()) throw ConfigError("no modes selected");
  return modes;
}

namespace {

template <class T>
T get_value(const pt::ptree& section, const std::string& section_name, const std::string& key, T fallback) {
  auto node = section.get_child_optional(pt::ptree::path_type(key, '\0'));
  if (!node) return fallback;
  try {
    return node->get_value<T>();
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("[" + section_name + "] " + key + " has an invalid value '" + node->data() + "'");
  }
}

void check_keys(const pt::ptree& section, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : section)
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
}

const std::set<std::string> kEndpointKeys = {"base_url",        "api_key_env",          "model",
                                              "temperature",     "max_output_tokens",    "timeout_seconds",
                                              "max_retries",     "requests_per_minute"};

Endpoint read_endpoint(const pt::ptree& s, const std::string& name, Endpoint e) {
  check_keys(s, name, kEndpointKeys);
  e.backend.base_url = get_value(s, name, "base_url", e.backend.base_url);
  e.backend.api_key_env = get_value(s, name, "api_key_env", e.backend.api_key_env);
  e.backend.timeout = std::chrono::milliseconds(
      static_cast<std::int64_t>(1000.0 * get_value(s, name, "timeout_seconds", e.backend.timeout.count() / 1000.0)));
  e.backend.max_retries = get_value(s, name, "max_retries", e.backend.max_retries);
  e.backend.requests_per_minute = get_value(s, name, "requests_per_minute", e.backend.requests_per_minute);
  e.sampling.model = get_value(s, name, "model", e.sampling.model);
  e.sampling.temperature = get_value(s, name, "temperature", e.sampling.temperature);
  e.sampling.max_output_tokens = get_value(s, name, "max_output_tokens", e.sampling.max_output_tokens);
  try {
    e.backend.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("[" + name + "] " + ex.what());
  }
  if (e.sampling.temperature < 0) throw ConfigError("[" + name + "] temperature must be >= 0");
  return e;
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

CliConfig default_config() {
  CliConfig c;
  c.judge.sampling = SamplingSettings{"gpt-4o", 0.0, 4096};
  c.client.sampling = SamplingSettings{"gpt-4o-mini", 0.7, 1024};
  return c;
}

}  // namespace

CliConfig load_config(const fs::path& file) {
  pt::ptree tree;
  try {
    pt::read_ini(file.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  const auto base = fs::absolute(file).parent_path();
  CliConfig c = default_config();
  for (const auto& [name, section] : tree) {
    if (name == "run") {
      check_keys(section, name,
                 {"dir", "seed", "complexity_ratio", "workers", "modes", "language", "templates", "questions",
                  "swap_judging", "live_max_turns"});
      if (auto dir = get_value<std::string>(section, name, "dir", ""); !dir.empty()) c.run_dir = resolve(base, dir);
      if (auto t = get_value<std::string>(section, name, "templates", ""); !t.empty()) c.template_dir = resolve(base, t);
      if (auto q = get_value<std::string>(section, name, "questions", ""); !q.empty()) c.questions = resolve(base, q);
      c.seed = get_value(section, name, "seed", c.seed);
      c.complexity_ratio = get_value(section, name, "complexity_ratio", c.complexity_ratio);
      c.workers = get_value(section, name, "workers", c.workers);
      if (auto m = get_value<std::string>(section, name, "modes", ""); !m.empty()) c.modes = parse_modes(m);
      c.language = get_value(section, name, "language", c.language);
      c.swap_judging = get_value(section, name, "swap_judging", c.swap_judging);
      c.live_max_turns = get_value(section, name, "live_max_turns", c.live_max_turns);
    } else if (name == "generation") {
      c.generation = read_endpoint(section, name, c.generation);
    } else if (name == "judge") {
      c.judge = read_endpoint(section, name, c.judge);
    } else if (name == "client") {
      c.client = read_endpoint(section, name, c.client);
    } else if (text::starts_with_ci(name, "therapist.") && name.size() > 10) {
      c.therapists[name.substr(10)] = read_endpoint(section, name, c.generation);
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  return c;
}

std::vector<Question> read_questions(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read questions from " + file.string());
  const bool jsonl = file.extension() == ".jsonl" || file.extension() == ".json";
  std::vector<Question> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (text::trim(line).empty()) continue;
    char fallback_id[32];
    std::snprintf(fallback_id, sizeof fallback_id, "q%04zu", out.size() + 1);
    Question q;
    if (jsonl) {
      auto raw = Json::parse(line, nullptr, false);
      if (raw.is_discarded() || !raw.is_object())
        throw ConfigError(file.string() + " line " + std::to_string(number) + " is not a JSON object");
      if (!raw.contains("id")) raw["id"] = fallback_id;
      if (!raw.contains("source")) raw["source"] = file.filename().string();
      q = question_from_json(raw);
    } else {
      q = make_question(fallback_id, std::string(text::trim(line)), file.filename().string());
    }
    if (!seen.insert(q.id).second) throw ConfigError("duplicate question id " + q.id + " in " + file.string());
    out.push_back(std::move(q));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Options {
  std::string config;
  std::string mock;
  std::string run_dir;
  std::string templates;
  std::string questions;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string modes;
  std::vector<std::string> sources;
  bool no_swap = false;
  std::string from;
  bool json = false;
};

class Session {
 public:
  Session(CliConfig cfg, const std::string& mock_dir) : cfg_(std::move(cfg)) {
    if (!mock_dir.empty()) {
      if (!fs::is_directory(mock_dir)) throw ConfigError("mock directory " + mock_dir + " does not exist");
      mock_ = MockChatBackend::from_directory(mock_dir);
    }
    templates_ = cfg_.template_dir ? TemplateLibrary::load(*cfg_.template_dir) : TemplateLibrary::builtin();
  }

  RunStore& store() {
    if (!store_) {
      const auto p = cfg_.pipeline_config();
      store_ = RunStore::create_or_open(cfg_.run_dir, cfg_.run_dir.filename().string(), p.snapshot(), p.seed);
      log_ = std::make_shared<ProvenanceLog>(store_->provenance_path());
    }
    return *store_;
  }

  ChatGateway& gateway(const std::string& key, const Endpoint& endpoint) {
    store();
    auto it = gateways_.find(key);
    if (it != gateways_.end()) return *it->second;
    std::shared_ptr<ChatBackend> backend = mock_ ? std::shared_ptr<ChatBackend>(mock_) : std::make_shared<HttpChatBackend>();
    auto g = std::make_unique<ChatGateway>(backend, endpoint.backend, log_, Clock::system());
    return *gateways_.emplace(key, std::move(g)).first->second;
  }

  const CliConfig& config() const { return cfg_; }
  const TemplateLibrary& templates() const { return templates_; }

 private:
  CliConfig cfg_;
  std::shared_ptr<MockChatBackend> mock_;
  TemplateLibrary templates_;
  std::unique_ptr<RunStore> store_;
  std::shared_ptr<ProvenanceLog> log_;
  std::map<std::string, std::unique_ptr<ChatGateway>> gateways_;
};

void print_report(std::ostream& out, const StageReport& r) {
  out << to_string(r.stage) << ": " << r.pending << " pending, " << r.completed << " completed, " << r.quarantined
      << " quarantined\n";
}

int quarantine_status(RunStore& store, std::ostream& err) {
  const auto q = store.quarantine();
  if (q.empty()) return kExitOk;
  err << q.size() << " quarantined item(s):\n";
  for (const auto& r : q) err << "  " << r.case_id << " [" << r.stage << "] " << r.error << '\n';
  return kExitQuarantine;
}

std::vector<Question> questions_for(const Session& s, const Options& o) {
  if (!o.questions.empty()) return read_questions(o.questions);
  if (s.config().questions) return read_questions(*s.config().questions);
  throw ConfigError("no questions file: pass --questions or set [run] questions");
}

int cmd_ingest(Session& s, const Options& o, std::ostream& out, std::ostream& err) {
  const auto added = ingest(s.store(), questions_for(s, o));
  out << "ingest: " << added << " new question(s)\n";
  return quarantine_status(s.store(), err);
}

int cmd_stage(Session& s, PipelineStage stage, std::ostream& out, std::ostream& err) {
  Pipeline p(s.store(), s.gateway("generation", s.config().generation), s.templates(), s.config().pipeline_config());
  print_report(out, p.run_stage(stage));
  return quarantine_status(s.store(), err);
}

int cmd_run(Session& s, const Options& o, std::ostream& out, std::ostream& err) {
  const auto added = ingest(s.store(), questions_for(s, o));
  out << "ingest: " << added << " new question(s)\n";
  Pipeline p(s.store(), s.gateway("generation", s.config().generation), s.templates(), s.config().pipeline_config());
  for (const auto& r : p.run_all()) print_report(out, r);
  return quarantine_status(s.store(), err);
}

struct Source {
  std::string label;
  std::vector<Transcript> transcripts;
};

Source load_source(Session& s, const std::string& arg, bool& had_failures, std::ostream& err) {
  std::string label, target = arg;
  if (auto eq = arg.find('='); eq != std::string::npos) {
    label = arg.substr(0, eq);
    target = arg.substr(eq + 1);
  }
  Source src;
  auto& store = s.store();
  if (target.rfind("mode:", 0) == 0) {
    const auto name = target.substr(5);
    auto mode = parse_mode(name);
    if (!mode || *mode == TranscriptMode::Live) throw ConfigError("unknown mode in source '" + arg + "'");
    src.label = label.empty() ? std::string(to_string(*mode)) : label;
    const auto file = *mode == TranscriptMode::Script ? StageFile::Scripts : StageFile::Dialogues;
    for (const auto& r : store.read_records(file)) {
      auto t = transcript_from_json(r);
      if (t.mode == *mode) src.transcripts.push_back(std::move(t));
    }
  } else if (target.rfind("live:", 0) == 0) {
    const auto name = target.substr(5);
    auto it = s.config().therapists.find(name);
    if (it == s.config().therapists.end()) throw ConfigError("no [therapist." + name + "] section for '" + arg + "'");
    src.label = label.empty() ? name : label;
    auto& therapist = s.gateway("therapist." + name, it->second);
    auto& client = s.gateway("client", s.config().client);
    const auto stage = "live:" + name;
    for (const auto& c : load_cases(store)) {
      if (!c.profile) continue;
      const auto id = c.id() + ":live:" + name;
      if (!store.has_record(StageFile::Dialogues, id)) {
        LiveSessionConfig cfg;
        cfg.case_id = c.id();
        cfg.profile = *c.profile;
        cfg.max_turns = s.config().live_max_turns;
        cfg.therapist = it->second.sampling;
        cfg.client = s.config().client.sampling;
        try {
          auto t = live_session(cfg, therapist, client, s.templates());
          Json record{{"id", id}};
          const Json body = to_json(t);
          for (const auto& [k, v] : body.items()) record[k] = v;
          record["therapist"] = name;
          store.append_record(StageFile::Dialogues, record);
          store.clear_quarantine(c.id(), stage);
        } catch (const std::exception& e) {
          store.put_quarantine(QuarantineRecord{c.id(), stage, e.what(), {}});
          had_failures = true;
          err << "live session " << id << " failed: " << e.what() << '\n';
          continue;
        }
      }
    }
    for (const auto& r : store.read_records(StageFile::Dialogues)) {
      if (r.value("therapist", "") != name) continue;
      src.transcripts.push_back(transcript_from_json(r));
    }
  } else {
    std::ifstream in(target);
    if (!in) throw ConfigError("cannot read transcripts from " + target);
    src.label = label.empty() ? fs::path(target).stem().string() : label;
    std::string line;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      auto raw = Json::parse(line, nullptr, false);
      if (raw.is_discarded()) throw ConfigError(target + " contains a line that is not JSON");
      src.transcripts.push_back(transcript_from_json(raw));
    }
  }
  return src;
}

int print_reports(const std::vector<PairJudgement>& judged, bool json, std::ostream& out) {
  const auto reports = aggregate_by_labels(judged);
  if (json) {
    Json all = Json::array();
    for (const auto& r : reports) all.push_back(report_to_json(r));
    out << all.dump(2) << '\n';
    return kExitOk;
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i) out << '\n';
    out << render_table(reports[i]);
    out << "(" << reports[i].pair_count << " pairs, " << reports[i].identical_general_count
        << " with identical general scores)\n";
  }
  return kExitOk;
}

int cmd_evaluate(Session& s, const Options& o, std::ostream& out, std::ostream& err) {
  if (o.sources.size() != 2) throw ConfigError("evaluate takes exactly two sources");
  bool failures = false;
  const auto a = load_source(s, o.sources[0], failures, err);
  const auto b = load_source(s, o.sources[1], failures, err);
  if (a.label == b.label) throw ConfigError("both sources are labelled '" + a.label + "'");

  std::map<std::string, const Transcript*> second;
  for (const auto& t : b.transcripts) second.emplace(t.case_id, &t);
  auto& store = s.store();
  std::vector<DialoguePair> pairs;
  std::vector<std::string> eval_ids;
  std::size_t matched = 0;
  for (const auto& t : a.transcripts) {
    auto it = second.find(t.case_id);
    if (it == second.end()) continue;
    ++matched;
    const auto eval_id = t.case_id + "|" + a.label + "|" + b.label;
    if (store.has_record(StageFile::Evals, eval_id)) continue;
    pairs.push_back(DialoguePair{t.case_id, t, *it->second, a.label, b.label});
    eval_ids.push_back(eval_id);
  }
  if (matched == 0) throw ConfigError("no case has a transcript in both sources");

  Judge judge(s.gateway("judge", s.config().judge), s.templates(), s.config().judge.sampling);
  const auto outcomes = judge_pairs(judge, pairs, s.config().swap_judging, s.config().workers);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (outcomes[i].judgement) {
      auto record = outcomes[i].judgement->to_json();
      record["id"] = eval_ids[i];
      record["case_id"] = pairs[i].id;
      store.append_record(StageFile::Evals, record);
      store.clear_quarantine(pairs[i].id, "evaluate");
      continue;
    }
    failures = true;
    err << "evaluation of " << eval_ids[i] << " failed: " << outcomes[i].error << '\n';
    try {
      store.put_quarantine(QuarantineRecord{pairs[i].id, "evaluate", outcomes[i].error, outcomes[i].raw_outputs});
    } catch (const StoreError&) {
      // Transcripts from outside the run have no case to attach the entry to.
    }
  }

  std::vector<PairJudgement> judged;
  for (const auto& r : store.read_records(StageFile::Evals)) {
    auto j = pair_judgement_from_json(r);
    if (j.labels == std::array<std::string, 2>{a.label, b.label}) judged.push_back(std::move(j));
  }
  if (!judged.empty()) print_reports(judged, o.json, out);
  const int status = quarantine_status(store, err);
  return failures ? kExitQuarantine : status;
}

int cmd_report(const CliConfig& cfg, const Options& o, std::ostream& out) {
  fs::path file;
  if (!o.from.empty()) {
    file = o.from;
  } else {
    if (cfg.run_dir.empty()) throw ConfigError("report needs --from or a run directory");
    file = RunStore::open(cfg.run_dir)->path(StageFile::Evals);
  }
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read scores from " + file.string());
  std::vector<PairJudgement> judged;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    auto raw = Json::parse(line, nullptr, false);
    if (raw.is_discarded()) throw ConfigError(file.string() + " contains a line that is not JSON");
    judged.push_back(pair_judgement_from_json(raw));
  }
  return print_reports(judged, o.json, out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthesize and evaluate person-centred counselling dialogues", "pctdialog"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Options o;
  app.add_option("--config", o.config, "INI configuration file");
  app.add_option("--mock", o.mock, "Directory of scripted replies; replaces every model backend");
  app.add_option("--run-dir", o.run_dir, "Run directory (overrides [run] dir)");
  app.add_option("--templates", o.templates, "Directory of prompt template overrides");
  app.add_option("--seed", o.seed, "Seed for the complexity split");
  app.add_option("--workers", o.workers, "Cases processed concurrently")->check(CLI::PositiveNumber);
  app.add_option("--modes", o.modes, "Comma-separated: script,hybrid,two_agent");

  auto* ingest_cmd = app.add_subcommand("ingest", "Add questions to the run");
  auto* run_cmd = app.add_subcommand("run", "Ingest and run every stage the selected modes need");
  for (auto* c : {ingest_cmd, run_cmd}) c->add_option("--questions", o.questions, "Questions (.jsonl or .txt)");

  std::map<CLI::App*, PipelineStage> stage_cmds;
  const std::map<PipelineStage, std::string> help = {
      {PipelineStage::Filter, "Keep questions that suit a counselling dialogue"},
      {PipelineStage::Profile, "Build a client profile per question"},
      {PipelineStage::Complexity, "Pick complexity characteristics for a seeded share of cases"},
      {PipelineStage::Plan, "Choose per-stage client states"},
      {PipelineStage::Storyline, "Write the five-stage storyline"},
      {PipelineStage::Script, "Generate the scripted dialogue"},
      {PipelineStage::Hybrid, "Refine scripted dialogues turn by turn with two role-play agents"},
      {PipelineStage::TwoAgent, "Generate a 20-turn dialogue in one shot"},
  };
  for (auto stage : kAllPipelineStages)
    stage_cmds[app.add_subcommand(std::string(to_string(stage)), help.at(stage))] = stage;

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Judge two transcript sources pairwise by case");
  evaluate_cmd->add_option("sources", o.sources, "[LABEL=]mode:<m> | live:<therapist> | <file.jsonl>")
      ->required()
      ->expected(2);
  evaluate_cmd->add_flag("--no-swap", o.no_swap, "Judge once per pair instead of both orders");
  evaluate_cmd->add_flag("--json", o.json, "Print the report as JSON");
  auto* report_cmd = app.add_subcommand("report", "Summarize judged pairs per method");
  report_cmd->add_option("--from", o.from, "Scores file (defaults to the run's evals.jsonl)");
  report_cmd->add_flag("--json", o.json, "Print the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    CliConfig cfg = o.config.empty() ? default_config() : load_config(o.config);
    if (!o.run_dir.empty()) cfg.run_dir = o.run_dir;
    if (!o.templates.empty()) cfg.template_dir = fs::path(o.templates);
    if (o.seed) cfg.seed = *o.seed;
    if (o.workers) cfg.workers = *o.workers;
    if (!o.modes.empty()) cfg.modes = parse_modes(o.modes);
    if (o.no_swap) cfg.swap_judging = false;
    cfg.validate();

    if (report_cmd->parsed()) return cmd_report(cfg, o, out);
    if (cfg.run_dir.empty()) throw ConfigError("no run directory: pass --run-dir or set [run] dir");

    Session session(std::move(cfg), o.mock);
    if (ingest_cmd->parsed()) return cmd_ingest(session, o, out, err);
    if (run_cmd->parsed()) return cmd_run(session, o, out, err);
    if (evaluate_cmd->parsed()) return cmd_evaluate(session, o, out, err);
    for (const auto& [cmd, stage] : stage_cmds)
      if (cmd->parsed()) return cmd_stage(session, stage, out, err);
    throw ConfigError("no subcommand");
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  } catch (const MissingPriorStage& e) {
    err << e.what() << '\n';
    return kExitMissingPrior;
  } catch (const EmptyResults& e) {
    err << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace pctdialog::cli
