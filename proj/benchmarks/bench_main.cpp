#include <benchmark/benchmark.h>

#include <random>

#include "pctdialog/domain.hpp"
#include "pctdialog/eval.hpp"
#include "pctdialog/extract.hpp"

using namespace pctdialog;

namespace {

Json transcript_json(int per_middle_stage) {
  Json turns = Json::array();
  const int per_stage[] = {2, per_middle_stage, per_middle_stage, per_middle_stage, 4};
  int n = 0;
  for (int s = 0; s < 5; ++s)
    for (int i = 0; i < per_stage[s]; ++i) {
      ++n;
      turns.push_back(Json{{"turn", n},
                           {"role", n % 2 ? "therapist" : "client"},
                           {"stage", std::to_string(s + 1)},
                           {"content", "I hear how heavy this week has been for you, and I'm here to listen."}});
    }
  return turns;
}

void BM_ExtractFencedObject(benchmark::State& state) {
  const std::string text = "Here is the dialogue you asked for.\n```json\n" + transcript_json(4).dump(2) +
                           "\n```\nLet me know if anything should change.";
  for (auto _ : state) benchmark::DoNotOptimize(extract_structured(text, JsonShape::Array));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ExtractFencedObject);

void BM_ExtractWithTrailingCommas(benchmark::State& state) {
  std::string text = transcript_json(4).dump();
  for (std::size_t pos = 0; (pos = text.find('}', pos)) != std::string::npos; pos += 2) text.insert(pos, ",");
  for (auto _ : state) benchmark::DoNotOptimize(extract_structured(text, JsonShape::Array));
}
BENCHMARK(BM_ExtractWithTrailingCommas);

void BM_ValidateScript(benchmark::State& state) {
  const auto raw = transcript_json(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(validate_transcript(raw, TranscriptMode::Script));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * raw.size()));
}
BENCHMARK(BM_ValidateScript)->Arg(2)->Arg(6)->Arg(16);

void BM_Aggregate(benchmark::State& state) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> general(1, 10), blri(1, 3);
  std::vector<std::pair<GeneralScores, BlriScores>> rows(static_cast<std::size_t>(state.range(0)));
  for (auto& [g, b] : rows) {
    for (auto& v : g.dialogue_1) v = general(rng);
    for (auto& v : g.dialogue_2) v = general(rng);
    for (auto& v : b.dialogue_1) v = blri(rng);
    for (auto& v : b.dialogue_2) v = -blri(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(rows, {"Hybrid", "Script Mode"}));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows.size()));
}
BENCHMARK(BM_Aggregate)->Arg(20)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();
