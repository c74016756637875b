#include <doctest.h>

#include <set>

#include "pctdialog/catalog.hpp"
#include "pctdialog/templates.hpp"
#include "pctdialog/text.hpp"

using namespace pctdialog;

TEST_CASE("catalog sizes") {
  CHECK(kTopics.size() == 16);
  CHECK(kComplexityCharacteristics.size() == 30);
  CHECK(kComplexityCategories.size() == 6);
  CHECK(kBlriItems.size() == 12);
  CHECK(kGeneralMetrics.size() == 6);
  const auto& cat = StageOptionCatalog::standard();
  for (int s = 1; s <= 5; ++s) CHECK(cat.options(s).size() == kStageOptionCounts[static_cast<std::size_t>(s - 1)]);
}

TEST_CASE("characteristics are numbered 1..30, five per category") {
  std::array<int, kComplexityCategoryCount> per_category{};
  for (std::size_t i = 0; i < kComplexityCharacteristics.size(); ++i) {
    CHECK(kComplexityCharacteristics[i].number == static_cast<int>(i + 1));
    ++per_category[kComplexityCharacteristics[i].category];
  }
  for (int n : per_category) CHECK(n == 5);
}

TEST_CASE("stage option lookup is exact after normalization") {
  const auto& cat = StageOptionCatalog::standard();
  auto hit = cat.find(1, "  anxiety   AND tension ");
  REQUIRE(hit);
  CHECK(cat.text(*hit) == "Anxiety and tension");
  CHECK_FALSE(cat.find(1, "anxiety"));                   // no prefix matching
  CHECK_FALSE(cat.find(1, "Achieving insight or finding a path"));  // option of another stage
  CHECK_FALSE(cat.find(6, "Anxiety and tension"));
}

TEST_CASE("characteristic lookup by number or text") {
  CHECK(find_characteristic("13") == 13);
  CHECK(find_characteristic("Statements revealing inner conflict or ambivalence") == 13);
  CHECK(find_characteristic("statements revealing inner conflict or ambivalence.") == 13);
  CHECK_FALSE(find_characteristic("31"));
  CHECK_FALSE(find_characteristic("0"));
  CHECK_FALSE(find_characteristic("inner conflict"));
}

TEST_CASE("every catalog entry appears verbatim in the shipped prompt that lists it") {
  const auto lib = TemplateLibrary::builtin();
  const auto& plan = lib.get(template_id::kStagePlan).body();
  const auto& complexity = lib.get(template_id::kComplexity).body();
  const auto& general = lib.get(template_id::kGeneralEval).body();
  const auto& blri = lib.get(template_id::kBlriEval).body();
  const auto& cat = StageOptionCatalog::standard();
  for (int s = 1; s <= 5; ++s)
    for (auto opt : cat.options(s)) CHECK_MESSAGE(plan.find(std::string(opt)) != std::string::npos, opt);
  for (const auto& c : kComplexityCharacteristics)
    CHECK_MESSAGE(complexity.find(std::string(c.text)) != std::string::npos, c.text);
  for (auto c : kComplexityCategories) CHECK_MESSAGE(complexity.find(std::string(c)) != std::string::npos, c);
  for (auto item : kBlriItems) CHECK_MESSAGE(blri.find(std::string(item)) != std::string::npos, item);
  for (auto m : kGeneralMetrics) CHECK_MESSAGE(general.find(std::string(m)) != std::string::npos, m);
}
