#include <doctest.h>

#include "pctdialog/extract.hpp"

using namespace pctdialog;

namespace {

ExtractionErrorKind kind_of(std::string_view text, JsonShape shape) {
  try {
    extract_structured(text, shape);
  } catch (const ExtractionError& e) {
    return e.kind();
  }
  FAIL("expected ExtractionError");
  return ExtractionErrorKind::NoJsonFound;
}

}  // namespace

TEST_CASE("bare and fenced JSON") {
  CHECK(extract_structured(R"({"a": 1})", JsonShape::Object)["a"] == 1);
  CHECK(extract_structured("Here you go:\n```json\n[1, 2]\n```\nHope this helps.", JsonShape::Array).size() == 2);
}

TEST_CASE("fenced block wins over prose braces") {
  auto j = extract_structured("Use {curly} braces carefully.\n```\n{\"ok\": true}\n```", JsonShape::Object);
  CHECK(j["ok"] == true);
}

TEST_CASE("brackets inside strings do not confuse matching") {
  auto j = extract_structured(R"(prefix {"text": "a } tricky ] string", "n": [1, {"x": "{"}]} suffix)", JsonShape::Object);
  CHECK(j["text"] == "a } tricky ] string");
  CHECK(j["n"][1]["x"] == "{");
}

TEST_CASE("escaped quotes inside strings") {
  auto j = extract_structured(R"({"q": "she said \"hi}\""})", JsonShape::Object);
  CHECK(j["q"] == "she said \"hi}\"");
}

TEST_CASE("trailing commas are repaired") {
  CHECK(extract_structured("[1, 2, 3,]", JsonShape::Array).size() == 3);
  CHECK(extract_structured("{\"a\": [1,], \"b\": 2,}", JsonShape::Object)["b"] == 2);
  CHECK(strip_trailing_commas(R"({"s": ",]", "a": 1,})") == R"({"s": ",]", "a": 1})");
}

TEST_CASE("the array inside an object is not taken when an array is wanted and the object is") {
  // An object is found first; asking for an array skips the whole object.
  CHECK(kind_of(R"({"rows": [1, 2]})", JsonShape::Array) == ExtractionErrorKind::ShapeMismatch);
  CHECK(extract_structured(R"({"rows": [1, 2]} then [3])", JsonShape::Array) == Json::array({3}));
}

TEST_CASE("error kinds") {
  CHECK(kind_of("no json here", JsonShape::Object) == ExtractionErrorKind::NoJsonFound);
  CHECK(kind_of("", JsonShape::Array) == ExtractionErrorKind::NoJsonFound);
  CHECK(kind_of("{\"a\": [1, 2", JsonShape::Object) == ExtractionErrorKind::UnbalancedBrackets);
  CHECK(kind_of("{\"a\": 1]", JsonShape::Object) == ExtractionErrorKind::UnbalancedBrackets);
  CHECK(kind_of("{not: json}", JsonShape::Object) == ExtractionErrorKind::InvalidJson);
  CHECK(kind_of("[1, 2]", JsonShape::Object) == ExtractionErrorKind::ShapeMismatch);
}

TEST_CASE("raw text is kept on failure") {
  try {
    extract_structured("oops", JsonShape::Object);
    FAIL("expected throw");
  } catch (const ExtractionError& e) {
    CHECK(e.raw_text() == "oops");
  }
}
