#pragma once

#include <string_view>

#include "pctdialog/domain.hpp"

namespace pctdialog {

enum class JsonShape { Object, Array };

/// Recovers the first JSON value of the expected top-level shape from raw model
/// output. Code fences are searched before the surrounding prose; leading and
/// trailing prose is ignored; trailing commas before `}` or `]` are repaired.
///
/// Throws ExtractionError:
///   NoJsonFound        - no bracket of either kind in the text
///   ShapeMismatch      - valid JSON found, but only of the other shape
///   UnbalancedBrackets - an opening bracket is never closed
///   InvalidJson        - balanced brackets that do not parse
Json extract_structured(std::string_view text, JsonShape expected);

/// Removes commas that directly precede a closing bracket, outside strings.
std::string strip_trailing_commas(std::string_view json_text);

}  // namespace pctdialog
