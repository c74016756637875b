#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pctdialog::text {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// Lowercases ASCII letters, trims, and collapses internal whitespace runs to one space.
std::string normalize(std::string_view s);

/// Number of Unicode code points in a UTF-8 string. Continuation bytes are not counted.
std::size_t utf8_length(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_ci(std::string_view s, std::string_view prefix);

}  // namespace pctdialog::text
