#include "pctdialog/catalog.hpp"

#include <charconv>

#include "pctdialog/text.hpp"

namespace pctdialog {

const StageOptionCatalog& StageOptionCatalog::standard() {
  static const StageOptionCatalog catalog;
  return catalog;
}

std::span<const std::string_view> StageOptionCatalog::options(int stage) const {
  switch (stage) {
    case 1: return kStage1Options;
    case 2: return kStage2Options;
    case 3: return kStage3Options;
    case 4: return kStage4Options;
    case 5: return kStage5Options;
    default: return {};
  }
}

std::string_view StageOptionCatalog::text(OptionRef ref) const {
  auto opts = options(ref.stage);
  return ref.index < opts.size() ? opts[ref.index] : std::string_view{};
}

std::optional<OptionRef> StageOptionCatalog::find(int stage, std::string_view wanted) const {
  const auto key = text::normalize(wanted);
  auto opts = options(stage);
  for (std::size_t i = 0; i < opts.size(); ++i) {
    if (text::normalize(opts[i]) == key) return OptionRef{stage, i};
  }
  return std::nullopt;
}

std::optional<int> find_characteristic(std::string_view reference) {
  auto ref = text::trim(reference);
  int number = 0;
  auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), number);
  if (ec == std::errc{} && ptr == ref.data() + ref.size()) {
    if (number >= 1 && number <= static_cast<int>(kComplexityCharacteristicCount)) return number;
    return std::nullopt;
  }
  // Accept the characteristic text, with or without its trailing period.
  auto key = text::normalize(ref);
  if (!key.empty() && key.back() == '.') key.pop_back();
  for (const auto& c : kComplexityCharacteristics) {
    auto candidate = text::normalize(c.text);
    if (!candidate.empty() && candidate.back() == '.') candidate.pop_back();
    if (candidate == key) return c.number;
  }
  return std::nullopt;
}

}  // namespace pctdialog
