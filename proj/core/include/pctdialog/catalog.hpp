#pragma once

// Fixed catalogs used by the prompts and validators. Entries are transcribed
// verbatim from the prompt templates under core/templates/.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace pctdialog {

inline constexpr std::size_t kTopicCount = 16;
inline constexpr std::size_t kComplexityCategoryCount = 6;
inline constexpr std::size_t kCharacteristicsPerCategory = 5;
inline constexpr std::size_t kComplexityCharacteristicCount = 30;
inline constexpr std::size_t kStageCount = 5;
inline constexpr std::array<std::size_t, kStageCount> kStageOptionCounts = {6, 12, 12, 8, 12};
inline constexpr std::size_t kBlriItemCount = 12;
inline constexpr std::size_t kGeneralMetricCount = 6;

inline constexpr std::array<std::string_view, kTopicCount> kTopics = {
    "Anxiety Disorders",
    "Depression",
    "Post-Traumatic Stress Disorder (PTSD)",
    "Self-Esteem Issues",
    "Relationship Difficulties",
    "Grief and Loss",
    "Stress Management",
    "Life Transitions",
    "Personal Growth and Self-Actualization",
    "Eating Disorders",
    "Substance Abuse and Addiction",
    "Behavioral Issues in Children and Adolescents",
    "Identity and Self-Concept Issues",
    "Workplace Stress and Burnout",
    "Chronic Illness Adjustment",
    "Existential Concerns",
};

inline constexpr std::array<std::string_view, kComplexityCategoryCount> kComplexityCategories = {
    "Unclear Statements",
    "Indirect Statements",
    "Conflicting Statements",
    "Mixed Emotions",
    "Avoidant or Defensive Statements",
    "Context-Specific Ambiguities",
};

struct ComplexityCharacteristic {
  int number;            // 1..30
  std::size_t category;  // index into kComplexityCategories
  std::string_view text;
};

inline constexpr std::array<ComplexityCharacteristic, kComplexityCharacteristicCount> kComplexityCharacteristics = {{
    {1, 0, "Lack of specificity in emotions or concerns."},
    {2, 0, "Hesitation or uncertainty in language (e.g., \"I think,\" \"maybe\")."},
    {3, 0, "Tendency to avoid direct confrontation of deeper feelings."},
    {4, 0, "General or vague language (e.g., \"something feels wrong\")."},
    {5, 0, "Minimal elaboration or detail about the issue."},
    {6, 1, "Hinting at issues without explicitly naming them."},
    {7, 1, "Skirting around deeper topics or providing surface-level answers."},
    {8, 1, "Use of dismissive or minimizing language (e.g., \"It's not a big deal\")."},
    {9, 1, "Cultural or societal pressure to suppress emotions."},
    {10, 1, "Reluctance to express emotions due to fear of judgment."},
    {11, 2, "Emotional tension between opposing desires or perspectives."},
    {12, 2, "Oscillation between positive and negative emotions about the same issue."},
    {13, 2, "Statements revealing inner conflict or ambivalence."},
    {14, 2, "Expressions of being stuck or torn (e.g., \"I want to leave, but I can't\")."},
    {15, 2, "Inconsistent or contradictory language."},
    {16, 3, "Emotional layering or overlap (e.g., anger and sadness)."},
    {17, 3, "Expression of both positive and negative emotions simultaneously."},
    {18, 3, "Difficulty in resolving or prioritizing emotions."},
    {19, 3, "Contradictory feelings about the same event or situation."},
    {20, 3, "Complexity in emotional processing (e.g., relief mixed with guilt)."},
    {21, 4, "Deflection or shifting focus to avoid discussing uncomfortable topics."},
    {22, 4, "Use of sarcasm, humor, or denial to downplay issues."},
    {23, 4, "Defensive language (e.g., \"Why does it matter?\" or \"It's fine\")."},
    {24, 4, "Dismissive behavior toward their own emotions or concerns."},
    {25, 4, "Resistance to deeper emotional exploration."},
    {26, 5, "Tension between personal desires and societal/familial expectations."},
    {27, 5, "Ambiguity about the cause of distress (internal vs. external)."},
    {28, 5, "Fear of judgment, shame, or loss of reputation."},
    {29, 5, "Desire to meet cultural or family expectations at the expense of personal needs."},
    {30, 5, "Hesitation to express \"taboo\" feelings or emotions due to cultural stigma."},
}};

inline constexpr std::array<std::string_view, kStageCount> kStageTitles = {
    "Initial Meeting and Building Rapport",
    "Active and Empathetic Listening",
    "Encouraging Self-Exploration and Open Expression",
    "Supporting Growth and Change",
    "Reviewing and Closing the Session",
};

inline constexpr std::array<std::string_view, 6> kStage1Options = {
    "Comfort and calmness",
    "Anxiety and tension",
    "Trust and confidence",
    "Doubt or suspicion",
    "Wanting and readiness to talk about issues",
    "Resistance, secrecy, or silence",
};

inline constexpr std::array<std::string_view, 12> kStage2Options = {
    "Trust and confidence",
    "Doubt or suspicion",
    "Wanting and readiness to talk about issues",
    "Resistance, secrecy, or silence",
    "Deep and frank sharing",
    "Refusing to get into sensitive topics",
    "Freely expressing sadness, shame, anger, etc.",
    "Denial, trivializing, or running away from feelings",
    "Crying, expressing anger, feeling calm after venting",
    "Shame, embarrassment, fear of expressing emotion",
    "Client remembers relevant memories from before",
    "Client recalls memories with the help of psychologist's questions",
};

inline constexpr std::array<std::string_view, 12> kStage3Options = {
    "Deep and frank sharing",
    "Refusing to get into sensitive topics",
    "Freely expressing sadness, shame, anger, etc.",
    "Denial, trivializing, or running away from feelings",
    "Crying, expressing anger, feeling calm after venting",
    "Shame, embarrassment, fear of expressing emotion",
    "Feeling of hope or relief from new understanding",
    "Worry, fear, or denial about discovered truths",
    "Desire to explore feelings and thoughts",
    "Doubt, avoidance, or mental resistance in facing facts",
    "Client remembers relevant memories from before",
    "Client recalls memories with the help of psychologist's questions",
};

inline constexpr std::array<std::string_view, 8> kStage4Options = {
    "Feeling of hope or relief from new understanding",
    "Worry, fear, or denial about discovered truths",
    "Eagerness to change and improve",
    "Feeling of impasse, surrendering to problems",
    "Calm after processing emotions",
    "Remaining anger, sadness, or unresolved grief",
    "Feeling empowered to take action and change",
    "Helplessness or belief that change is impossible",
};

inline constexpr std::array<std::string_view, 12> kStage5Options = {
    "Feeling of hope or relief from new understanding",
    "Worry, fear, or denial about discovered truths",
    "Eagerness to change and improve",
    "Feeling of impasse, surrendering to problems",
    "Calm after processing emotions",
    "Remaining anger, sadness, or unresolved grief",
    "Feeling empowered to take action and change",
    "Helplessness or belief that change is impossible",
    "Achieving insight or finding a path",
    "Stuck in doubts or not making progress",
    "Desire to explore feelings and thoughts",
    "Doubt, avoidance, or mental resistance in facing facts",
};

inline constexpr std::array<std::string_view, kGeneralMetricCount> kGeneralMetrics = {
    "Coherence", "Engagement", "Fluency", "Diversity", "Humanness", "Collaboration and Balance",
};

inline constexpr std::array<std::string_view, kBlriItemCount> kBlriItems = {
    "The psychologist feels a true liking for the client.",
    "The psychologist nearly always understands exactly what the client means.",
    "The psychologist's feelings toward the client do not depend on whether the client's ideas or "
    "feelings are \"good\" or \"bad.\"",
    "The psychologist expresses their true impressions and feelings during the dialogue.",
    "The psychologist genuinely values the client as a person.",
    "The psychologist usually senses or realizes what the client is feeling.",
    "The psychologist does not vary in how worthwhile they perceive the client to be over time or "
    "based on circumstances.",
    "The psychologist is able to understand the client's meaning even when the client has difficulty "
    "expressing themselves.",
    "The psychologist is willing to express whatever is actually on their mind, including personal "
    "feelings about themselves or the client, when appropriate.",
    "The psychologist shows genuine interest in the client.",
    "The psychologist usually understands the whole of what the client means, including unspoken "
    "emotions or ideas.",
    "The psychologist demonstrates affection or care for the client in a way that feels authentic.",
};

/// Reference to one option of one stage's menu. `stage` is 1-based.
struct OptionRef {
  int stage = 0;
  std::size_t index = 0;
  friend bool operator==(const OptionRef&, const OptionRef&) = default;
};

/// Per-stage option menus with normalized lookup.
class StageOptionCatalog {
 public:
  static const StageOptionCatalog& standard();

  std::span<const std::string_view> options(int stage) const;
  std::string_view text(OptionRef ref) const;

  /// Case-insensitive, whitespace-normalized exact match. No fuzzy matching.
  std::optional<OptionRef> find(int stage, std::string_view text) const;

 private:
  StageOptionCatalog() = default;
};

/// Looks up a characteristic by number (1..30) or by its normalized text.
std::optional<int> find_characteristic(std::string_view reference);

}  // namespace pctdialog
