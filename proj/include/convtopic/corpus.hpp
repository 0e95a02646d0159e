#pragma once

// Annotated-conversation data model, corpus file I/O, splitting, and the
// synthetic context-dependent corpus generator.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "convtopic/labels.hpp"

namespace convtopic {

/// Malformed corpus or config data. what() names the line (when known) and field.
class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::size_t line, const std::string& field, const std::string& message);
  explicit CorpusError(const std::string& message) : std::runtime_error(message) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_ = 0;
  std::string field_;
};

enum class Speaker { kUser, kChatbot };

struct ResponseRatings {
  int comprehensible = 0;
  int relevant = 0;
  int interesting = 0;
  int continue_conversation = 0;

  bool operator==(const ResponseRatings&) const = default;
};

struct KeywordSpan {
  std::size_t token_index = 0;
  Topic topic = Topic::Other;

  bool operator==(const KeywordSpan&) const = default;
};

struct Utterance {
  Speaker speaker = Speaker::kUser;
  std::string text;
  std::optional<Topic> topic;
  std::optional<DialogAct> dialog_act;
  std::vector<KeywordSpan> keyword_spans;
  std::optional<ResponseRatings> ratings;

  bool operator==(const Utterance&) const = default;
};

inline Utterance empty_utterance(Speaker speaker) {
  Utterance u;
  u.speaker = speaker;
  return u;
}

struct Turn {
  Utterance user = empty_utterance(Speaker::kUser);
  Utterance chatbot = empty_utterance(Speaker::kChatbot);

  bool operator==(const Turn&) const = default;
};

struct Conversation {
  std::string id;
  std::vector<Turn> turns;
  std::optional<double> user_rating;

  bool operator==(const Conversation&) const = default;
};

/// Parses one corpus record. `line` is used only for error messages.
Conversation parse_conversation(std::string_view json_line, std::size_t line = 0);
std::string serialize_conversation(const Conversation& conv);

/// Reads a line-delimited corpus file. Blank lines are skipped. Throws
/// CorpusError for I/O failures, schema violations and duplicate ids.
std::vector<Conversation> parse_corpus(const std::filesystem::path& path);
std::vector<Conversation> parse_corpus_text(std::string_view text);

std::string serialize_corpus(const std::vector<Conversation>& convs);
void write_corpus(const std::filesystem::path& path, const std::vector<Conversation>& convs);

// ---------------------------------------------------------------------------
// Splits

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct CorpusSplits {
  std::vector<Conversation> train;
  std::vector<Conversation> dev;
  std::vector<Conversation> test;
};

/// Conversation-level split. Each part keeps corpus order. Throws
/// std::invalid_argument for bad ratios or when a part would be empty.
CorpusSplits make_splits(const std::vector<Conversation>& convs, SplitRatios ratios,
                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Classification examples

enum class Side { kUser, kChatbot, kBoth };

std::string_view to_string(Side s);
std::optional<Side> parse_side(std::string_view s);

struct ClassificationExample {
  std::vector<std::string> tokens;
  std::size_t label = 0;
  LabelSpace space = LabelSpace::kTopic;
  std::vector<Turn> context_turns;  // strictly previous turns, most recent last
  std::optional<DialogAct> gold_act;
  std::vector<std::size_t> keyword_indices;  // annotated keyword token positions
  std::string conversation_id;
  std::size_t turn_index = 0;
  Speaker speaker = Speaker::kUser;
};

inline constexpr std::size_t kDefaultContextWindow = 5;

/// One example per labeled utterance on `side`. Unlabeled utterances are
/// skipped, as are NotSet dialog acts when target is the act space.
std::vector<ClassificationExample> build_examples(const Conversation& conv, LabelSpace target,
                                                  Side side, std::size_t context_window);

std::vector<ClassificationExample> build_examples(const std::vector<Conversation>& convs,
                                                  LabelSpace target, Side side,
                                                  std::size_t context_window);

/// Keeps each example labeled `label` with probability keep_ratio (seeded);
/// everything else passes through. Order is preserved.
std::vector<ClassificationExample> downsample_class(const std::vector<ClassificationExample>& examples,
                                                    std::size_t label, double keep_ratio,
                                                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t n_conversations = 100;
  std::size_t turns_per_conversation = 8;
  double anaphora_rate = 0.3;
  std::vector<std::pair<Topic, std::vector<std::string>>> lexicons;
  // User templates per act. Each contains the placeholder "{kw}" exactly once.
  std::vector<std::pair<DialogAct, std::vector<std::string>>> act_templates;
};

/// Built-in lexicons for the first `n_topics` topics (1..12) and the default
/// act templates.
SynthConfig default_synth_config(std::size_t n_topics = 8);

SynthConfig parse_synth_config(std::string_view json_text);
SynthConfig load_synth_config(const std::filesystem::path& path);
std::string serialize_synth_config(const SynthConfig& config);

/// Anaphoric filler utterances. "yes" inherits the act of the previous user
/// utterance; the others carry fixed acts. All inherit the previous topic.
inline constexpr std::array<std::string_view, 3> kAnaphoricFillers = {"yes", "tell me more",
                                                                      "what about that ?"};

bool is_anaphoric_filler(std::string_view text);

/// Deterministic given config.seed. Throws std::invalid_argument on a bad config.
std::vector<Conversation> generate_synthetic(const SynthConfig& config);

}  // namespace convtopic
