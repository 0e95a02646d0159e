#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "convtopic/corpus.hpp"
#include "convtopic/keywords.hpp"
#include "convtopic/models.hpp"
#include "convtopic/text.hpp"
#include "convtopic/training.hpp"

namespace convtopic {

struct PipelineOptions {
  std::size_t context_window = kDefaultContextWindow;
  ActMode acts = ActMode::kNone;  // how the topic model's act feature is produced
  std::size_t keywords_j = 1;     // keywords per utterance for ADAN topic models
  bool j_from_gold = false;       // use the annotated keyword count instead (when > 0)
  Side side = Side::kBoth;
};

struct UtterancePrediction {
  std::string conversation_id;
  std::size_t turn_index = 0;
  Speaker speaker = Speaker::kUser;
  std::vector<std::string> tokens;
  Topic topic = Topic::Other;
  std::vector<double> topic_probs;
  std::optional<DialogAct> act;
  std::optional<KeywordPrediction> keywords;
  std::size_t context_turns = 0;  // size of the rolling window used
};

/// Streams conversations through an optional act model and a topic model:
/// for each utterance the context is the rolling window of previous turns,
/// the act distribution (when used) feeds the topic model, and ADAN topic
/// models also report keywords.
class Pipeline {
 public:
  /// Throws std::invalid_argument when the vocabularies differ (by hash) or
  /// the configuration needs an act model that was not supplied.
  Pipeline(const Classifier& topic_model, const Vocabulary& vocab, const Classifier* act_model,
           const Vocabulary* act_vocab, PipelineOptions options);

  std::vector<UtterancePrediction> run(const Conversation& conv) const;

 private:
  const Classifier& topic_model_;
  const Vocabulary& vocab_;
  const Classifier* act_model_;
  PipelineOptions options_;
};

}  // namespace convtopic
