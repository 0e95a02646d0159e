#pragma once

// End-to-end training runs shared by the command-line tool, the acceptance
// suite and the Python bindings: vocabulary from the training split, encoded
// examples, model construction, training and the metadata needed to rebuild
// the same examples later.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "convtopic/corpus.hpp"
#include "convtopic/models.hpp"
#include "convtopic/serialize.hpp"
#include "convtopic/text.hpp"
#include "convtopic/training.hpp"

namespace convtopic {

struct ExperimentSpec {
  LabelSpace task = LabelSpace::kTopic;
  ModelFamily family = ModelFamily::kDan;
  std::size_t embed_dim = 300;
  std::size_t hidden = 0;  // 0 = family default (500 for DAN/ADAN, 256 for BiLSTM)
  Side side = Side::kBoth;
  std::uint64_t split_seed = 13;
  int min_count = 1;
  std::optional<std::filesystem::path> pretrained;
  double embedding_scale = 0.1;
  TrainConfig train;  // also carries context mode, act mode and window
};

std::size_t default_hidden(ModelFamily family);

/// Vocabulary over every utterance (user and chatbot) of `convs`.
Vocabulary corpus_vocab(const std::vector<Conversation>& convs, int min_count = 1);

ModelConfig make_model_config(const ExperimentSpec& spec, std::size_t vocab_size);

/// Examples of one split encoded for `vocab`. ActMode::kPredicted requires `act_model`.
std::vector<EncodedExample> encode_conversations(const std::vector<Conversation>& convs,
                                                 LabelSpace task, Side side, std::size_t window,
                                                 const Vocabulary& vocab, ActMode acts,
                                                 const Classifier* act_model = nullptr);

struct TrainedModel {
  std::unique_ptr<Classifier> model;
  Vocabulary vocab;
  TrainHistory history;
  ModelMetadata metadata;
};

/// Trains spec's model on splits.train with early stopping on splits.dev.
/// The vocabulary is built from splits.train unless `vocab` is supplied
/// (it must be, to share an act model's vocabulary). Throws
/// std::invalid_argument for inconsistent settings or empty splits.
TrainedModel train_model(const CorpusSplits& splits, const ExperimentSpec& spec,
                         const Classifier* act_model = nullptr, const Vocabulary* vocab = nullptr,
                         const TrainHooks& hooks = {});

/// The act-model spec paired with a topic spec for predicted acts: a
/// contextual DAN over the act labels with the same dimensions and seed.
ExperimentSpec act_model_spec(const ExperimentSpec& topic_spec);

}  // namespace convtopic
