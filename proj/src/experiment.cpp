#include "convtopic/experiment.hpp"

#include <stdexcept>

namespace convtopic {

std::size_t default_hidden(ModelFamily family) { return family == ModelFamily::kBiLstm ? 256 : 500; }

Vocabulary corpus_vocab(const std::vector<Conversation>& convs, int min_count) {
  std::vector<std::vector<std::string>> tokens;
  for (const auto& c : convs) {
    for (const auto& t : c.turns) {
      tokens.push_back(tokenize(t.user.text));
      tokens.push_back(tokenize(t.chatbot.text));
    }
  }
  return build_vocab(tokens, min_count);
}

ModelConfig make_model_config(const ExperimentSpec& spec, std::size_t vocab_size) {
  ModelConfig c;
  c.family = spec.family;
  c.labels = spec.task;
  c.vocab_size = vocab_size;
  c.embed_dim = spec.embed_dim;
  c.hidden = spec.hidden != 0 ? spec.hidden : default_hidden(spec.family);
  c.context = spec.train.context;
  c.act_feature = spec.train.acts != ActMode::kNone;
  c.dropout = spec.train.dropout;
  if (c.act_feature && spec.task == LabelSpace::kDialogAct) {
    throw std::invalid_argument("an act classifier cannot take dialog acts as input");
  }
  if (c.context == ContextMode::kSeq && c.family != ModelFamily::kBiLstm) {
    throw std::invalid_argument("sequential context is only defined for the BiLSTM");
  }
  return c;
}

std::vector<EncodedExample> encode_conversations(const std::vector<Conversation>& convs,
                                                 LabelSpace task, Side side, std::size_t window,
                                                 const Vocabulary& vocab, ActMode acts,
                                                 const Classifier* act_model) {
  return encode_examples(build_examples(convs, task, side, window), vocab, acts, act_model);
}

TrainedModel train_model(const CorpusSplits& splits, const ExperimentSpec& spec,
                         const Classifier* act_model, const Vocabulary* vocab,
                         const TrainHooks& hooks) {
  spec.train.validate();
  if (spec.train.acts == ActMode::kPredicted && act_model == nullptr) {
    throw std::invalid_argument("predicted acts need an act model");
  }
  TrainedModel out;
  out.vocab = vocab != nullptr ? *vocab : corpus_vocab(splits.train, spec.min_count);
  const ModelConfig config = make_model_config(spec, out.vocab.size());

  const std::size_t window = spec.train.context_window;
  const auto train_set = encode_conversations(splits.train, spec.task, spec.side, window, out.vocab,
                                              spec.train.acts, act_model);
  const auto dev_set = encode_conversations(splits.dev, spec.task, spec.side, window, out.vocab,
                                            spec.train.acts, act_model);
  if (train_set.empty() || dev_set.empty()) {
    throw std::invalid_argument("training and dev splits must contain labeled utterances");
  }

  EmbeddingSource source{spec.pretrained, spec.train.seed ^ 0x5eedULL, spec.embedding_scale};
  EmbeddingMatrix embeddings = init_embeddings(out.vocab, source, spec.embed_dim);
  // Pretrained vectors stay frozen for the BiLSTM; everything else fine-tunes.
  embeddings.trainable = !(spec.family == ModelFamily::kBiLstm && spec.pretrained);
  out.model = make_classifier(config, std::move(embeddings), spec.train.seed + 1);
  out.history = train(*out.model, train_set, dev_set, spec.train, hooks);

  out.metadata.split_seed = spec.split_seed;
  out.metadata.context_window = window;
  out.metadata.acts = spec.train.acts;
  out.metadata.side = spec.side;
  out.metadata.train = spec.train;
  return out;
}

ExperimentSpec act_model_spec(const ExperimentSpec& topic_spec) {
  ExperimentSpec s = topic_spec;
  s.task = LabelSpace::kDialogAct;
  s.family = ModelFamily::kDan;  // hidden carries over; 0 still means the DAN default
  s.train.context = ContextMode::kAvg;
  s.train.acts = ActMode::kNone;
  return s;
}

}  // namespace convtopic
