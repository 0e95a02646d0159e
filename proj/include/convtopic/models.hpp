#pragma once

// Topic / dialog-act classifiers: DAN, ADAN (topic-word attention table) and
// BiLSTM, each optionally fed the averaged previous-turn context and a dialog
// act distribution. Backward passes are hand-derived and composed from the
// layers in layers.hpp.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "convtopic/corpus.hpp"
#include "convtopic/labels.hpp"
#include "convtopic/layers.hpp"
#include "convtopic/tensor.hpp"
#include "convtopic/text.hpp"

namespace convtopic {

class Rng;

/// Encoded classifier input: the target utterance plus the token ids of each
/// previous turn (user text followed by chatbot text), oldest first.
struct ModelInput {
  std::vector<int> tokens;
  std::vector<std::vector<int>> context_turns;
  std::optional<std::vector<double>> act_feature;  // distribution over the 14 acts
};

struct ContextFeature {
  std::vector<double> turn_context;  // D wide, zero when there is no history
  std::optional<std::vector<double>> act_feature;
};

std::vector<int> turn_token_ids(const Turn& turn, const Vocabulary& vocab);

/// Mean embedding of the given ids; zero vector for an empty list.
std::vector<double> mean_embedding(std::span<const int> ids, const EmbeddingMatrix& e);

/// Mean embedding over the user tokens followed by the chatbot tokens.
std::vector<double> build_turn_vector(const Turn& turn, const EmbeddingMatrix& e,
                                      const Vocabulary& vocab);

/// Mean of the turn vectors; zero vector when `turns` is empty. Throws
/// std::invalid_argument when more than max_turns turns are supplied.
ContextFeature build_context(const std::vector<std::vector<int>>& turns, const EmbeddingMatrix& e,
                             std::optional<std::vector<double>> act_feature,
                             std::size_t max_turns = kDefaultContextWindow);
ContextFeature build_context(const std::vector<Turn>& turns, const EmbeddingMatrix& e,
                             const Vocabulary& vocab, std::optional<std::vector<double>> act_feature,
                             std::size_t max_turns = kDefaultContextWindow);

enum class ModelFamily { kDan, kAdan, kBiLstm };
enum class ContextMode { kNone, kAvg, kSeq };

std::string_view to_string(ModelFamily f);
std::string_view to_string(ContextMode m);
std::optional<ModelFamily> parse_model_family(std::string_view s);
std::optional<ContextMode> parse_context_mode(std::string_view s);

struct ModelConfig {
  ModelFamily family = ModelFamily::kDan;
  LabelSpace labels = LabelSpace::kTopic;
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 300;
  std::size_t hidden = 500;  // 256 per direction is the BiLSTM default
  ContextMode context = ContextMode::kNone;
  bool act_feature = false;
  double dropout = 0.5;

  std::size_t num_labels() const { return label_count(labels); }
};

/// Common interface of the classifier families.
class Classifier {
 public:
  Classifier(ModelConfig config, EmbeddingMatrix embeddings);
  virtual ~Classifier() = default;
  Classifier(const Classifier&) = default;
  Classifier& operator=(const Classifier&) = default;

  const ModelConfig& config() const { return config_; }
  const EmbeddingMatrix& embeddings() const { return embeddings_; }
  EmbeddingMatrix& embeddings() { return embeddings_; }

  /// Probability vector over the label space. Dropout is applied only when
  /// `training` is set, drawing from `rng`.
  virtual std::vector<double> predict(const ModelInput& in, bool training, Rng& rng) const = 0;
  std::vector<double> predict(const ModelInput& in) const;

  /// Training-mode forward + backward of the cross-entropy loss. Gradients are
  /// added to the parameters; returns the loss.
  virtual double accumulate_gradients(const ModelInput& in, std::size_t label, Rng& rng) = 0;

  /// Every parameter in serialization order (embeddings first).
  virtual std::vector<Parameter*> parameters() = 0;
  std::vector<const Parameter*> parameters() const;
  /// Parameters updated by the optimizer (excludes frozen embeddings).
  std::vector<Parameter*> trainable_parameters();

  virtual std::unique_ptr<Classifier> clone() const = 0;

  /// Glorot-uniform weights, zero biases. Embeddings are left untouched.
  void init_weights(Rng& rng);

 protected:
  void check_input(const ModelInput& in) const;
  // Scatters d(turn context) onto the embeddings of every context token.
  void backprop_context(const ModelInput& in, std::span<const double> dctx);
  void add_embedding_grad(int id, double scale, std::span<const double> g);
  std::vector<double> context_vector(const ModelInput& in) const;

  ModelConfig config_;
  EmbeddingMatrix embeddings_;
};

class DanModel final : public Classifier {
 public:
  DanModel(ModelConfig config, EmbeddingMatrix embeddings);

  std::size_t input_width() const;
  std::vector<double> predict(const ModelInput& in, bool training, Rng& rng) const override;
  using Classifier::predict;
  double accumulate_gradients(const ModelInput& in, std::size_t label, Rng& rng) override;
  std::vector<Parameter*> parameters() override;
  std::unique_ptr<Classifier> clone() const override { return std::make_unique<DanModel>(*this); }

  Parameter w1, b1, w0, b0;

 private:
  struct Trace;
  std::vector<double> forward(const ModelInput& in, bool training, Rng& rng, Trace* trace) const;
};

struct AdanOutput {
  std::vector<double> probs;
  Tensor attention;  // K x L, row k = softmax of the table entries of the utterance tokens
};

class AdanModel final : public Classifier {
 public:
  AdanModel(ModelConfig config, EmbeddingMatrix embeddings);

  /// Width of one topic-specific sentence row s_k.
  std::size_t row_width() const;
  AdanOutput forward_with_attention(const ModelInput& in, bool training, Rng& rng) const;
  std::vector<double> predict(const ModelInput& in, bool training, Rng& rng) const override;
  using Classifier::predict;
  double accumulate_gradients(const ModelInput& in, std::size_t label, Rng& rng) override;
  std::vector<Parameter*> parameters() override;
  std::unique_ptr<Classifier> clone() const override { return std::make_unique<AdanModel>(*this); }

  Parameter attention;  // K x |V|
  Parameter w1, b1;     // H x row_width, H
  Parameter w0, b0;     // K x H, K: row k of w0 scores s_k

 private:
  struct Trace;
  AdanOutput forward(const ModelInput& in, bool training, Rng& rng, Trace* trace) const;
};

class BiLstmModel final : public Classifier {
 public:
  BiLstmModel(ModelConfig config, EmbeddingMatrix embeddings);

  std::size_t cell_input_width() const;
  std::size_t output_input_width() const;
  std::vector<double> predict(const ModelInput& in, bool training, Rng& rng) const override;
  using Classifier::predict;
  double accumulate_gradients(const ModelInput& in, std::size_t label, Rng& rng) override;
  std::vector<Parameter*> parameters() override;
  std::unique_ptr<Classifier> clone() const override { return std::make_unique<BiLstmModel>(*this); }

  LstmParams forward_cell;
  LstmParams backward_cell;
  Parameter w0, b0;

 private:
  struct Trace;
  std::vector<std::vector<double>> timestep_inputs(const ModelInput& in) const;
  std::vector<double> forward(const ModelInput& in, bool training, Rng& rng, Trace* trace) const;
};

/// Builds the model for config.family with freshly initialized weights
/// (seeded). The embedding table must match config.vocab_size x embed_dim.
std::unique_ptr<Classifier> make_classifier(const ModelConfig& config, EmbeddingMatrix embeddings,
                                            std::uint64_t seed);

/// Number of scalars the model for `config` holds, computed without
/// allocating (long double so corrupt headers cannot overflow it).
long double parameter_count(const ModelConfig& config);

/// dan_forward over the 14-way act space; the result is usable as act_feature.
std::vector<double> predict_dialog_act(const Classifier& act_model, const ModelInput& in);

std::size_t argmax(std::span<const double> v);

}  // namespace convtopic
