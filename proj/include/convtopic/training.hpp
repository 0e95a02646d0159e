#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "convtopic/corpus.hpp"
#include "convtopic/metrics.hpp"
#include "convtopic/models.hpp"
#include "convtopic/text.hpp"

namespace convtopic {

/// How the 14-way act feature is produced for topic models.
enum class ActMode { kNone, kGold, kPredicted };

std::string_view to_string(ActMode m);
std::optional<ActMode> parse_act_mode(std::string_view s);

struct EncodedExample {
  ModelInput input;
  std::size_t label = 0;
  LabelSpace space = LabelSpace::kTopic;
};

/// One-hot over the 14 acts; NotSet when the act is unknown.
std::vector<double> one_hot_act(std::optional<DialogAct> act);

/// Encodes tokens and context turns with `vocab`. With ActMode::kPredicted
/// the act feature is the output distribution of `act_model` (required).
EncodedExample encode_example(const ClassificationExample& ex, const Vocabulary& vocab, ActMode acts,
                              const Classifier* act_model = nullptr);
std::vector<EncodedExample> encode_examples(const std::vector<ClassificationExample>& examples,
                                            const Vocabulary& vocab, ActMode acts,
                                            const Classifier* act_model = nullptr);

struct TrainConfig {
  std::uint64_t seed = 0;
  double learning_rate = 0.001;
  double dropout = 0.5;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 2;
  std::size_t context_window = kDefaultContextWindow;
  ContextMode context = ContextMode::kNone;
  ActMode acts = ActMode::kNone;

  void validate() const;
};

/// Patience counter on a score that must strictly improve.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  /// Records the score of the next epoch; returns true when it is a new best.
  bool observe(double score);
  bool should_stop() const { return since_best_ >= patience_; }
  /// 1-based epoch of the best score so far (0 before any observation).
  std::size_t best_epoch() const { return best_epoch_; }
  double best_score() const { return best_score_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  double best_score_ = 0.0;
  std::size_t since_best_ = 0;
};

struct TrainHistory {
  std::vector<double> train_loss;    // mean per-example loss of each epoch
  std::vector<double> dev_accuracy;
  std::size_t selected_epoch = 0;    // 1-based
  double wall_seconds = 0.0;

  std::string to_json() const;
};

/// Loss became NaN/inf during training.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t epoch, std::size_t batch);
  std::size_t epoch;
  std::size_t batch;
};

struct TrainHooks {
  /// Overrides the dev-accuracy computation (epoch is 1-based).
  std::function<double(const Classifier&, std::size_t epoch)> dev_scorer;
  /// Called after each epoch's dev score is recorded.
  std::function<void(const Classifier&, std::size_t epoch, double dev_accuracy)> on_epoch;
};

/// Trains `model` in place: seeded shuffling, gradients averaged over each
/// batch then one ADAM step, dev accuracy after every epoch, stop once it has
/// not strictly improved for `patience` epochs, and finally restore the
/// parameters of the best dev epoch.
TrainHistory train(Classifier& model, const std::vector<EncodedExample>& train_set,
                   const std::vector<EncodedExample>& dev_set, const TrainConfig& config,
                   const TrainHooks& hooks = {});

struct EvalReport {
  double accuracy = 0.0;
  std::map<std::size_t, ClassAccuracy> per_class;
  std::vector<std::size_t> predictions;
};

/// Inference-mode evaluation. Throws std::invalid_argument on an empty set
/// or when an example's label space differs from the model's.
EvalReport evaluate(const Classifier& model, const std::vector<EncodedExample>& examples);

}  // namespace convtopic
