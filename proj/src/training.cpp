#include "convtopic/training.hpp"

#include <chrono>
#include <cmath>

#include <json.hpp>

#include "convtopic/optim.hpp"
#include "convtopic/rng.hpp"

namespace convtopic {

std::string_view to_string(ActMode m) {
  switch (m) {
    case ActMode::kNone: return "none";
    case ActMode::kGold: return "gold";
    case ActMode::kPredicted: return "predicted";
  }
  return "?";
}

std::optional<ActMode> parse_act_mode(std::string_view s) {
  if (s == "none") return ActMode::kNone;
  if (s == "gold") return ActMode::kGold;
  if (s == "predicted") return ActMode::kPredicted;
  return std::nullopt;
}

std::vector<double> one_hot_act(std::optional<DialogAct> act) {
  std::vector<double> v(kNumDialogActs, 0.0);
  v[index_of(act.value_or(DialogAct::NotSet))] = 1.0;
  return v;
}

EncodedExample encode_example(const ClassificationExample& ex, const Vocabulary& vocab, ActMode acts,
                              const Classifier* act_model) {
  EncodedExample out;
  out.label = ex.label;
  out.space = ex.space;
  out.input.tokens = vocab.encode(ex.tokens);
  out.input.context_turns.reserve(ex.context_turns.size());
  for (const auto& t : ex.context_turns) out.input.context_turns.push_back(turn_token_ids(t, vocab));
  switch (acts) {
    case ActMode::kNone: break;
    case ActMode::kGold: out.input.act_feature = one_hot_act(ex.gold_act); break;
    case ActMode::kPredicted:
      if (act_model == nullptr) throw std::invalid_argument("predicted acts need an act model");
      out.input.act_feature = predict_dialog_act(*act_model, out.input);
      break;
  }
  return out;
}

std::vector<EncodedExample> encode_examples(const std::vector<ClassificationExample>& examples,
                                            const Vocabulary& vocab, ActMode acts,
                                            const Classifier* act_model) {
  std::vector<EncodedExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(encode_example(ex, vocab, acts, act_model));
  return out;
}

void TrainConfig::validate() const {
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("max epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience_ < 1) throw std::invalid_argument("patience must be >= 1");
}

bool EarlyStopping::observe(double score) {
  ++epoch_;
  if (best_epoch_ == 0 || score > best_score_) {
    best_epoch_ = epoch_;
    best_score_ = score;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

std::string TrainHistory::to_json() const {
  nlohmann::ordered_json j;
  j["train_loss"] = train_loss;
  j["dev_accuracy"] = dev_accuracy;
  j["selected_epoch"] = selected_epoch;
  j["wall_seconds"] = wall_seconds;
  return j.dump();
}

DivergenceError::DivergenceError(std::size_t epoch, std::size_t batch)
    : std::runtime_error("training diverged (non-finite loss) in epoch " + std::to_string(epoch) +
                         ", batch " + std::to_string(batch)),
      epoch(epoch),
      batch(batch) {}

namespace {

std::vector<Tensor> snapshot(Classifier& model) {
  std::vector<Tensor> values;
  for (Parameter* p : model.parameters()) values.push_back(p->value);
  return values;
}

void restore(Classifier& model, const std::vector<Tensor>& values) {
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

void check_space(const Classifier& model, const std::vector<EncodedExample>& examples) {
  for (const auto& ex : examples) {
    if (ex.space != model.config().labels || ex.label >= model.config().num_labels()) {
      throw std::invalid_argument("example label space does not match the model");
    }
  }
}

}  // namespace

TrainHistory train(Classifier& model, const std::vector<EncodedExample>& train_set,
                   const std::vector<EncodedExample>& dev_set, const TrainConfig& config,
                   const TrainHooks& hooks) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("empty training split");
  if (dev_set.empty() && !hooks.dev_scorer) throw std::invalid_argument("empty dev split");
  check_space(model, train_set);
  check_space(model, dev_set);

  const auto start = std::chrono::steady_clock::now();
  const AdamConfig adam{config.learning_rate};
  Rng rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<Parameter*> params = model.trainable_parameters();
  for (Parameter* p : model.parameters()) p->zero_grad();

  TrainHistory history;
  EarlyStopping stopper(config.patience);
  std::vector<Tensor> best = snapshot(model);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), b + config.batch_size);
      double batch_loss = 0.0;
      for (std::size_t i = b; i < end; ++i) {
        const auto& ex = train_set[order[i]];
        try {
          batch_loss += model.accumulate_gradients(ex.input, ex.label, rng);
        } catch (const std::domain_error&) {  // NaN logits reached the softmax
          throw DivergenceError(epoch, batch_index + 1);
        }
      }
      if (!std::isfinite(batch_loss)) throw DivergenceError(epoch, batch_index + 1);
      epoch_loss += batch_loss;
      const double scale = 1.0 / static_cast<double>(end - b);
      for (Parameter* p : params) {
        for (auto& g : p->grad.values()) g *= scale;
      }
      auto& table = model.embeddings().table;
      for (auto& g : table.grad.row(kPadId)) g = 0.0;
      for (Parameter* p : params) adam_step(*p, adam);
      if (!model.embeddings().trainable) table.zero_grad();
    }
    history.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));

    const double dev_acc =
        hooks.dev_scorer ? hooks.dev_scorer(model, epoch) : evaluate(model, dev_set).accuracy;
    history.dev_accuracy.push_back(dev_acc);
    if (stopper.observe(dev_acc)) best = snapshot(model);
    if (hooks.on_epoch) hooks.on_epoch(model, epoch, dev_acc);
    if (stopper.should_stop()) break;
  }
  restore(model, best);
  history.selected_epoch = stopper.best_epoch();
  history.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return history;
}

EvalReport evaluate(const Classifier& model, const std::vector<EncodedExample>& examples) {
  if (examples.empty()) throw std::invalid_argument("cannot evaluate on an empty example set");
  check_space(model, examples);
  EvalReport report;
  std::vector<std::size_t> gold;
  report.predictions.reserve(examples.size());
  gold.reserve(examples.size());
  for (const auto& ex : examples) {
    report.predictions.push_back(argmax(model.predict(ex.input)));
    gold.push_back(ex.label);
  }
  report.accuracy = accuracy(report.predictions, gold);
  report.per_class = per_class_accuracy(report.predictions, gold);
  return report;
}

}  // namespace convtopic
