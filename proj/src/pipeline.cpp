#include "convtopic/pipeline.hpp"

#include <deque>
#include <stdexcept>

namespace convtopic {

Pipeline::Pipeline(const Classifier& topic_model, const Vocabulary& vocab, const Classifier* act_model,
                   const Vocabulary* act_vocab, PipelineOptions options)
    : topic_model_(topic_model), vocab_(vocab), act_model_(act_model), options_(options) {
  if (topic_model_.config().labels != LabelSpace::kTopic) {
    throw std::invalid_argument("pipeline topic model must predict topics");
  }
  if (act_model_ != nullptr) {
    if (act_model_->config().labels != LabelSpace::kDialogAct) {
      throw std::invalid_argument("pipeline act model must predict dialog acts");
    }
    if (act_vocab == nullptr || act_vocab->hash() != vocab_.hash()) {
      throw std::invalid_argument("act model and topic model vocabularies differ (hash mismatch)");
    }
  }
  if (topic_model_.config().act_feature && options_.acts == ActMode::kNone) {
    throw std::invalid_argument("topic model expects an act feature; choose gold or predicted acts");
  }
  if (options_.acts == ActMode::kPredicted && act_model_ == nullptr) {
    throw std::invalid_argument("predicted acts need an act model");
  }
}

std::vector<UtterancePrediction> Pipeline::run(const Conversation& conv) const {
  std::vector<UtterancePrediction> out;
  std::deque<std::vector<int>> window;
  for (std::size_t t = 0; t < conv.turns.size(); ++t) {
    if (window.size() > options_.context_window) throw std::logic_error("context window overflow");
    const Turn& turn = conv.turns[t];
    for (const Utterance* u : {&turn.user, &turn.chatbot}) {
      if (options_.side == Side::kUser && u->speaker != Speaker::kUser) continue;
      if (options_.side == Side::kChatbot && u->speaker != Speaker::kChatbot) continue;
      UtterancePrediction pred;
      pred.conversation_id = conv.id;
      pred.turn_index = t;
      pred.speaker = u->speaker;
      pred.tokens = tokenize(u->text);
      if (pred.tokens.empty()) continue;

      ModelInput in;
      in.tokens = vocab_.encode(pred.tokens);
      in.context_turns.assign(window.begin(), window.end());
      pred.context_turns = in.context_turns.size();

      std::optional<std::vector<double>> act_dist;
      if (act_model_ != nullptr) {
        act_dist = predict_dialog_act(*act_model_, in);
        pred.act = static_cast<DialogAct>(argmax(*act_dist));
      }
      if (topic_model_.config().act_feature) {
        in.act_feature = options_.acts == ActMode::kGold ? one_hot_act(u->dialog_act) : act_dist;
      }
      pred.topic_probs = topic_model_.predict(in);
      pred.topic = static_cast<Topic>(argmax(pred.topic_probs));

      if (const auto* adan = dynamic_cast<const AdanModel*>(&topic_model_)) {
        std::size_t j = options_.keywords_j;
        if (options_.j_from_gold && !u->keyword_spans.empty()) j = u->keyword_spans.size();
        pred.keywords = extract_keywords(*adan, in, j);
      }
      out.push_back(std::move(pred));
    }
    window.push_back(turn_token_ids(turn, vocab_));
    if (window.size() > options_.context_window) window.pop_front();
  }
  return out;
}

}  // namespace convtopic
