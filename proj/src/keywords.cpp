#include "convtopic/keywords.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "convtopic/rng.hpp"

namespace convtopic {

KeywordPrediction extract_keywords(const AdanModel& model, const ModelInput& in, std::size_t j) {
  if (j == 0) throw std::invalid_argument("j must be >= 1");
  Rng unused(0);
  AdanOutput out = model.forward_with_attention(in, false, unused);
  KeywordPrediction pred;
  pred.topic = argmax(out.probs);
  auto row = out.attention.row(pred.topic);

  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  order.resize(std::min(j, order.size()));
  pred.positions = order;
  for (std::size_t p : order) pred.scores.push_back(row[p]);
  return pred;
}

KeywordScores evaluate_keywords(const std::vector<std::vector<std::size_t>>& preds,
                                const std::vector<std::vector<std::size_t>>& gold) {
  if (preds.size() != gold.size()) {
    throw std::invalid_argument("keyword predictions and gold sets cover different utterances");
  }
  KeywordScores s;
  for (std::size_t u = 0; u < preds.size(); ++u) {
    const std::set<std::size_t> g(gold[u].begin(), gold[u].end());
    const std::set<std::size_t> p(preds[u].begin(), preds[u].end());
    s.predicted += p.size();
    s.gold += g.size();
    for (std::size_t x : p) s.hits += g.count(x);
  }
  s.precision = s.predicted ? static_cast<double>(s.hits) / static_cast<double>(s.predicted) : 0.0;
  s.recall = s.gold ? static_cast<double>(s.hits) / static_cast<double>(s.gold) : 0.0;
  return s;
}

KeywordScores evaluate_keywords(const std::vector<KeywordPrediction>& preds,
                                const std::vector<std::vector<std::size_t>>& gold) {
  std::vector<std::vector<std::size_t>> positions;
  positions.reserve(preds.size());
  for (const auto& p : preds) positions.push_back(p.positions);
  return evaluate_keywords(positions, gold);
}

}  // namespace convtopic
