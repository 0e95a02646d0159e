#pragma once

#include <cstddef>
#include <vector>

#include "convtopic/models.hpp"

namespace convtopic {

struct KeywordPrediction {
  std::size_t topic = 0;                  // argmax of the ADAN output
  std::vector<std::size_t> positions;     // selected token positions, best first
  std::vector<double> scores;             // attention weight of each selected position
};

/// Ranks the utterance's positions by the attention row of the predicted
/// topic (descending, ties to the lower position) and keeps the top
/// min(j, L). Throws std::invalid_argument when j == 0.
KeywordPrediction extract_keywords(const AdanModel& model, const ModelInput& in, std::size_t j);

struct KeywordScores {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  std::size_t hits = 0;
};

/// Token-level micro precision / recall. preds[u] and gold[u] describe the
/// same utterance. Throws std::invalid_argument on a length mismatch.
KeywordScores evaluate_keywords(const std::vector<std::vector<std::size_t>>& preds,
                                const std::vector<std::vector<std::size_t>>& gold);
KeywordScores evaluate_keywords(const std::vector<KeywordPrediction>& preds,
                                const std::vector<std::vector<std::size_t>>& gold);

}  // namespace convtopic
