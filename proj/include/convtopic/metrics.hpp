#pragma once

// Classification accuracy, topical-conversation statistics, coherence /
// engagement scores, Pearson correlation and Cohen's kappa.

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "convtopic/corpus.hpp"
#include "convtopic/labels.hpp"

namespace convtopic {

/// A metric is undefined for the given input (constant series, p_e = 1, ...).
class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

double accuracy(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& gold);

struct ClassAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double rate() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

/// Keyed by gold label index; only labels that occur in `gold` appear.
std::map<std::size_t, ClassAccuracy> per_class_accuracy(const std::vector<std::size_t>& preds,
                                                        const std::vector<std::size_t>& gold);

struct TopicalOptions {
  bool include_other = true;  // count Other/Other turns as topic-specific
};

/// Entry t holds the shared topic when turn t is topic-specific, nullopt
/// otherwise. Throws std::invalid_argument when a turn lacks topic labels.
std::vector<std::optional<Topic>> topic_specific_turns(const Conversation& conv,
                                                       TopicalOptions options = {});

struct SubConversation {
  Topic topic = Topic::Other;
  std::size_t start = 0;
  std::size_t length = 0;

  bool operator==(const SubConversation&) const = default;
};

std::vector<SubConversation> sub_conversations(const Conversation& conv, TopicalOptions options = {});

struct TopicalDepth {
  std::size_t max = 0;    // longest sub-conversation
  std::size_t total = 0;  // number of topic-specific turns
  std::map<Topic, std::size_t> per_topic;
};

TopicalDepth topical_depth(const Conversation& conv, TopicalOptions options = {});

struct CoherenceEngagement {
  int coherence = 0;   // comprehensible + relevant
  int engagement = 0;  // interesting + continue
};

CoherenceEngagement coherence_engagement(const ResponseRatings& r);

/// Sample Pearson coefficient. Throws std::invalid_argument for mismatched or
/// too-short input and MetricError when either series is constant.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// (p_o - p_e) / (1 - p_e) with marginal-product chance agreement.
double cohens_kappa(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

enum class DepthStatistic { kTotal, kMax };

struct CorrelationRow {
  std::string name;
  double r = 0.0;
  double t_statistic = 0.0;  // r * sqrt((n - 2) / (1 - r^2)); stand-in for a p-value
  std::size_t n = 0;
};

struct DepthCorrelation {
  std::vector<double> depth;
  std::vector<double> coherence;
  std::vector<double> engagement;
  CorrelationRow coherence_row;
  CorrelationRow engagement_row;
};

/// Per conversation: the chosen depth statistic vs mean coherence and mean
/// engagement over rated chatbot responses (unrated responses and fully
/// unrated conversations are skipped). Throws std::invalid_argument when
/// fewer than two conversations remain.
DepthCorrelation correlate_depth(const std::vector<Conversation>& convs,
                                 DepthStatistic statistic = DepthStatistic::kTotal,
                                 TopicalOptions options = {});

/// Collected results, printable as structured text or an aligned table.
struct MetricReport {
  std::optional<std::size_t> n;
  std::optional<double> accuracy;
  std::vector<std::pair<std::string, ClassAccuracy>> per_class;
  std::optional<double> keyword_precision;
  std::optional<double> keyword_recall;
  std::optional<double> depth_mean_total;
  std::optional<double> depth_mean_max;
  std::vector<CorrelationRow> correlations;
  std::optional<double> kappa;

  std::string to_json() const;
  std::string to_table() const;
};

}  // namespace convtopic
