#include "convtopic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace convtopic {

double accuracy(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& gold) {
  if (preds.size() != gold.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (preds.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

std::map<std::size_t, ClassAccuracy> per_class_accuracy(const std::vector<std::size_t>& preds,
                                                        const std::vector<std::size_t>& gold) {
  if (preds.size() != gold.size()) throw std::invalid_argument("per_class_accuracy: length mismatch");
  std::map<std::size_t, ClassAccuracy> out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto& c = out[gold[i]];
    ++c.total;
    c.correct += preds[i] == gold[i];
  }
  return out;
}

std::vector<std::optional<Topic>> topic_specific_turns(const Conversation& conv,
                                                       TopicalOptions options) {
  std::vector<std::optional<Topic>> out;
  out.reserve(conv.turns.size());
  for (std::size_t t = 0; t < conv.turns.size(); ++t) {
    const auto& turn = conv.turns[t];
    if (!turn.user.topic || !turn.chatbot.topic) {
      throw std::invalid_argument("conversation " + conv.id + " turn " + std::to_string(t) +
                                  " is missing a topic label");
    }
    const bool same = *turn.user.topic == *turn.chatbot.topic;
    const bool counted = options.include_other || *turn.user.topic != Topic::Other;
    out.push_back(same && counted ? turn.user.topic : std::nullopt);
  }
  return out;
}

std::vector<SubConversation> sub_conversations(const Conversation& conv, TopicalOptions options) {
  const auto flags = topic_specific_turns(conv, options);
  std::vector<SubConversation> runs;
  for (std::size_t t = 0; t < flags.size(); ++t) {
    if (!flags[t]) continue;
    if (!runs.empty() && runs.back().topic == *flags[t] &&
        runs.back().start + runs.back().length == t) {
      ++runs.back().length;
    } else {
      runs.push_back({*flags[t], t, 1});
    }
  }
  return runs;
}

TopicalDepth topical_depth(const Conversation& conv, TopicalOptions options) {
  TopicalDepth d;
  for (const auto& run : sub_conversations(conv, options)) {
    d.max = std::max(d.max, run.length);
    d.total += run.length;
    d.per_topic[run.topic] += run.length;
  }
  return d;
}

CoherenceEngagement coherence_engagement(const ResponseRatings& r) {
  return {r.comprehensible + r.relevant, r.interesting + r.continue_conversation};
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw MetricError("pearson: correlation undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double cohens_kappa(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cohens_kappa: length mismatch");
  if (a.empty()) throw std::invalid_argument("cohens_kappa: empty input");
  const double n = static_cast<double>(a.size());
  std::map<std::size_t, double> ma, mb;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma[a[i]] += 1.0;
    mb[b[i]] += 1.0;
    agree += a[i] == b[i];
  }
  const double p_o = agree / n;
  double p_e = 0.0;
  for (const auto& [label, count] : ma) {
    if (auto it = mb.find(label); it != mb.end()) p_e += (count / n) * (it->second / n);
  }
  if (p_e >= 1.0) throw MetricError("cohens_kappa: undefined when chance agreement is 1");
  return (p_o - p_e) / (1.0 - p_e);
}

namespace {

CorrelationRow correlation_row(std::string name, const std::vector<double>& x,
                               const std::vector<double>& y) {
  CorrelationRow row;
  row.name = std::move(name);
  row.n = x.size();
  row.r = pearson(x, y);
  const double denom = 1.0 - row.r * row.r;
  row.t_statistic = denom > 0.0 ? row.r * std::sqrt(static_cast<double>(row.n - 2) / denom)
                                : std::copysign(INFINITY, row.r);
  return row;
}

}  // namespace

DepthCorrelation correlate_depth(const std::vector<Conversation>& convs, DepthStatistic statistic,
                                 TopicalOptions options) {
  DepthCorrelation out;
  for (const auto& conv : convs) {
    double coh = 0.0, eng = 0.0;
    std::size_t rated = 0;
    for (const auto& turn : conv.turns) {
      if (!turn.chatbot.ratings) continue;
      const auto ce = coherence_engagement(*turn.chatbot.ratings);
      coh += ce.coherence;
      eng += ce.engagement;
      ++rated;
    }
    if (rated == 0) continue;
    const TopicalDepth d = topical_depth(conv, options);
    out.depth.push_back(static_cast<double>(statistic == DepthStatistic::kTotal ? d.total : d.max));
    out.coherence.push_back(coh / static_cast<double>(rated));
    out.engagement.push_back(eng / static_cast<double>(rated));
  }
  if (out.depth.size() < 2) {
    throw std::invalid_argument("correlate_depth: need at least two rated conversations");
  }
  out.coherence_row = correlation_row("coherence", out.depth, out.coherence);
  out.engagement_row = correlation_row("engagement", out.depth, out.engagement);
  return out;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  if (n) j["n"] = *n;
  if (accuracy) j["accuracy"] = *accuracy;
  if (!per_class.empty()) {
    nlohmann::ordered_json pc = nlohmann::ordered_json::object();
    for (const auto& [name, c] : per_class) {
      pc[name] = {{"correct", c.correct}, {"total", c.total}, {"accuracy", c.rate()}};
    }
    j["per_class"] = std::move(pc);
  }
  if (keyword_precision) j["keyword_precision"] = *keyword_precision;
  if (keyword_recall) j["keyword_recall"] = *keyword_recall;
  if (depth_mean_total) j["depth_mean_total"] = *depth_mean_total;
  if (depth_mean_max) j["depth_mean_max"] = *depth_mean_max;
  if (!correlations.empty()) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : correlations) {
      rows.push_back({{"name", r.name}, {"r", r.r}, {"t", r.t_statistic}, {"n", r.n}});
    }
    j["correlations"] = std::move(rows);
  }
  if (kappa) j["kappa"] = *kappa;
  return j.dump();
}

std::string MetricReport::to_table() const {
  std::ostringstream out;
  char buf[160];
  auto line = [&](const std::string& name, double v) {
    std::snprintf(buf, sizeof buf, "%-28s %10.4f\n", name.c_str(), v);
    out << buf;
  };
  if (n) {
    std::snprintf(buf, sizeof buf, "%-28s %10zu\n", "n", *n);
    out << buf;
  }
  if (accuracy) line("accuracy", *accuracy);
  for (const auto& [name, c] : per_class) {
    std::snprintf(buf, sizeof buf, "  %-26s %10.4f  (%zu/%zu)\n", name.c_str(), c.rate(), c.correct,
                  c.total);
    out << buf;
  }
  if (keyword_precision) line("keyword_precision", *keyword_precision);
  if (keyword_recall) line("keyword_recall", *keyword_recall);
  if (depth_mean_total) line("depth_mean_total", *depth_mean_total);
  if (depth_mean_max) line("depth_mean_max", *depth_mean_max);
  for (const auto& r : correlations) {
    std::snprintf(buf, sizeof buf, "%-28s %10.4f  t=%.3f n=%zu\n", ("pearson_" + r.name).c_str(), r.r,
                  r.t_statistic, r.n);
    out << buf;
  }
  if (kappa) line("kappa", *kappa);
  return out.str();
}

}  // namespace convtopic
