#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "convtopic/corpus.hpp"
#include "convtopic/experiment.hpp"
#include "convtopic/keywords.hpp"
#include "convtopic/metrics.hpp"
#include "convtopic/pipeline.hpp"
#include "convtopic/serialize.hpp"
#include "convtopic/training.hpp"

namespace convtopic::cli {
namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Flag combination that the grammar accepts but the command cannot run.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that cannot be used (missing files, incompatible models, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kTasks = {"topic", "act"};
const std::vector<std::string> kFamilies = {"dan", "adan", "bilstm"};
const std::vector<std::string> kContexts = {"none", "avg", "seq"};
const std::vector<std::string> kActModes = {"none", "gold", "predicted"};
const std::vector<std::string> kSplits = {"train", "dev", "test", "all"};
const std::vector<std::string> kSides = {"user", "chatbot", "both"};

struct Options {
  // shared
  std::string corpus;
  std::string corpus_b;
  std::string split = "test";
  std::string out;
  std::string model;  // family for `train`, model file elsewhere
  std::string act_model;
  std::string config;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 13;

  // train
  std::string task = "topic";
  std::string context = "none";
  std::string acts = "none";
  std::string side = "both";
  std::string pretrained;
  std::size_t embed_dim = 300;
  std::size_t hidden = 0;
  std::size_t epochs = 50;
  std::size_t patience = 2;
  std::size_t batch = 32;
  std::size_t window = kDefaultContextWindow;
  double lr = 0.001;
  double dropout = 0.5;
  int min_count = 1;

  // synth
  std::optional<std::size_t> conversations;
  std::optional<std::size_t> turns;
  std::optional<double> anaphora_rate;
  std::size_t topics = 8;
  bool seed_given = false;
  bool topics_given = false;

  // keywords / metrics
  std::size_t j = 1;
  bool j_from_gold = false;
  std::string statistic = "total";
  bool exclude_other = false;
};

void emit(std::ostream& out, const ordered_json& doc) { out << doc.dump() << '\n'; }

std::vector<Conversation> select_split(const std::vector<Conversation>& convs, const std::string& split,
                                       std::uint64_t seed) {
  if (split == "all") return convs;
  CorpusSplits s = make_splits(convs, {}, seed);
  if (split == "train") return s.train;
  if (split == "dev") return s.dev;
  return s.test;
}

std::vector<Conversation> read_corpus(const std::string& path) {
  if (path.empty()) throw UsageError("--corpus is required");
  return parse_corpus(path);
}

LoadedModel read_model(const std::string& path, std::optional<LabelSpace> expected = {}) {
  if (path.empty()) throw UsageError("--model (a model file) is required");
  return load_model(path, expected);
}

std::string default_act_model_path(const std::string& model_path) { return model_path + ".act"; }

/// Act model for a topic model that consumes predicted acts: --act-model, or
/// the companion file written next to the topic model by `train`.
std::optional<LoadedModel> act_model_for(const LoadedModel& topic, const std::string& model_path,
                                         const std::string& act_path, std::ostream& err) {
  if (topic.metadata.acts != ActMode::kPredicted) return std::nullopt;
  std::string path = act_path.empty() ? default_act_model_path(model_path) : act_path;
  if (!fs::exists(path)) {
    throw DataError("model uses predicted acts but no act model was found at '" + path +
                    "' (pass --act-model)");
  }
  err << "using act model " << path << '\n';
  LoadedModel act = load_model(path, LabelSpace::kDialogAct);
  if (act.vocab.hash() != topic.vocab.hash()) {
    throw DataError("act model and topic model vocabularies differ (hash mismatch)");
  }
  return act;
}

/// Act-model path a command will use, for the resolved-config line.
ordered_json resolved_act_path(const LoadedModel& topic, const Options& o) {
  if (!o.act_model.empty()) return o.act_model;
  if (topic.metadata.acts == ActMode::kPredicted) return default_act_model_path(o.model);
  return nullptr;
}

ordered_json model_summary(const LoadedModel& m) {
  const ModelConfig& c = m.model->config();
  return {{"family", to_string(c.family)},
          {"task", to_string(c.labels)},
          {"context", to_string(c.context)},
          {"acts", to_string(m.metadata.acts)},
          {"side", to_string(m.metadata.side)},
          {"embed_dim", c.embed_dim},
          {"hidden", c.hidden},
          {"vocab_size", c.vocab_size},
          {"split_seed", m.metadata.split_seed},
          {"context_window", m.metadata.context_window}};
}

// ---------------------------------------------------------------------------

int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw UsageError("--out is required");
  SynthConfig cfg = o.config.empty() ? default_synth_config(o.topics) : load_synth_config(o.config);
  if (!o.config.empty() && o.topics_given) throw UsageError("--topics cannot be combined with --config");
  if (o.seed_given || o.config.empty()) cfg.seed = o.seed;
  if (o.conversations) cfg.n_conversations = *o.conversations;
  if (o.turns) cfg.turns_per_conversation = *o.turns;
  if (o.anaphora_rate) cfg.anaphora_rate = *o.anaphora_rate;

  ordered_json resolved = ordered_json::parse(serialize_synth_config(cfg));
  emit(out, {{"command", "synth"}, {"config", {{"synth", resolved}, {"out", o.out}}}});

  std::vector<Conversation> convs;
  try {
    convs = generate_synthetic(cfg);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid synthetic config: ") + e.what());
  }
  write_corpus(o.out, convs);
  std::size_t users = 0, anaphoric = 0;
  for (const auto& c : convs) {
    for (const auto& t : c.turns) {
      ++users;
      anaphoric += is_anaphoric_filler(t.user.text);
    }
  }
  err << "wrote " << convs.size() << " conversations to " << o.out << '\n';
  emit(out, {{"report",
              {{"conversations", convs.size()}, {"user_utterances", users}, {"anaphoric", anaphoric}}}});
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw UsageError("--out is required");
  ExperimentSpec spec;
  spec.task = *parse_label_space(o.task);
  spec.family = *parse_model_family(o.model);
  spec.embed_dim = o.embed_dim;
  spec.hidden = o.hidden;
  spec.side = *parse_side(o.side);
  spec.split_seed = o.split_seed;
  spec.min_count = o.min_count;
  if (!o.pretrained.empty()) spec.pretrained = o.pretrained;
  spec.train.seed = o.seed;
  spec.train.learning_rate = o.lr;
  spec.train.dropout = o.dropout;
  spec.train.batch_size = o.batch;
  spec.train.max_epochs = o.epochs;
  spec.train.patience = o.patience;
  spec.train.context_window = o.window;
  spec.train.context = *parse_context_mode(o.context);
  spec.train.acts = *parse_act_mode(o.acts);
  try {
    spec.train.validate();
    make_model_config(spec, 2);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (o.embed_dim == 0) throw UsageError("--embed-dim must be > 0");
  if (spec.train.acts != ActMode::kPredicted && !o.act_model.empty()) {
    throw UsageError("--act-model is only used with --acts predicted");
  }

  const std::string act_out = default_act_model_path(o.out);
  emit(out, {{"command", "train"},
             {"config",
              {{"task", o.task}, {"model", o.model}, {"context", o.context}, {"acts", o.acts},
               {"side", o.side}, {"corpus", o.corpus}, {"out", o.out},
               {"act_model", spec.train.acts == ActMode::kPredicted
                                 ? ordered_json(o.act_model.empty() ? act_out : o.act_model)
                                 : ordered_json(nullptr)},
               {"seed", o.seed}, {"split_seed", o.split_seed}, {"embed_dim", o.embed_dim},
               {"hidden", o.hidden != 0 ? o.hidden : default_hidden(spec.family)},
               {"epochs", o.epochs}, {"patience", o.patience}, {"batch", o.batch},
               {"learning_rate", o.lr}, {"dropout", o.dropout}, {"window", o.window},
               {"min_count", o.min_count},
               {"pretrained", o.pretrained.empty() ? ordered_json(nullptr) : ordered_json(o.pretrained)}}}});

  const auto convs = read_corpus(o.corpus);
  CorpusSplits splits;
  try {
    splits = make_splits(convs, {}, o.split_seed);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }

  TrainHooks hooks;
  hooks.on_epoch = [&err](const Classifier&, std::size_t epoch, double dev) {
    err << "epoch " << epoch << " dev_accuracy " << dev << '\n';
  };

  std::optional<LoadedModel> loaded_act;
  std::unique_ptr<Classifier> trained_act;
  const Classifier* act_model = nullptr;
  std::optional<Vocabulary> shared_vocab;
  if (spec.train.acts == ActMode::kPredicted) {
    if (!o.act_model.empty()) {
      loaded_act = load_model(o.act_model, LabelSpace::kDialogAct);
      act_model = loaded_act->model.get();
      shared_vocab = loaded_act->vocab;
    } else {
      err << "training act model (contextual DAN) for predicted acts\n";
      TrainedModel act = train_model(splits, act_model_spec(spec), nullptr, nullptr, hooks);
      save_model(*act.model, act.vocab, act.metadata, act_out);
      err << "wrote act model to " << act_out << '\n';
      shared_vocab = act.vocab;
      trained_act = std::move(act.model);
      act_model = trained_act.get();
    }
  }

  TrainedModel result;
  try {
    result = train_model(splits, spec, act_model, shared_vocab ? &*shared_vocab : nullptr, hooks);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  save_model(*result.model, result.vocab, result.metadata, o.out);
  err << "wrote model to " << o.out << '\n';

  ordered_json report = ordered_json::parse(result.history.to_json());
  report["parameters"] = static_cast<double>(parameter_count(result.model->config()));
  report["vocab_size"] = result.vocab.size();
  emit(out, {{"report", report}});
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  LoadedModel m = read_model(o.model);
  emit(out, {{"command", "eval"},
             {"config", {{"model", o.model}, {"corpus", o.corpus}, {"split", o.split},
                         {"act_model", resolved_act_path(m, o)}, {"model_config", model_summary(m)}}}});
  auto act = act_model_for(m, o.model, o.act_model, err);
  const auto convs = select_split(read_corpus(o.corpus), o.split, m.metadata.split_seed);
  const ModelConfig& c = m.model->config();
  const auto examples = encode_conversations(convs, c.labels, m.metadata.side, m.metadata.context_window,
                                             m.vocab, m.metadata.acts, act ? act->model.get() : nullptr);
  if (examples.empty()) throw DataError("no labeled utterances in the selected split");
  EvalReport r = evaluate(*m.model, examples);

  MetricReport report;
  report.n = examples.size();
  report.accuracy = r.accuracy;
  for (const auto& [label, acc] : r.per_class) report.per_class.emplace_back(label_name(c.labels, label), acc);
  ordered_json doc = ordered_json::parse(report.to_json());
  doc["model"] = model_summary(m);
  emit(out, {{"report", doc}});
  err << report.to_table();
  return kExitOk;
}

ordered_json keyword_json(const KeywordPrediction& k, const std::vector<std::string>& tokens) {
  ordered_json words = ordered_json::array();
  for (std::size_t i = 0; i < k.positions.size(); ++i) {
    words.push_back({{"index", k.positions[i]}, {"token", tokens[k.positions[i]]}, {"score", k.scores[i]}});
  }
  return words;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.j == 0) throw UsageError("--j must be >= 1");
  LoadedModel m = read_model(o.model, LabelSpace::kTopic);
  emit(out, {{"command", "predict"},
             {"config", {{"model", o.model}, {"corpus", o.corpus}, {"split", o.split},
                         {"act_model", resolved_act_path(m, o)}, {"j", o.j}, {"j_from_gold", o.j_from_gold},
                         {"model_config", model_summary(m)}}}});
  auto act = act_model_for(m, o.model, o.act_model, err);
  if (!act && !o.act_model.empty()) {
    act = load_model(o.act_model, LabelSpace::kDialogAct);  // acts reported alongside topics
  }
  const auto convs = select_split(read_corpus(o.corpus), o.split, m.metadata.split_seed);
  PipelineOptions po;
  po.context_window = m.metadata.context_window;
  po.acts = m.metadata.acts;
  po.keywords_j = o.j;
  po.j_from_gold = o.j_from_gold;
  po.side = m.metadata.side;
  Pipeline pipeline(*m.model, m.vocab, act ? act->model.get() : nullptr, act ? &act->vocab : nullptr, po);
  for (const auto& conv : convs) {
    for (const auto& p : pipeline.run(conv)) {
      ordered_json row = {{"conversation", p.conversation_id},
                          {"turn", p.turn_index},
                          {"speaker", p.speaker == Speaker::kUser ? "user" : "chatbot"},
                          {"topic", to_string(p.topic)},
                          {"confidence", p.topic_probs[static_cast<std::size_t>(p.topic)]}};
      if (p.act) row["act"] = to_string(*p.act);
      if (p.keywords) row["keywords"] = keyword_json(*p.keywords, p.tokens);
      emit(out, row);
    }
  }
  return kExitOk;
}

int cmd_keywords(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.j == 0) throw UsageError("--j must be >= 1");
  LoadedModel m = read_model(o.model, LabelSpace::kTopic);
  emit(out, {{"command", "keywords"},
             {"config", {{"model", o.model}, {"corpus", o.corpus}, {"split", o.split},
                         {"act_model", resolved_act_path(m, o)}, {"j", o.j}, {"j_from_gold", o.j_from_gold},
                         {"model_config", model_summary(m)}}}});
  if (m.model->config().family != ModelFamily::kAdan) {
    throw DataError("keyword extraction needs an ADAN model (it has the attention table)");
  }
  auto act = act_model_for(m, o.model, o.act_model, err);
  const auto convs = select_split(read_corpus(o.corpus), o.split, m.metadata.split_seed);
  PipelineOptions po;
  po.context_window = m.metadata.context_window;
  po.acts = m.metadata.acts;
  po.keywords_j = o.j;
  po.j_from_gold = o.j_from_gold;
  po.side = m.metadata.side;
  Pipeline pipeline(*m.model, m.vocab, act ? act->model.get() : nullptr, act ? &act->vocab : nullptr, po);

  std::vector<KeywordPrediction> preds;
  std::vector<std::vector<std::size_t>> gold;
  for (const auto& conv : convs) {
    for (const auto& p : pipeline.run(conv)) {
      const Turn& turn = conv.turns[p.turn_index];
      const Utterance& u = p.speaker == Speaker::kUser ? turn.user : turn.chatbot;
      std::vector<std::size_t> g;
      for (const auto& span : u.keyword_spans) g.push_back(span.token_index);
      emit(out, {{"conversation", p.conversation_id},
                 {"turn", p.turn_index},
                 {"speaker", p.speaker == Speaker::kUser ? "user" : "chatbot"},
                 {"text", u.text},
                 {"topic", to_string(p.topic)},
                 {"keywords", keyword_json(*p.keywords, p.tokens)},
                 {"gold", g}});
      if (!g.empty()) {
        preds.push_back(*p.keywords);
        gold.push_back(std::move(g));
      }
    }
  }
  if (gold.empty()) throw DataError("no utterances with annotated keywords in the selected split");
  KeywordScores s = evaluate_keywords(preds, gold);
  MetricReport report;
  report.n = gold.size();
  report.keyword_precision = s.precision;
  report.keyword_recall = s.recall;
  ordered_json doc = ordered_json::parse(report.to_json());
  doc["hits"] = s.hits;
  doc["predicted"] = s.predicted;
  doc["gold"] = s.gold;
  emit(out, {{"report", doc}});
  return kExitOk;
}

int cmd_metrics(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.statistic != "total" && o.statistic != "max") throw UsageError("--statistic must be total or max");
  emit(out, {{"command", "metrics"},
             {"config", {{"corpus", o.corpus}, {"split", o.split}, {"seed", o.split_seed},
                         {"statistic", o.statistic}, {"include_other", !o.exclude_other}}}});
  const auto convs = select_split(read_corpus(o.corpus), o.split, o.split_seed);
  TopicalOptions topical{!o.exclude_other};
  double total = 0.0, max = 0.0;
  for (const auto& c : convs) {
    TopicalDepth d = topical_depth(c, topical);
    total += static_cast<double>(d.total);
    max += static_cast<double>(d.max);
  }
  MetricReport report;
  report.n = convs.size();
  if (!convs.empty()) {
    report.depth_mean_total = total / static_cast<double>(convs.size());
    report.depth_mean_max = max / static_cast<double>(convs.size());
  }
  // Depth statistics stay valid when the correlation is not: report them, then
  // surface the undefined correlation as a data error.
  std::optional<std::string> corr_error;
  try {
    DepthCorrelation corr = correlate_depth(
        convs, o.statistic == "max" ? DepthStatistic::kMax : DepthStatistic::kTotal, topical);
    report.correlations = {corr.coherence_row, corr.engagement_row};
  } catch (const MetricError& e) {
    corr_error = e.what();
  } catch (const std::invalid_argument& e) {
    corr_error = e.what();
  }
  ordered_json doc = ordered_json::parse(report.to_json());
  if (corr_error) doc["correlation_error"] = *corr_error;
  emit(out, {{"report", doc}});
  err << report.to_table();
  if (corr_error) {
    err << "data error: " << *corr_error << "\n";
    return kExitData;
  }
  return kExitOk;
}

int cmd_kappa(const Options& o, std::ostream& out, std::ostream& err) {
  emit(out, {{"command", "kappa"},
             {"config", {{"corpus", o.corpus}, {"corpus_b", o.corpus_b}, {"task", o.task}, {"side", o.side}}}});
  if (o.corpus_b.empty()) throw UsageError("--corpus-b (the second annotator's corpus) is required");
  const auto a = read_corpus(o.corpus);
  const auto b = read_corpus(o.corpus_b);
  std::map<std::string, const Conversation*> by_id;
  for (const auto& c : b) by_id[c.id] = &c;

  const LabelSpace space = *parse_label_space(o.task);
  const Side side = *parse_side(o.side);
  std::vector<std::size_t> la, lb;
  std::size_t skipped = 0;
  auto label_of = [space](const Utterance& u) -> std::optional<std::size_t> {
    if (space == LabelSpace::kTopic) {
      if (u.topic) return static_cast<std::size_t>(*u.topic);
    } else if (u.dialog_act && *u.dialog_act != DialogAct::NotSet) {
      return static_cast<std::size_t>(*u.dialog_act);
    }
    return std::nullopt;
  };
  for (const auto& ca : a) {
    auto it = by_id.find(ca.id);
    if (it == by_id.end()) throw DataError("conversation '" + ca.id + "' is missing from --corpus-b");
    const Conversation& cb = *it->second;
    if (cb.turns.size() != ca.turns.size()) {
      throw DataError("conversation '" + ca.id + "' has a different number of turns in --corpus-b");
    }
    for (std::size_t t = 0; t < ca.turns.size(); ++t) {
      std::vector<std::pair<const Utterance*, const Utterance*>> pairs;
      if (side != Side::kChatbot) pairs.emplace_back(&ca.turns[t].user, &cb.turns[t].user);
      if (side != Side::kUser) pairs.emplace_back(&ca.turns[t].chatbot, &cb.turns[t].chatbot);
      for (auto [ua, ub] : pairs) {
        auto x = label_of(*ua);
        auto y = label_of(*ub);
        if (!x || !y) {
          ++skipped;
          continue;
        }
        la.push_back(*x);
        lb.push_back(*y);
      }
    }
  }
  if (la.empty()) throw DataError("no utterance is labeled by both annotators");
  if (skipped > 0) err << "skipped " << skipped << " utterances missing a label on either side\n";
  MetricReport report;
  report.n = la.size();
  report.kappa = cohens_kappa(la, lb);
  emit(out, {{"report", ordered_json::parse(report.to_json())}});
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contextual topic and dialog-act classification toolkit", "convtopic"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every command");
  Options o;

  auto corpus = [&](CLI::App* c, bool required) {
    auto* opt = c->add_option("--corpus", o.corpus, "Corpus file (one conversation per line)");
    if (required) opt->required();
  };
  std::map<const CLI::App*, std::string> default_split;
  auto split = [&](CLI::App* c, const std::string& def) {
    default_split[c] = def;
    c->add_option("--split", o.split, "Conversation split (default: " + def + ")")->check(CLI::IsMember(kSplits));
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic context-dependent corpus");
  synth->add_option("--config", o.config, "Synthetic corpus config file");
  synth->add_option("--out", o.out, "Output corpus path")->required();
  synth->add_option("--seed", o.seed, "Generator seed (overrides the config's)");
  synth->add_option("--conversations", o.conversations, "Number of conversations");
  synth->add_option("--turns", o.turns, "Turns per conversation");
  synth->add_option("--anaphora-rate", o.anaphora_rate, "Probability of an anaphoric user utterance");
  synth->add_option("--topics", o.topics, "Number of built-in topics (without --config)")
      ->check(CLI::Range(1, 12));

  auto* train = app.add_subcommand("train", "Train a topic or dialog-act classifier");
  train->add_option("--task", o.task)->check(CLI::IsMember(kTasks))->capture_default_str();
  train->add_option("--model", o.model, "Model family")->check(CLI::IsMember(kFamilies))->required();
  train->add_option("--context", o.context)->check(CLI::IsMember(kContexts))->capture_default_str();
  train->add_option("--acts", o.acts, "Dialog-act feature for topic models")
      ->check(CLI::IsMember(kActModes))->capture_default_str();
  corpus(train, true);
  train->add_option("--out", o.out, "Model file to write")->required();
  train->add_option("--act-model", o.act_model, "Trained act model (with --acts predicted)");
  train->add_option("--seed", o.seed, "Training seed")->capture_default_str();
  train->add_option("--split-seed", o.split_seed, "Seed of the 80/10/10 conversation split")->capture_default_str();
  train->add_option("--side", o.side, "Utterances to train on")->check(CLI::IsMember(kSides))->capture_default_str();
  train->add_option("--embed-dim", o.embed_dim)->capture_default_str();
  train->add_option("--hidden", o.hidden, "Hidden size (0 = family default)")->capture_default_str();
  train->add_option("--epochs", o.epochs, "Maximum epochs")->capture_default_str();
  train->add_option("--patience", o.patience)->capture_default_str();
  train->add_option("--batch", o.batch)->capture_default_str();
  train->add_option("--lr", o.lr)->capture_default_str();
  train->add_option("--dropout", o.dropout)->capture_default_str();
  train->add_option("--window", o.window, "Context turns")->capture_default_str();
  train->add_option("--min-count", o.min_count)->check(CLI::PositiveNumber)->capture_default_str();
  train->add_option("--pretrained", o.pretrained, "Pretrained word vectors (word v1 ... vD per line)");

  auto* eval = app.add_subcommand("eval", "Evaluate a trained model on a split");
  eval->add_option("--model", o.model, "Model file")->required();
  corpus(eval, true);
  split(eval, "test");
  eval->add_option("--act-model", o.act_model, "Act model for predicted acts (default: <model>.act)");

  auto* predict = app.add_subcommand("predict", "Per-utterance topic/act/keyword predictions");
  predict->add_option("--model", o.model, "Topic model file")->required();
  corpus(predict, true);
  split(predict, "all");
  predict->add_option("--act-model", o.act_model, "Act model (default: <model>.act when needed)");
  predict->add_option("--j", o.j, "Keywords per utterance (ADAN)")->capture_default_str();
  predict->add_flag("--j-from-gold", o.j_from_gold, "Use the annotated keyword count as j");

  auto* keywords = app.add_subcommand("keywords", "Keyword extraction report from an ADAN model");
  keywords->add_option("--model", o.model, "ADAN topic model file")->required();
  corpus(keywords, true);
  split(keywords, "test");
  keywords->add_option("--act-model", o.act_model, "Act model (default: <model>.act when needed)");
  keywords->add_option("--j", o.j, "Keywords per utterance")->capture_default_str();
  keywords->add_flag("--j-from-gold", o.j_from_gold, "Use the annotated keyword count as j");

  auto* metrics = app.add_subcommand("metrics", "Topical depth and its correlation with ratings");
  corpus(metrics, true);
  split(metrics, "all");
  metrics->add_option("--seed", o.split_seed, "Split seed")->capture_default_str();
  metrics->add_option("--statistic", o.statistic, "Depth statistic")
      ->check(CLI::IsMember({"total", "max"}))->capture_default_str();
  metrics->add_flag("--exclude-other", o.exclude_other, "Do not count Other/Other turns as topic-specific");

  auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between two annotations of one corpus");
  corpus(kappa, true);
  kappa->add_option("--corpus-b", o.corpus_b, "Second annotator's corpus")->required();
  kappa->add_option("--task", o.task)->check(CLI::IsMember(kTasks))->capture_default_str();
  kappa->add_option("--side", o.side)->check(CLI::IsMember(kSides))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const CLI::App* chosen = app.get_subcommands().front();
  if (auto it = default_split.find(chosen); it != default_split.end() && chosen->count("--split") == 0) {
    o.split = it->second;
  }
  o.seed_given = synth->count("--seed") > 0;
  o.topics_given = synth->count("--topics") > 0;

  const std::map<const CLI::App*, std::function<int(const Options&, std::ostream&, std::ostream&)>> commands = {
      {synth, cmd_synth},   {train, cmd_train},     {eval, cmd_eval},   {predict, cmd_predict},
      {keywords, cmd_keywords}, {metrics, cmd_metrics}, {kappa, cmd_kappa}};

  try {
    return commands.at(chosen)(o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const MetricError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::domain_error& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    // Corpus, model-file, I/O and consistency errors.
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace convtopic::cli
