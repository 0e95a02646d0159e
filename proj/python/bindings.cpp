#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <stdexcept>
#include <string>

#include "convtopic/experiment.hpp"
#include "convtopic/metrics.hpp"
#include "convtopic/pipeline.hpp"

namespace py = pybind11;
using namespace convtopic;

namespace {

template <typename T>
T parse_or_throw(std::optional<T> v, const char* what, const std::string& s) {
  if (!v) throw std::invalid_argument(std::string("unknown ") + what + " '" + s + "'");
  return *v;
}

// A topic or act model together with its vocabulary, metadata and (for
// predicted acts) the companion act model.
struct Model {
  LoadedModel main;
  std::optional<LoadedModel> act;
  TrainHistory history;

  const Classifier* act_model() const { return act ? act->model.get() : nullptr; }

  static Model load(const std::filesystem::path& path, std::optional<std::filesystem::path> act_path) {
    Model m{load_model(path), std::nullopt, {}};
    if (m.main.metadata.acts == ActMode::kPredicted || act_path) {
      auto p = act_path.value_or(std::filesystem::path(path.string() + ".act"));
      m.act = load_model(p, LabelSpace::kDialogAct);
      if (m.act->vocab.hash() != m.main.vocab.hash()) {
        throw std::invalid_argument("act model and topic model vocabularies differ");
      }
    }
    return m;
  }

  void save(const std::filesystem::path& path) const {
    save_model(*main.model, main.vocab, main.metadata, path);
    if (act) save_model(*act->model, act->vocab, act->metadata, path.string() + ".act");
  }

  py::dict config() const {
    const ModelConfig& c = main.model->config();
    py::dict d;
    d["family"] = std::string(to_string(c.family));
    d["task"] = std::string(to_string(c.labels));
    d["context"] = std::string(to_string(c.context));
    d["acts"] = std::string(to_string(main.metadata.acts));
    d["side"] = std::string(to_string(main.metadata.side));
    d["embed_dim"] = c.embed_dim;
    d["hidden"] = c.hidden;
    d["vocab_size"] = c.vocab_size;
    d["split_seed"] = main.metadata.split_seed;
    return d;
  }

  py::dict evaluate(const std::filesystem::path& corpus, const std::string& split) const {
    auto convs = parse_corpus(corpus);
    if (split != "all") {
      CorpusSplits s = make_splits(convs, {}, main.metadata.split_seed);
      if (split == "train") convs = s.train;
      else if (split == "dev") convs = s.dev;
      else if (split == "test") convs = s.test;
      else throw std::invalid_argument("split must be train, dev, test or all");
    }
    const ModelConfig& c = main.model->config();
    auto ex = encode_conversations(convs, c.labels, main.metadata.side, main.metadata.context_window, main.vocab,
                                   main.metadata.acts, act_model());
    EvalReport r = convtopic::evaluate(*main.model, ex);
    py::dict per_class;
    for (const auto& [label, acc] : r.per_class) {
      per_class[py::str(std::string(label_name(c.labels, label)))] = py::make_tuple(acc.correct, acc.total);
    }
    py::dict d;
    d["accuracy"] = r.accuracy;
    d["n"] = ex.size();
    d["per_class"] = per_class;
    return d;
  }

  py::list predict(const std::string& conversation_json, std::size_t j, bool j_from_gold) const {
    if (main.model->config().labels != LabelSpace::kTopic) {
      throw std::invalid_argument("predict needs a topic model");
    }
    PipelineOptions po;
    po.context_window = main.metadata.context_window;
    po.acts = main.metadata.acts;
    po.side = main.metadata.side;
    po.keywords_j = j;
    po.j_from_gold = j_from_gold;
    Pipeline pipeline(*main.model, main.vocab, act_model(), act ? &act->vocab : nullptr, po);
    py::list out;
    for (const auto& p : pipeline.run(parse_conversation(conversation_json))) {
      py::dict row;
      row["turn"] = p.turn_index;
      row["speaker"] = p.speaker == Speaker::kUser ? "user" : "chatbot";
      row["tokens"] = p.tokens;
      row["topic"] = std::string(to_string(p.topic));
      row["probs"] = p.topic_probs;
      if (p.act) row["act"] = std::string(to_string(*p.act));
      if (p.keywords) {
        py::list words;
        for (std::size_t pos : p.keywords->positions) words.append(p.tokens[pos]);
        row["keywords"] = words;
      }
      out.append(row);
    }
    return out;
  }
};

Model train_from_corpus(const std::filesystem::path& corpus, const std::string& task, const std::string& family,
                        const std::string& context, const std::string& acts, std::size_t embed_dim,
                        std::size_t hidden, std::size_t epochs, std::uint64_t seed, std::uint64_t split_seed,
                        const std::string& side, double dropout, double learning_rate, std::size_t batch_size,
                        std::size_t patience, std::size_t window) {
  ExperimentSpec spec;
  spec.task = parse_or_throw(parse_label_space(task), "task", task);
  spec.family = parse_or_throw(parse_model_family(family), "model family", family);
  spec.embed_dim = embed_dim;
  spec.hidden = hidden;
  spec.side = parse_or_throw(parse_side(side), "side", side);
  spec.split_seed = split_seed;
  spec.train.seed = seed;
  spec.train.max_epochs = epochs;
  spec.train.dropout = dropout;
  spec.train.learning_rate = learning_rate;
  spec.train.batch_size = batch_size;
  spec.train.patience = patience;
  spec.train.context_window = window;
  spec.train.context = parse_or_throw(parse_context_mode(context), "context mode", context);
  spec.train.acts = parse_or_throw(parse_act_mode(acts), "act mode", acts);

  const CorpusSplits splits = make_splits(parse_corpus(corpus), {}, split_seed);
  py::gil_scoped_release release;
  Model out;
  const Vocabulary* vocab = nullptr;
  if (spec.train.acts == ActMode::kPredicted) {
    TrainedModel act = train_model(splits, act_model_spec(spec));
    out.act = LoadedModel{std::move(act.model), std::move(act.vocab), act.metadata};
    vocab = &out.act->vocab;
  }
  TrainedModel run = train_model(splits, spec, out.act_model(), vocab);
  out.history = run.history;
  out.main = LoadedModel{std::move(run.model), std::move(run.vocab), run.metadata};
  return out;
}

}  // namespace

PYBIND11_MODULE(convtopic, m) {
  m.doc() = "Topic and dialog-act classifiers for open-domain conversations";

  py::register_exception<CorpusError>(m, "CorpusError", PyExc_ValueError);
  py::register_exception<ModelFileError>(m, "ModelFileError", PyExc_ValueError);
  py::register_exception<MetricError>(m, "MetricError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_FloatingPointError);

  m.def("tokenize", [](const std::string& s) { return tokenize(s); }, py::arg("text"));

  m.def(
      "synthesize",
      [](std::uint64_t seed, std::size_t conversations, std::size_t turns, double anaphora_rate, std::size_t topics) {
        SynthConfig c = default_synth_config(topics);
        c.seed = seed;
        c.n_conversations = conversations;
        c.turns_per_conversation = turns;
        c.anaphora_rate = anaphora_rate;
        return serialize_corpus(generate_synthetic(c));
      },
      py::arg("seed") = 1, py::arg("conversations") = 100, py::arg("turns") = 8, py::arg("anaphora_rate") = 0.3,
      py::arg("topics") = 8, "Synthetic context-dependent corpus as line-delimited JSON text.");

  m.def("pearson", &pearson, py::arg("x"), py::arg("y"));
  m.def("cohens_kappa", &cohens_kappa, py::arg("a"), py::arg("b"));

  m.def(
      "topical_depth",
      [](const std::string& conversation_json, bool include_other) {
        const Conversation c = parse_conversation(conversation_json);
        const TopicalOptions opt{include_other};
        const TopicalDepth d = convtopic::topical_depth(c, opt);
        py::list subs;
        for (const auto& s : sub_conversations(c, opt)) {
          subs.append(py::make_tuple(std::string(to_string(s.topic)), s.start, s.length));
        }
        py::dict out;
        out["max"] = d.max;
        out["total"] = d.total;
        out["sub_conversations"] = subs;
        return out;
      },
      py::arg("conversation"), py::arg("include_other") = true,
      "Depth statistics of one conversation given as a JSON record.");

  py::class_<Model>(m, "Model")
      .def_static("load", &Model::load, py::arg("path"), py::arg("act_model") = py::none())
      .def("save", &Model::save, py::arg("path"))
      .def_property_readonly("config", &Model::config)
      .def_property_readonly("history",
                             [](const Model& self) {
                               py::dict d;
                               d["train_loss"] = self.history.train_loss;
                               d["dev_accuracy"] = self.history.dev_accuracy;
                               d["selected_epoch"] = self.history.selected_epoch;
                               return d;
                             })
      .def("evaluate", &Model::evaluate, py::arg("corpus"), py::arg("split") = "test")
      .def("predict", &Model::predict, py::arg("conversation"), py::arg("j") = 1, py::arg("j_from_gold") = false,
           "Runs the streaming pipeline over one conversation given as a JSON record.");

  m.def("train", &train_from_corpus, py::arg("corpus"), py::arg("task") = "topic", py::arg("model") = "dan",
        py::arg("context") = "none", py::arg("acts") = "none", py::arg("embed_dim") = 300, py::arg("hidden") = 0,
        py::arg("epochs") = 50, py::arg("seed") = 0, py::arg("split_seed") = 13, py::arg("side") = "both",
        py::arg("dropout") = 0.5, py::arg("learning_rate") = 0.001, py::arg("batch_size") = 32,
        py::arg("patience") = 2, py::arg("window") = kDefaultContextWindow,
        "Trains a classifier on the corpus's train split with early stopping on its dev split.");
}
