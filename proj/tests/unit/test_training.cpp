#include <cmath>
#include <fstream>
#include <limits>

#include "convtopic/experiment.hpp"
#include "convtopic/serialize.hpp"
#include "convtopic/training.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace convtopic;

namespace {

std::vector<EncodedExample> random_set(std::size_t n, std::size_t vocab, std::uint64_t seed,
                                       bool acts = false) {
  Rng rng(seed);
  std::vector<EncodedExample> out(n);
  for (auto& ex : out) {
    const std::size_t len = 1 + rng.below(5);
    for (std::size_t i = 0; i < len; ++i) ex.input.tokens.push_back(2 + static_cast<int>(rng.below(vocab - 2)));
    for (std::size_t t = rng.below(3); t > 0; --t) ex.input.context_turns.push_back({2 + static_cast<int>(rng.below(vocab - 2))});
    if (acts) ex.input.act_feature = one_hot_act(static_cast<DialogAct>(rng.below(kNumDialogActs)));
    ex.label = rng.below(kNumTopics);
  }
  return out;
}

ModelConfig small(ModelFamily family, std::size_t vocab) {
  ModelConfig c;
  c.family = family;
  c.vocab_size = vocab;
  c.embed_dim = 4;
  c.hidden = 5;
  c.context = ContextMode::kAvg;
  c.act_feature = true;
  c.dropout = 0.2;
  return c;
}

std::vector<Tensor> values(Classifier& m) {
  std::vector<Tensor> out;
  for (Parameter* p : m.parameters()) out.push_back(p->value);
  return out;
}

}  // namespace

TEST_CASE("early stopping rule") {
  EarlyStopping s(2);
  CHECK(s.observe(0.5));
  CHECK(s.observe(0.6));
  CHECK_FALSE(s.observe(0.6));
  CHECK_FALSE(s.should_stop());
  CHECK_FALSE(s.observe(0.6));
  CHECK(s.should_stop());
  CHECK(s.best_epoch() == 2);
  CHECK_THROWS(EarlyStopping(0));
}

TEST_CASE("train stops on patience and restores the best snapshot") {
  auto data = random_set(40, 10, 1, true);
  auto m = make_classifier(small(ModelFamily::kDan, 10), test::random_embeddings(10, 4, 2), 3);
  const std::vector<double> dev{0.5, 0.6, 0.6, 0.6, 0.9, 0.9};
  std::vector<std::vector<Tensor>> seen;
  TrainHooks hooks;
  hooks.dev_scorer = [&](const Classifier&, std::size_t epoch) { return dev.at(epoch - 1); };
  hooks.on_epoch = [&](const Classifier& c, std::size_t, double) {
    seen.push_back(values(const_cast<Classifier&>(c)));
  };
  TrainConfig cfg;
  cfg.seed = 4;
  cfg.batch_size = 8;
  cfg.max_epochs = 10;
  auto h = train(*m, data, data, cfg, hooks);
  CHECK(h.dev_accuracy.size() == 4);
  CHECK(h.train_loss.size() == 4);
  CHECK(h.selected_epoch == 2);
  CHECK(values(*m) == seen[1]);
  CHECK_FALSE(values(*m) == seen[3]);
  CHECK(h.to_json().find("\"selected_epoch\":2") != std::string::npos);
}

TEST_CASE("training is bit-reproducible for a seed") {
  auto data = random_set(60, 12, 5, true);
  for (ModelFamily f : {ModelFamily::kDan, ModelFamily::kAdan, ModelFamily::kBiLstm}) {
    TrainConfig cfg;
    cfg.seed = 9;
    cfg.batch_size = 16;
    cfg.max_epochs = 3;
    auto a = make_classifier(small(f, 12), test::random_embeddings(12, 4, 6), 7);
    auto b = make_classifier(small(f, 12), test::random_embeddings(12, 4, 6), 7);
    auto ha = train(*a, data, data, cfg);
    auto hb = train(*b, data, data, cfg);
    CHECK(values(*a) == values(*b));
    CHECK(ha.dev_accuracy == hb.dev_accuracy);
    Vocabulary v = Vocabulary::from_words({"<pad>", "<unk>", "a", "b", "c", "d", "e", "f", "g", "h", "i", "j"});
    CHECK(serialize_model(*a, v, {}) == serialize_model(*b, v, {}));
  }
}

TEST_CASE("train rejects bad input and reports divergence") {
  auto data = random_set(10, 10, 1, true);
  auto m = make_classifier(small(ModelFamily::kDan, 10), test::random_embeddings(10, 4, 2), 3);
  TrainConfig cfg;
  cfg.max_epochs = 2;
  CHECK_THROWS_AS(train(*m, {}, data, cfg), std::invalid_argument);
  CHECK_THROWS_AS(train(*m, data, {}, cfg), std::invalid_argument);
  cfg.patience = 0;
  CHECK_THROWS(train(*m, data, data, cfg));
  cfg.patience = 2;
  cfg.dropout = 1.0;
  CHECK_THROWS(train(*m, data, data, cfg));
  cfg.dropout = 0.2;

  // NaN anywhere upstream must surface as divergence, not be clamped away.
  for (std::size_t which : {0u, 4u}) {  // embeddings, output bias
    auto broken = m->clone();
    broken->parameters().at(which)->value.fill(std::numeric_limits<double>::quiet_NaN());
    try {
      train(*broken, data, data, cfg);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.epoch == 1);
      CHECK(e.batch == 1);
    }
  }
}

TEST_CASE("evaluate") {
  auto data = random_set(30, 10, 8, true);
  auto m = make_classifier(small(ModelFamily::kAdan, 10), test::random_embeddings(10, 4, 2), 3);
  auto a = evaluate(*m, data), b = evaluate(*m, data);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.predictions == b.predictions);
  std::size_t total = 0;
  for (const auto& [label, acc] : a.per_class) total += acc.total;
  CHECK(total == data.size());
  CHECK_THROWS_AS(evaluate(*m, {}), std::invalid_argument);
  data[0].space = LabelSpace::kDialogAct;
  CHECK_THROWS_AS(evaluate(*m, data), std::invalid_argument);
}

TEST_CASE("model files round trip") {
  test::TempDir dir("training-serialize");
  Vocabulary v = Vocabulary::from_words({"<pad>", "<unk>", "a", "b", "c", "d", "e", "f", "g", "h"});
  auto inputs = random_set(100, 10, 12, true);
  ModelMetadata meta;
  meta.split_seed = 21;
  meta.side = Side::kUser;
  meta.acts = ActMode::kGold;
  meta.train.seed = 3;
  for (ModelFamily f : {ModelFamily::kDan, ModelFamily::kAdan, ModelFamily::kBiLstm}) {
    auto m = make_classifier(small(f, 10), test::random_embeddings(10, 4, 2), 3);
    const auto path = dir / (std::string(to_string(f)) + ".bin");
    save_model(*m, v, meta, path);
    LoadedModel back = load_model(path, LabelSpace::kTopic);
    CHECK(back.model->config().family == f);
    CHECK(back.vocab.hash() == v.hash());
    CHECK(back.metadata.split_seed == 21);
    CHECK(back.metadata.side == Side::kUser);
    CHECK(back.metadata.acts == ActMode::kGold);
    double worst = 0.0;
    for (const auto& ex : inputs) {
      auto p = m->predict(ex.input), q = back.model->predict(ex.input);
      for (std::size_t k = 0; k < p.size(); ++k) worst = std::max(worst, std::abs(p[k] - q[k]));
    }
    CHECK(worst < 1e-6);
    CHECK_THROWS_AS(load_model(path, LabelSpace::kDialogAct), ModelFileError);
  }
}

TEST_CASE("corrupt model files are rejected") {
  Vocabulary v = Vocabulary::from_words({"<pad>", "<unk>", "a"});
  auto m = make_classifier(small(ModelFamily::kDan, 3), test::random_embeddings(3, 4, 2), 3);
  const std::string bytes = serialize_model(*m, v, {});
  CHECK_NOTHROW(deserialize_model(bytes));
  CHECK_THROWS_AS(deserialize_model(bytes.substr(0, bytes.size() - 3)), ModelFileError);
  CHECK_THROWS_AS(deserialize_model(bytes.substr(0, 10)), ModelFileError);
  CHECK_THROWS_AS(deserialize_model(bytes + "x"), ModelFileError);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_model(magic), ModelFileError);

  // Rewrite the header with version 99 and a matching length field.
  std::uint32_t len = 0;
  for (int i = 3; i >= 0; --i) len = (len << 8) | static_cast<unsigned char>(bytes[8 + i]);
  std::string header = bytes.substr(12, len);
  const auto pos = header.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  header.replace(pos, 11, "\"version\":99");
  std::string v99 = bytes.substr(0, 8);
  for (int i = 0; i < 4; ++i) v99.push_back(static_cast<char>((header.size() >> (8 * i)) & 0xff));
  v99 += header + bytes.substr(12 + len);
  try {
    deserialize_model(v99);
    FAIL("expected a version error");
  } catch (const ModelFileError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
  CHECK_THROWS_AS(load_model("/nonexistent/model.bin"), ModelFileError);
}

TEST_CASE("DAN learns the keyword-only synthetic corpus") {
  SynthConfig cfg = default_synth_config(8);
  cfg.seed = 3;
  cfg.n_conversations = 1000;
  cfg.anaphora_rate = 0.0;
  ExperimentSpec spec;
  spec.embed_dim = 32;
  spec.hidden = 32;
  spec.split_seed = 7;
  spec.train.seed = 5;
  spec.train.max_epochs = 20;
  spec.train.dropout = 0.3;
  auto run = train_model(make_splits(generate_synthetic(cfg), {}, spec.split_seed), spec);
  CHECK(run.history.dev_accuracy.size() <= 20);
  CHECK(run.history.dev_accuracy.at(run.history.selected_epoch - 1) >= 0.95);
}
