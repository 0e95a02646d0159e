#include <cmath>
#include <fstream>
#include <set>

#include "convtopic/corpus.hpp"
#include "convtopic/text.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace convtopic;

namespace {

std::vector<Conversation> numbered(std::size_t n) {
  std::vector<Conversation> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = "c" + std::to_string(i);
    out[i].turns.resize(1);
  }
  return out;
}

std::vector<ClassificationExample> labeled(std::size_t other, std::size_t sports) {
  std::vector<ClassificationExample> out;
  for (std::size_t i = 0; i < other + sports; ++i) {
    ClassificationExample ex;
    ex.label = i < other ? index_of(Topic::Other) : index_of(Topic::Sports);
    ex.turn_index = i;
    out.push_back(ex);
  }
  return out;
}

}  // namespace

TEST_CASE("parse_corpus: annotated example") {
  auto convs = parse_corpus(test::data_path("annotated_example.jsonl"));
  REQUIRE(convs.size() == 1);
  const Conversation& c = convs[0];
  REQUIRE(c.turns.size() == 2);
  CHECK(c.turns[0].user.topic == Topic::Politics);
  CHECK(c.turns[0].chatbot.topic == Topic::Fashion);
  CHECK(c.turns[1].user.topic == Topic::Fashion);
  CHECK(c.turns[1].chatbot.topic == Topic::Fashion);
  CHECK(c.turns[0].chatbot.dialog_act == DialogAct::TopicSwitch);
  CHECK_FALSE(c.turns[1].chatbot.dialog_act.has_value());
  CHECK(c.turns[1].chatbot.keyword_spans.size() == 3);

  // Round trip through the writer.
  CHECK(parse_corpus_text(serialize_corpus(convs)) == convs);
}

TEST_CASE("parse_corpus: schema errors name the field") {
  const std::string good =
      R"({"id":"a","turns":[{"user":{"text":"hi","topic":"Phatic"},"chatbot":{"text":"hello","topic":"Phatic"}}]})";
  CHECK(parse_corpus_text(good + "\n\n").size() == 1);

  std::string cooking = good;
  cooking.replace(cooking.find("\"Phatic\""), 8, "\"Cooking\"");
  try {
    parse_corpus_text(cooking);
    FAIL("expected a schema error");
  } catch (const CorpusError& e) {
    CHECK(std::string(e.what()).find("Cooking") != std::string::npos);
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(parse_corpus_text(R"({"turns":[]})"), CorpusError);
  CHECK_THROWS_AS(parse_corpus_text(good + "\n" + good), CorpusError);  // duplicate id
  CHECK_THROWS_AS(parse_corpus_text("{not json"), CorpusError);
  CHECK_THROWS_AS(parse_corpus("/nonexistent/corpus.jsonl"), CorpusError);
  std::string extra = good;
  extra.insert(1, R"("bogus":1,)");
  CHECK_THROWS_AS(parse_corpus_text(extra), CorpusError);
}

TEST_CASE("make_splits") {
  auto convs = numbered(10);
  auto s = make_splits(convs, {}, 7);
  CHECK(s.train.size() == 8);
  CHECK(s.dev.size() == 1);
  CHECK(s.test.size() == 1);
  auto again = make_splits(convs, {}, 7);
  CHECK(again.train == s.train);
  CHECK(again.dev == s.dev);
  CHECK(again.test == s.test);

  std::set<std::string> ids;
  for (const auto* part : {&s.train, &s.dev, &s.test})
    for (const auto& c : *part) ids.insert(c.id);
  CHECK(ids.size() == 10);
  for (std::size_t i = 1; i < s.train.size(); ++i)
    CHECK(std::stoi(s.train[i - 1].id.substr(1)) < std::stoi(s.train[i].id.substr(1)));

  CHECK_THROWS_AS(make_splits(numbered(2), {}, 7), std::invalid_argument);
  CHECK_THROWS_AS(make_splits(convs, {0.5, 0.1, 0.1}, 7), std::invalid_argument);
}

TEST_CASE("downsample_class") {
  auto ex = labeled(100, 50);
  auto kept = downsample_class(ex, index_of(Topic::Other), 0.25, 17);
  std::size_t other = 0, sports = 0;
  for (const auto& e : kept) (e.label == index_of(Topic::Other) ? other : sports)++;
  CHECK(other == 23);  // frozen from the seeded draw
  CHECK(sports == 50);
  for (std::size_t i = 1; i < kept.size(); ++i) CHECK(kept[i - 1].turn_index < kept[i].turn_index);
  CHECK(downsample_class(ex, index_of(Topic::Other), 0.25, 17).size() == kept.size());

  CHECK(downsample_class(ex, index_of(Topic::Other), 1.0, 17).size() == ex.size());
  CHECK(downsample_class(labeled(0, 5), index_of(Topic::Other), 0.1, 17).size() == 5);
}

TEST_CASE("build_examples: annotated example") {
  auto conv = parse_corpus(test::data_path("annotated_example.jsonl"))[0];
  auto ex = build_examples(conv, LabelSpace::kTopic, Side::kUser, 5);
  REQUIRE(ex.size() == 2);
  CHECK(ex[0].context_turns.empty());
  REQUIRE(ex[1].context_turns.size() == 1);
  CHECK(ex[1].context_turns[0] == conv.turns[0]);
  CHECK(ex[1].label == index_of(Topic::Fashion));
  CHECK(ex[0].keyword_indices == std::vector<std::size_t>{3});

  for (const auto& e : build_examples(conv, LabelSpace::kTopic, Side::kBoth, 0))
    CHECK(e.context_turns.empty());
  CHECK(build_examples(conv, LabelSpace::kTopic, Side::kBoth, 5).size() == 4);

  // The unset chatbot act in turn 2 is skipped for the act task.
  CHECK(build_examples(conv, LabelSpace::kDialogAct, Side::kBoth, 5).size() == 3);
  conv.turns[0].user.dialog_act = DialogAct::NotSet;
  CHECK(build_examples(conv, LabelSpace::kDialogAct, Side::kUser, 5).size() == 1);
}

TEST_CASE("build_examples never leaks future turns") {
  SynthConfig cfg = default_synth_config(4);
  cfg.n_conversations = 20;
  for (std::size_t window : {0u, 2u, 5u, 10u}) {
    for (const auto& e : build_examples(generate_synthetic(cfg), LabelSpace::kTopic, Side::kBoth, window)) {
      CHECK(e.context_turns.size() == std::min(window, e.turn_index));
    }
  }
}

TEST_CASE("synthetic corpus") {
  SynthConfig cfg = default_synth_config(8);
  cfg.seed = 1;
  cfg.n_conversations = 50;
  CHECK(serialize_corpus(generate_synthetic(cfg)) == serialize_corpus(generate_synthetic(cfg)));

  cfg.anaphora_rate = 0.0;
  for (const auto& c : generate_synthetic(cfg)) {
    for (const auto& t : c.turns) {
      REQUIRE(t.user.topic.has_value());
      REQUIRE_FALSE(t.user.keyword_spans.empty());
      auto tokens = tokenize(t.user.text);
      for (const auto& k : t.user.keyword_spans) {
        REQUIRE(k.token_index < tokens.size());
        CHECK(k.topic == *t.user.topic);
      }
    }
  }

  cfg.anaphora_rate = 0.3;
  cfg.n_conversations = 200;
  cfg.turns_per_conversation = 6;  // 1000 non-initial user utterances
  std::size_t n = 0, anaphoric = 0;
  for (const auto& c : generate_synthetic(cfg)) {
    CHECK_FALSE(is_anaphoric_filler(c.turns[0].user.text));
    for (std::size_t i = 1; i < c.turns.size(); ++i) {
      ++n;
      if (is_anaphoric_filler(c.turns[i].user.text)) {
        ++anaphoric;
        CHECK(c.turns[i].user.topic == c.turns[i - 1].user.topic);
        if (c.turns[i].user.text == "yes") CHECK(c.turns[i].user.dialog_act == c.turns[i - 1].user.dialog_act);
      }
    }
  }
  REQUIRE(n == 1000);
  const double mean = 0.3 * n, sd = std::sqrt(n * 0.3 * 0.7);
  CHECK(std::abs(static_cast<double>(anaphoric) - mean) < 3 * sd);
}

TEST_CASE("synth config round trip and validation") {
  SynthConfig cfg = load_synth_config(test::data_path("synth_8topics.json"));
  CHECK(cfg.seed == 2024);
  CHECK(cfg.n_conversations == 2000);
  CHECK(cfg.lexicons.size() == 8);
  CHECK(serialize_synth_config(parse_synth_config(serialize_synth_config(cfg))) == serialize_synth_config(cfg));

  SynthConfig bad = default_synth_config(4);
  bad.anaphora_rate = 1.5;
  CHECK_THROWS(generate_synthetic(bad));
  CHECK_THROWS(default_synth_config(0));
  CHECK_THROWS(parse_synth_config(R"({"seed":1,"unknown":2})"));
}
