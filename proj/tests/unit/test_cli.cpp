#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "convtopic/experiment.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace convtopic;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
  std::vector<json> lines() const {
    std::vector<json> docs;
    std::istringstream in(out);
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) docs.push_back(json::parse(line));
    return docs;
  }
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "convtopic");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("synth is deterministic and echoes its config") {
  test::TempDir dir("cli-synth");
  SynthConfig cfg = default_synth_config(4);
  cfg.n_conversations = 30;
  std::ofstream(dir / "s.cfg") << serialize_synth_config(cfg);

  auto a = run({"synth", "--config", (dir / "s.cfg").string(), "--out", (dir / "a.jsonl").string()});
  auto b = run({"synth", "--config", (dir / "s.cfg").string(), "--out", (dir / "b.jsonl").string()});
  REQUIRE(a.code == cli::kExitOk);
  REQUIRE(b.code == cli::kExitOk);
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));
  CHECK(parse_corpus(dir / "a.jsonl").size() == 30);
  auto docs = a.lines();
  REQUIRE_FALSE(docs.empty());
  CHECK(docs[0]["command"] == "synth");
  CHECK(docs[0]["config"]["synth"]["n_conversations"] == 30);

  auto c = run({"synth", "--config", (dir / "s.cfg").string(), "--seed", "99", "--out", (dir / "c.jsonl").string()});
  CHECK(c.code == cli::kExitOk);
  CHECK(slurp(dir / "c.jsonl") != slurp(dir / "a.jsonl"));
}

TEST_CASE("usage and data errors map to exit codes") {
  test::TempDir dir("cli-errors");
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"synth", "--out", (dir / "x.jsonl").string(), "--bogus", "1"}).code == cli::kExitUsage);
  CHECK(run({"synth", "--out", (dir / "x.jsonl").string(), "--anaphora-rate", "abc"}).code == cli::kExitUsage);
  CHECK(run({"train", "--task", "topic", "--model", "dan"}).code == cli::kExitUsage);  // no corpus
  CHECK(run({"train", "--task", "weather", "--model", "dan", "--corpus", "c", "--out", "m"}).code ==
        cli::kExitUsage);
  CHECK(run({"synth", "--help"}).code == cli::kExitOk);

  CHECK(run({"eval", "--model", (dir / "missing.bin").string(), "--corpus", "x"}).code == cli::kExitData);
  std::ofstream(dir / "bad.jsonl") << "{\"id\":\"a\",\"turns\":[{\"user\":{\"text\":\"x\",\"topic\":\"Cooking\"}}]}\n";
  auto bad = run({"metrics", "--corpus", (dir / "bad.jsonl").string()});
  CHECK(bad.code == cli::kExitData);
  CHECK(bad.err.find("Cooking") != std::string::npos);
  // The config line is printed even when the run fails.
  CHECK(bad.lines().at(0)["command"] == "metrics");
}

TEST_CASE("metrics and kappa on the annotated example") {
  const auto annotated = test::data_path("annotated_example.jsonl").string();
  auto m = run({"metrics", "--corpus", annotated});
  CHECK(m.code == cli::kExitData);  // one conversation: correlation undefined
  auto docs = m.lines();
  REQUIRE(docs.size() == 2);
  CHECK(docs[1]["report"]["depth_mean_total"] == 1.0);

  auto k = run({"kappa", "--corpus", annotated, "--corpus-b", annotated, "--task", "topic"});
  CHECK(k.code == cli::kExitOk);
}

TEST_CASE("train, eval, predict and keywords") {
  test::TempDir dir("cli-train");
  SynthConfig cfg = default_synth_config(4);
  cfg.n_conversations = 60;
  cfg.turns_per_conversation = 4;
  const auto corpus = (dir / "c.jsonl").string();
  write_corpus(corpus, generate_synthetic(cfg));
  const std::vector<std::string> dims{"--embed-dim", "8", "--hidden", "8", "--epochs", "3", "--seed", "4"};

  auto with = [](std::vector<std::string> a, const std::vector<std::string>& extra) {
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  const auto model = (dir / "m.bin").string();
  auto t = run(with({"train", "--task", "topic", "--model", "adan", "--context", "avg", "--acts", "predicted",
                     "--corpus", corpus, "--out", model},
                    dims));
  REQUIRE(t.code == cli::kExitOk);
  CHECK(std::filesystem::exists(model));
  CHECK(std::filesystem::exists(model + ".act"));
  auto tdocs = t.lines();
  CHECK(tdocs[0]["config"]["acts"] == "predicted");

  auto t2 = run(with({"train", "--task", "topic", "--model", "adan", "--context", "avg", "--acts", "predicted",
                      "--corpus", corpus, "--out", (dir / "m2.bin").string()},
                     dims));
  REQUIRE(t2.code == cli::kExitOk);
  CHECK(slurp(model) == slurp(dir / "m2.bin"));

  auto e = run({"eval", "--model", model, "--corpus", corpus, "--split", "test"});
  REQUIRE(e.code == cli::kExitOk);
  const double cli_acc = e.lines().at(1)["report"]["accuracy"].get<double>();

  // Library-level evaluation of the same split agrees.
  LoadedModel loaded = load_model(model);
  LoadedModel act = load_model(model + ".act");
  auto splits = make_splits(parse_corpus(corpus), {}, loaded.metadata.split_seed);
  auto ex = encode_conversations(splits.test, LabelSpace::kTopic, loaded.metadata.side,
                                 loaded.metadata.context_window, loaded.vocab, ActMode::kPredicted,
                                 act.model.get());
  CHECK(evaluate(*loaded.model, ex).accuracy == doctest::Approx(cli_acc).epsilon(1e-12));

  auto p = run({"predict", "--model", model, "--corpus", corpus, "--split", "test"});
  REQUIRE(p.code == cli::kExitOk);
  auto pdocs = p.lines();
  REQUIRE(pdocs.size() > 1);

  auto k = run({"keywords", "--model", model, "--corpus", corpus, "--j-from-gold"});
  REQUIRE(k.code == cli::kExitOk);
  auto kdocs = k.lines();
  const auto& report = kdocs.back()["report"];
  CHECK(report["keyword_precision"] == report["keyword_recall"]);

  CHECK(run({"train", "--task", "topic", "--model", "dan", "--context", "seq", "--corpus", corpus, "--out",
             (dir / "bad.bin").string()})
            .code == cli::kExitUsage);
}
