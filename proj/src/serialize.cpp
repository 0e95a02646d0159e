#include "convtopic/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace convtopic {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

constexpr std::size_t kMaxHeaderBytes = 256u << 20;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

void put_f32(std::string& out, double value) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  put_u32(out, bits);
}

double get_f32(const std::string& in, std::size_t at) {
  return static_cast<double>(std::bit_cast<float>(get_u32(in, at)));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ordered_json train_echo(const ModelMetadata& m) {
  ordered_json t;
  t["split_seed"] = m.split_seed;
  t["context_window"] = m.context_window;
  t["acts"] = std::string(to_string(m.acts));
  t["side"] = std::string(to_string(m.side));
  t["seed"] = m.train.seed;
  t["learning_rate"] = m.train.learning_rate;
  t["dropout"] = m.train.dropout;
  t["batch_size"] = m.train.batch_size;
  t["max_epochs"] = m.train.max_epochs;
  t["patience"] = m.train.patience;
  return t;
}

}  // namespace

std::string serialize_model(const Classifier& model, const Vocabulary& vocab,
                            const ModelMetadata& metadata) {
  const ModelConfig& c = model.config();
  if (vocab.size() != c.vocab_size) throw ModelFileError("vocabulary does not match the model");
  ordered_json h;
  h["version"] = kModelFormatVersion;
  h["family"] = std::string(to_string(c.family));
  h["labels"] = std::string(to_string(c.labels));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < c.num_labels(); ++i) names.emplace_back(label_name(c.labels, i));
  h["label_names"] = names;
  h["vocab_size"] = c.vocab_size;
  h["embed_dim"] = c.embed_dim;
  h["hidden"] = c.hidden;
  h["context"] = std::string(to_string(c.context));
  h["act_feature"] = c.act_feature;
  h["dropout"] = c.dropout;
  h["embeddings_trainable"] = model.embeddings().trainable;
  h["vocab_hash"] = hex64(vocab.hash());
  h["vocab"] = vocab.words();
  ordered_json shapes = ordered_json::array();
  for (const Parameter* p : model.parameters()) {
    shapes.push_back({{"name", p->name}, {"rows", p->rows()}, {"cols", p->cols()}});
  }
  h["parameters"] = std::move(shapes);
  h["train"] = train_echo(metadata);

  const std::string header = h.dump();
  std::string out(kModelMagic, sizeof kModelMagic);
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (const Parameter* p : model.parameters()) {
    for (double v : p->value.values()) put_f32(out, v);
  }
  return out;
}

void save_model(const Classifier& model, const Vocabulary& vocab, const ModelMetadata& metadata,
                const std::filesystem::path& path) {
  const std::string bytes = serialize_model(model, vocab, metadata);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelFileError("cannot write model file: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ModelFileError("failed writing model file: " + path.string());
}

LoadedModel deserialize_model(const std::string& bytes, std::optional<LabelSpace> expected) {
  constexpr std::size_t kPrefix = sizeof kModelMagic + 4;
  if (bytes.size() < kPrefix) throw ModelFileError("corrupt model file: too short");
  if (std::memcmp(bytes.data(), kModelMagic, sizeof kModelMagic) != 0) {
    throw ModelFileError("not a model file (bad magic)");
  }
  const std::size_t header_len = get_u32(bytes, sizeof kModelMagic);
  if (header_len > kMaxHeaderBytes || header_len > bytes.size() - kPrefix) {
    throw ModelFileError("corrupt model file: header length exceeds file size");
  }
  json h;
  try {
    h = json::parse(bytes.substr(kPrefix, header_len));
  } catch (const json::exception& e) {
    throw ModelFileError(std::string("corrupt model file: bad header: ") + e.what());
  }

  LoadedModel out;
  ModelConfig c;
  try {
    const int version = h.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelFileError("unsupported model file version " + std::to_string(version) +
                           " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    auto family = parse_model_family(h.at("family").get<std::string>());
    auto labels = parse_label_space(h.at("labels").get<std::string>());
    auto context = parse_context_mode(h.at("context").get<std::string>());
    if (!family || !labels || !context) throw ModelFileError("corrupt model file: unknown enum value");
    const auto names = h.at("label_names").get<std::vector<std::string>>();
    bool names_match = names.size() == label_count(*labels);
    for (std::size_t i = 0; names_match && i < names.size(); ++i) {
      names_match = names[i] == label_name(*labels, i);
    }
    if (!names_match) throw ModelFileError("label space mismatch: file labels differ from this build");
    if (expected && *expected != *labels) {
      throw ModelFileError("label space mismatch: model predicts '" + std::string(to_string(*labels)) +
                           "', expected '" + std::string(to_string(*expected)) + "'");
    }
    c.family = *family;
    c.labels = *labels;
    c.context = *context;
    c.vocab_size = h.at("vocab_size").get<std::size_t>();
    c.embed_dim = h.at("embed_dim").get<std::size_t>();
    c.hidden = h.at("hidden").get<std::size_t>();
    c.act_feature = h.at("act_feature").get<bool>();
    c.dropout = h.at("dropout").get<double>();

    out.vocab = Vocabulary::from_words(h.at("vocab").get<std::vector<std::string>>());
    if (out.vocab.size() != c.vocab_size || hex64(out.vocab.hash()) != h.at("vocab_hash").get<std::string>()) {
      throw ModelFileError("corrupt model file: vocabulary does not match its hash/size");
    }

    // Shapes implied by the header must match the declared blocks, and the
    // payload must be exactly that long, before anything is allocated.
    const auto& shapes = h.at("parameters");
    std::size_t total = 0;
    for (const auto& s : shapes) {
      const auto rows = s.at("rows").get<std::size_t>();
      const auto cols = s.at("cols").get<std::size_t>();
      if (rows != 0 && cols > (bytes.size() / 4) / rows) throw ModelFileError("corrupt model file: shape too large");
      total += rows * cols;
    }
    if (total * 4 != bytes.size() - kPrefix - header_len) {
      throw ModelFileError("corrupt model file: expected " + std::to_string(total * 4) +
                           " parameter bytes, found " + std::to_string(bytes.size() - kPrefix - header_len));
    }
    if (c.context == ContextMode::kSeq && c.family != ModelFamily::kBiLstm) {
      throw ModelFileError("corrupt model file: sequential context on a non-recurrent model");
    }
    if (parameter_count(c) != static_cast<long double>(total)) {
      throw ModelFileError("corrupt model file: dimensions disagree with parameter blocks");
    }

    EmbeddingMatrix emb;
    emb.table = Parameter("embeddings", c.vocab_size, c.embed_dim);
    emb.trainable = h.at("embeddings_trainable").get<bool>();
    out.model = make_classifier(c, std::move(emb), 0);
    auto params = out.model->parameters();
    if (params.size() != shapes.size()) throw ModelFileError("corrupt model file: parameter count mismatch");
    std::size_t at = kPrefix + header_len;
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (shapes[k].at("name").get<std::string>() != params[k]->name ||
          shapes[k].at("rows").get<std::size_t>() != params[k]->rows() ||
          shapes[k].at("cols").get<std::size_t>() != params[k]->cols()) {
        throw ModelFileError("corrupt model file: parameter '" + params[k]->name + "' shape mismatch");
      }
      for (auto& v : params[k]->value.values()) {
        v = get_f32(bytes, at);
        at += 4;
      }
    }

    const auto& t = h.at("train");
    out.metadata.split_seed = t.at("split_seed").get<std::uint64_t>();
    out.metadata.context_window = t.at("context_window").get<std::size_t>();
    auto acts = parse_act_mode(t.at("acts").get<std::string>());
    if (!acts) throw ModelFileError("corrupt model file: unknown act mode");
    out.metadata.acts = *acts;
    auto side = parse_side(t.at("side").get<std::string>());
    if (!side) throw ModelFileError("corrupt model file: unknown utterance side");
    out.metadata.side = *side;
    out.metadata.train.seed = t.at("seed").get<std::uint64_t>();
    out.metadata.train.learning_rate = t.at("learning_rate").get<double>();
    out.metadata.train.dropout = t.at("dropout").get<double>();
    out.metadata.train.batch_size = t.at("batch_size").get<std::size_t>();
    out.metadata.train.max_epochs = t.at("max_epochs").get<std::size_t>();
    out.metadata.train.patience = t.at("patience").get<std::size_t>();
    out.metadata.train.context = c.context;
    out.metadata.train.acts = *acts;
    out.metadata.train.context_window = out.metadata.context_window;
  } catch (const json::exception& e) {
    throw ModelFileError(std::string("corrupt model file: ") + e.what());
  } catch (const ShapeError& e) {
    throw ModelFileError(std::string("corrupt model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFileError(std::string("corrupt model file: ") + e.what());
  }
  return out;
}

LoadedModel load_model(const std::filesystem::path& path, std::optional<LabelSpace> expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFileError("cannot read model file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str(), expected);
}

}  // namespace convtopic
