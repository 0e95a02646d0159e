#include "convtopic/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "convtopic/rng.hpp"

namespace convtopic {
namespace {

bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && is_punct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && is_punct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b < e) {
      std::string piece(text.substr(b, e - b));
      for (auto& c : piece) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      out.push_back(std::move(piece));
    }
    i = j;
  }
  return out;
}

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  if (words.size() < 2 || words[0] != "<pad>" || words[1] != "<unk>") {
    throw std::invalid_argument("vocabulary must start with <pad>, <unk>");
  }
  Vocabulary v;
  for (std::size_t i = 2; i < words.size(); ++i) {
    if (v.ids_.contains(words[i])) throw std::invalid_argument("duplicate vocabulary word: " + words[i]);
    v.add(std::move(words[i]));
  }
  return v;
}

void Vocabulary::add(std::string w) {
  ids_.emplace(w, static_cast<int>(words_.size()));
  words_.push_back(std::move(w));
}

int Vocabulary::lookup(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end() || it->second < 2) return kUnknownId;
  return it->second;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(lookup(t));
  return ids;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& w : words_) {
    for (unsigned char c : w) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;  // word separator
    h *= 0x100000001b3ULL;
  }
  return h;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& token_lists, int min_count) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  std::map<std::string, long> counts;
  for (const auto& tokens : token_lists) {
    for (const auto& t : tokens) ++counts[t];
  }
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [w, c] : counts) {
    if (c >= min_count) kept.emplace_back(w, c);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words = {"<pad>", "<unk>"};
  for (auto& [w, c] : kept) {
    if (w == "<pad>" || w == "<unk>") continue;
    words.push_back(w);
  }
  return Vocabulary::from_words(std::move(words));
}

EmbeddingMatrix init_embeddings(const Vocabulary& vocab, const EmbeddingSource& source,
                                std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("embedding dimension must be > 0");
  EmbeddingMatrix m;
  m.table = Parameter("embeddings", vocab.size(), dim);
  Rng rng(source.seed);
  for (std::size_t r = 1; r < vocab.size(); ++r) {
    for (auto& v : m.table.value.row(r)) v = rng.uniform(-source.scale, source.scale);
  }
  if (!source.pretrained) return m;

  std::ifstream in(*source.pretrained);
  if (!in) throw std::runtime_error("cannot read pretrained vectors: " + source.pretrained->string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<double> values;
    std::string num;
    while (fields >> num) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
      if (ec != std::errc() || ptr != num.data() + num.size()) {
        throw std::runtime_error("pretrained vectors line " + std::to_string(line_no) +
                                 ": bad number '" + num + "'");
      }
      values.push_back(v);
    }
    if (values.size() != dim) {
      throw std::runtime_error("pretrained vectors line " + std::to_string(line_no) + ": expected " +
                               std::to_string(dim) + " values, found " +
                               std::to_string(values.size()));
    }
    const int id = vocab.lookup(word);
    if (id < 2 || vocab.word(id) != word) continue;
    std::copy(values.begin(), values.end(), m.table.value.row(static_cast<std::size_t>(id)).begin());
  }
  return m;
}

}  // namespace convtopic
