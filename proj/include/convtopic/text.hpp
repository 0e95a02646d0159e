#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "convtopic/tensor.hpp"

namespace convtopic {

/// Lowercases, splits on whitespace, strips leading/trailing punctuation from
/// each piece (inner apostrophes survive) and drops empty pieces.
std::vector<std::string> tokenize(std::string_view text);

inline constexpr int kPadId = 0;
inline constexpr int kUnknownId = 1;

class Vocabulary {
 public:
  Vocabulary();

  /// Rebuilds a vocabulary from its id-ordered word list (ids 0 and 1 must be
  /// the reserved entries).
  static Vocabulary from_words(std::vector<std::string> words);

  int lookup(std::string_view word) const;
  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  /// FNV-1a over the id-ordered words; identifies compatible vocabularies.
  std::uint64_t hash() const;

 private:
  void add(std::string w);

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
};

/// Every token with count >= min_count, ordered by descending frequency then
/// lexicographically. Throws std::invalid_argument when min_count < 1.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& token_lists, int min_count);

struct EmbeddingMatrix {
  Parameter table;  // |V| x D; row kPadId stays zero
  bool trainable = true;

  std::size_t dim() const { return table.cols(); }
  std::size_t vocab_size() const { return table.rows(); }
  std::span<const double> row(int id) const { return table.value.row(static_cast<std::size_t>(id)); }
};

struct EmbeddingSource {
  std::optional<std::filesystem::path> pretrained;  // "word v1 ... vD" per line
  std::uint64_t seed = 0;
  double scale = 0.1;  // rows not covered by the file are uniform in [-scale, scale]
};

/// Throws std::runtime_error for unreadable files or rows whose width != dim.
EmbeddingMatrix init_embeddings(const Vocabulary& vocab, const EmbeddingSource& source,
                                std::size_t dim);

}  // namespace convtopic
