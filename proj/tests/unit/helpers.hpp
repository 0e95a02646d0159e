#pragma once

#include <filesystem>
#include <string>

#include "convtopic/rng.hpp"
#include "convtopic/text.hpp"

namespace convtopic::test {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(CONVTOPIC_DATA_DIR) / name;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("convtopic-" + tag + "-" + std::to_string(Rng(std::hash<std::string>{}(tag)).next_u64()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline EmbeddingMatrix random_embeddings(std::size_t vocab, std::size_t dim, std::uint64_t seed,
                                         double scale = 1.0) {
  EmbeddingMatrix e;
  e.table = Parameter("embeddings", vocab, dim);
  Rng rng(seed);
  e.table.value.fill_uniform(rng, -scale, scale);
  for (std::size_t c = 0; c < dim; ++c) e.table.value(kPadId, c) = 0.0;
  return e;
}

}  // namespace convtopic::test
