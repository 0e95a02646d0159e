#pragma once

// Model container:
//   8 bytes   magic "CTCMDL01"
//   4 bytes   little-endian header length N
//   N bytes   structured-text (JSON) header: version, family, label space,
//             dimensions, vocabulary + hash, parameter shapes, training echo
//   rest      little-endian float32 parameter blocks in header order

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "convtopic/models.hpp"
#include "convtopic/text.hpp"
#include "convtopic/training.hpp"

namespace convtopic {

inline constexpr char kModelMagic[8] = {'C', 'T', 'C', 'M', 'D', 'L', '0', '1'};
inline constexpr int kModelFormatVersion = 1;

class ModelFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training settings echoed into the header so eval/predict can rebuild the
/// same examples.
struct ModelMetadata {
  std::uint64_t split_seed = 0;
  std::size_t context_window = kDefaultContextWindow;
  ActMode acts = ActMode::kNone;
  Side side = Side::kBoth;
  TrainConfig train;
};

struct LoadedModel {
  std::unique_ptr<Classifier> model;
  Vocabulary vocab;
  ModelMetadata metadata;
};

std::string serialize_model(const Classifier& model, const Vocabulary& vocab,
                            const ModelMetadata& metadata);
void save_model(const Classifier& model, const Vocabulary& vocab, const ModelMetadata& metadata,
                const std::filesystem::path& path);

/// Throws ModelFileError for a bad magic, unsupported version, malformed or
/// truncated content, or (when `expected` is given) a different label space.
LoadedModel deserialize_model(const std::string& bytes, std::optional<LabelSpace> expected = {});
LoadedModel load_model(const std::filesystem::path& path, std::optional<LabelSpace> expected = {});

}  // namespace convtopic
