#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ldntag/corpus.hpp"
#include "ldntag/crf.hpp"
#include "ldntag/embeddings.hpp"
#include "ldntag/features.hpp"
#include "ldntag/ldn.hpp"

namespace ldntag {

/// Everything the training loop needs besides the corpus and embeddings.
/// The defaults reproduce the reference setup.
struct TrainConfig {
  TrainConfig();  // seeds ldn.stopwords with the built-in list

  std::size_t epochs = 226;
  double learning_rate = 0.05;
  std::size_t batch_size = 8;
  double l2 = 1e-4;
  std::uint64_t seed = 1;
  bool shuffle = true;
  std::size_t hidden_dim = 32;  // 0 disables the tanh encoder
  LdnConfig ldn;
  FeatureConfig features;

  bool operator==(const TrainConfig&) const = default;
};

/// Flat `key = value` lines; `#` starts a comment, blank lines are ignored,
/// unknown keys are an error. Keys: epochs, learning_rate, batch_size, l2,
/// seed, shuffle, hidden_dim, ldn_x, ldn_include_o, ldn_similarity_floor,
/// use_word, use_ldn, use_ortho, prefix_buckets, suffix_buckets, hash_seed.
TrainConfig parse_train_config(std::string_view text);
TrainConfig load_train_config(const std::string& path);
void validate(const TrainConfig& cfg);

/// A trained tagger plus everything needed to reproduce its features.
struct ModelArtifact {
  TagSet tagset = TagSet::wnut17();
  FeatureConfig features;
  LdnConfig ldn;
  LdnIndex index;
  CrfModel crf;
  std::uint64_t embedding_checksum = 0;
  std::size_t embedding_dim = 0;
  std::uint64_t training_seed = 0;

  bool operator==(const ModelArtifact&) const = default;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_nll)>;

/// Minibatch gradient descent on the exact CRF likelihood with L2 decay.
/// Deterministic for a fixed config, corpus, and embedding file: one RNG
/// stream seeded with cfg.seed drives initialization and epoch shuffles.
/// Forbidden transition scores stay pinned and take no updates or decay.
ModelArtifact train(const Dataset& data, const EmbeddingStore& store,
                    const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Raised when the embedding file at prediction time is not the file the
/// model was trained with (byte checksum differs).
class ChecksumMismatch : public std::runtime_error {
public:
  explicit ChecksumMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension mismatch always throws std::runtime_error; a checksum mismatch
/// throws ChecksumMismatch unless allow_checksum_mismatch.
void check_embeddings(const ModelArtifact& artifact, const EmbeddingStore& store,
                      bool allow_checksum_mismatch = false);

std::vector<BioTag> predict(const ModelArtifact& artifact, const EmbeddingStore& store,
                            const Sentence& sentence);
/// Copy of `input` with every tag replaced by the model's prediction.
Dataset predict_dataset(const ModelArtifact& artifact, const EmbeddingStore& store,
                        const Dataset& input);

std::vector<std::uint8_t> serialize_model(const ModelArtifact& artifact);
ModelArtifact deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_model(const std::string& path);

}  // namespace ldntag
