#pragma once

#include <cstdint>
#include <vector>

#include "ldntag/corpus.hpp"
#include "ldntag/embeddings.hpp"
#include "ldntag/ldn.hpp"
#include "ldntag/matrix.hpp"

namespace ldntag {

struct FeatureConfig {
  bool use_word = true;   // pretrained word vector of the normalized form
  bool use_ldn = true;    // neighbor tag distribution + support flag
  bool use_ortho = true;  // character-evidence block
  std::uint32_t prefix_buckets = 64;
  std::uint32_t suffix_buckets = 64;
  std::uint64_t hash_seed = 0;  // affix bucket hashing; stored in the model

  bool operator==(const FeatureConfig&) const = default;
};

/// Throws unless at least one block is enabled and bucket counts are >= 1.
void validate(const FeatureConfig& cfg);

/// 12 fixed slots + prefix_buckets + suffix_buckets.
std::size_t ortho_dim(const FeatureConfig& cfg);

/// Total row width for the given embedding dimension and LDN slot count
/// (categories + O). The LDN block carries one extra support slot.
std::size_t feature_dim(const FeatureConfig& cfg, std::size_t embedding_dim,
                        std::size_t ldn_slots);

/// Deterministic surface-form evidence, over bytes of the raw text:
///   [0..4]  capitalization class one-hot
///           {all-lower, init-cap, all-caps, mixed, no-letters}
///   [5]     contains an ASCII digit
///   [6]     contains a byte that is neither an ASCII letter nor digit
///   [7..11] length bucket one-hot {1, 2-3, 4-6, 7-10, >10}
///   [12..)  hashed prefixes of lengths 1-3 (multi-hot), then hashed
///           suffixes of lengths 1-3
std::vector<double> orthographic_features(const Token& token, const FeatureConfig& cfg);

/// Row t = [word block | LDN block | ortho block] for token t; blocks appear
/// in that order, each only when enabled. An out-of-vocabulary word block is
/// all zeros.
Matrix featurize_sentence(const Sentence& s, const EmbeddingStore& store,
                          const LdnIndex& index, const FeatureConfig& fcfg,
                          const LdnConfig& lcfg);

}  // namespace ldntag
