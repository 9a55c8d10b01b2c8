#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ldntag/corpus.hpp"
#include "ldntag/embeddings.hpp"

namespace ldntag {

/// Configuration of the local-distance-neighbor feature.
struct LdnConfig {
  std::size_t x = 5;  // neighbor count per query
  std::set<std::string> stopwords;
  bool include_o_category = true;  // index non-entity occurrences under an O slot
  double similarity_floor = 0.0;   // neighbor weight = max(similarity, floor)

  bool operator==(const LdnConfig&) const = default;
};

/// Small English function-word list; also shipped as data/stopwords.txt.
const std::set<std::string>& default_stopwords();
/// One token per line, blank lines ignored.
std::set<std::string> load_stopwords(const std::string& path);

struct TagHistogram {
  std::vector<std::uint64_t> counts;  // one slot per category_order entry

  std::uint64_t total() const;
  bool operator==(const TagHistogram&) const = default;
};

/// Per-token tag histograms accumulated over the training set. Slot order is
/// the tag-set categories followed by O. Every indexed token was present in
/// the embedding store when the index was built.
class LdnIndex {
public:
  LdnIndex() = default;
  LdnIndex(std::vector<std::string> category_order,
           std::map<std::string, TagHistogram> entries);

  const std::vector<std::string>& category_order() const { return category_order_; }
  std::size_t num_slots() const { return category_order_.size(); }
  const std::map<std::string, TagHistogram>& entries() const { return entries_; }
  /// Sorted index keys; the candidate set for neighbor queries.
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return entries_.size(); }

  bool operator==(const LdnIndex& other) const {
    return category_order_ == other.category_order_ && entries_ == other.entries_;
  }

private:
  std::vector<std::string> category_order_;  // categories ++ ["O"]
  std::map<std::string, TagHistogram> entries_;
  std::vector<std::string> tokens_;
};

/// Aggregated neighbor tag distribution for one query token.
struct LdnFeature {
  std::vector<double> distribution;  // over category_order; sums to 1 iff support
  bool support = false;

  bool operator==(const LdnFeature&) const = default;
};

/// Indexes every normalized training-token occurrence that is not empty, not
/// a stop word, and present in the store. B-X and I-X both count as X; O
/// counts under the O slot when cfg.include_o_category. Throws when nothing
/// qualifies.
LdnIndex build_index(const Dataset& train, const EmbeddingStore& store,
                     const LdnConfig& cfg);

/// Retrieves the cfg.x most similar indexed tokens and averages their
/// per-neighbor tag distributions, weighted by max(similarity, floor); zero
/// total weight (or an unusable query) gives all-zeros with support=false.
LdnFeature ldn_vector(const LdnIndex& index, const EmbeddingStore& store,
                      const LdnConfig& cfg, const Token& query);

std::vector<std::uint8_t> persist_index(const LdnIndex& index);
LdnIndex restore_index(std::span<const std::uint8_t> bytes);

}  // namespace ldntag
