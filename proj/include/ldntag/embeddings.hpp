#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ldntag {

struct Neighbor {
  std::string token;
  double similarity = 0.0;  // cosine, in [-1, 1] up to rounding
};

/// Vocabulary-indexed dense vector table, immutable after load. Rows are
/// kept twice: as read, and L2-normalized (zero rows stay zero) so a cosine
/// query is one dot product per candidate.
class EmbeddingStore {
public:
  /// Text layout: `token v1 v2 ... vD` per line, single spaces. An optional
  /// first line `|V| D` (two integers) is skipped. Duplicate tokens keep the
  /// first occurrence and bump duplicate_count().
  static EmbeddingStore load(const std::string& path);
  static EmbeddingStore from_text(std::string_view text);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }

  std::optional<std::size_t> row_of(std::string_view token) const;
  std::optional<std::span<const double>> lookup(std::string_view token) const;
  const std::string& token(std::size_t row) const { return tokens_[row]; }

  std::span<const double> row(std::size_t r) const;
  std::span<const double> unit_row(std::size_t r) const;

  /// FNV-1a of the source file bytes; binds model artifacts to their file.
  std::uint64_t checksum() const { return checksum_; }
  std::size_t duplicate_count() const { return duplicates_; }

private:
  EmbeddingStore() = default;

  std::size_t dim_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<double> vectors_;       // |V| x dim, row-major
  std::vector<double> unit_vectors_;  // same shape, rows L2-normalized
  std::uint64_t checksum_ = 0;
  std::size_t duplicates_ = 0;
};

/// u.v / (|u||v|); 0 when either norm is 0. Throws on dimension mismatch.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Exact scan over `candidates` (distinct tokens, every one in the store).
/// Returns min(k, |candidates|) neighbors sorted by similarity descending,
/// ties by ascending token.
std::vector<Neighbor> knn(const EmbeddingStore& store,
                          const std::vector<std::string>& candidates,
                          std::span<const double> query, std::size_t k);

}  // namespace ldntag
