#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ldntag {

/// Closed inventory of entity categories, fixed when a dataset is loaded.
/// Order is significant: it fixes CRF tag indices and report row order.
class TagSet {
public:
  explicit TagSet(std::vector<std::string> categories);

  /// The six W-NUT-2017 categories.
  static TagSet wnut17();
  /// One category name per line, blank lines ignored.
  static TagSet from_file(const std::string& path);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> find(std::string_view category) const;

  bool operator==(const TagSet&) const = default;

private:
  std::vector<std::string> names_;
};

enum class BioKind : std::uint8_t { O, B, I };

struct BioTag {
  BioKind kind = BioKind::O;
  std::size_t category = 0;  // index into the TagSet; meaningful iff kind != O

  static BioTag o() { return {}; }
  static BioTag b(std::size_t cat) { return {BioKind::B, cat}; }
  static BioTag i(std::size_t cat) { return {BioKind::I, cat}; }

  bool operator==(const BioTag& other) const {
    if (kind != other.kind) return false;
    return kind == BioKind::O || category == other.category;
  }
};

std::string tag_to_string(const BioTag& tag, const TagSet& tagset);
BioTag tag_from_string(std::string_view text, const TagSet& tagset);

struct Token {
  std::string text;        // raw surface form, non-empty
  std::string normalized;  // lowercase letters and digits only, may be empty
  BioTag tag;

  bool operator==(const Token&) const = default;
};

Token make_token(std::string text, BioTag tag = BioTag::o());

struct Sentence {
  std::vector<Token> tokens;  // non-empty
  std::size_t id = 0;         // 0-based position in the dataset

  bool operator==(const Sentence&) const = default;
};

struct Dataset {
  std::vector<Sentence> sentences;
  TagSet tagset = TagSet::wnut17();

  bool operator==(const Dataset&) const = default;
};

struct EntitySpan {
  std::size_t sentence_id = 0;
  std::size_t start = 0;  // inclusive token index
  std::size_t end = 0;    // exclusive token index
  std::size_t category = 0;
  std::string surface;  // covered tokens joined by single spaces

  bool operator==(const EntitySpan&) const = default;
};

/// Lowercases and drops every byte that is not an ASCII letter or digit.
std::string normalize_token(std::string_view text);

/// Parses the tab-separated layout: `token<TAB>tag` per line, blank line
/// between sentences. Throws with a 1-based line number on malformed input.
Dataset parse_conll(std::string_view text, const TagSet& tagset);

/// Same layout but tags are ignored (or absent); every token comes back O.
Dataset parse_untagged(std::string_view text, const TagSet& tagset);

/// Inverse of parse_conll; each sentence is followed by one blank line.
std::string to_conll(const Dataset& d);

/// BIO decode with conll-style repair: a stray I-X opens a new span.
std::vector<EntitySpan> extract_spans(const std::vector<BioTag>& tags,
                                      std::size_t sentence_id,
                                      const std::vector<Token>& tokens);
std::vector<EntitySpan> extract_spans(const Sentence& s);

/// Sentence-level split: deterministic permutation from the seed, train gets
/// floor(n * train_fraction) sentences (clamped to [1, n-1]), both halves
/// keep the original relative order and are re-numbered densely.
std::pair<Dataset, Dataset> split_dataset(const Dataset& d, double train_fraction,
                                          std::uint64_t seed);

}  // namespace ldntag
