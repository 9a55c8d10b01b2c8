#include "ldntag/ldn.hpp"

#include <algorithm>
#include <stdexcept>

#include "ldntag/bytes.hpp"
#include "ldntag/util.hpp"

namespace ldntag {

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "and",  "are",  "as",   "at",   "be",   "but", "by",
      "for",  "from", "had",  "has",  "have", "he",   "her",  "his", "i",
      "if",   "in",   "is",   "it",   "its",  "me",   "my",   "no",  "not",
      "of",   "on",   "or",   "our",  "she",  "so",   "than", "that", "the",
      "their", "them", "they", "this", "to",   "was",  "we",   "were", "will",
      "with", "you",  "your"};
  return words;
}

std::set<std::string> load_stopwords(const std::string& path) {
  std::set<std::string> words;
  const std::string text = read_text_file(path);
  for (std::string_view line : split(text, '\n')) {
    std::string_view t = trim(line);
    if (!t.empty()) words.emplace(t);
  }
  return words;
}

std::uint64_t TagHistogram::total() const {
  std::uint64_t sum = 0;
  for (std::uint64_t c : counts) sum += c;
  return sum;
}

LdnIndex::LdnIndex(std::vector<std::string> category_order,
                   std::map<std::string, TagHistogram> entries)
    : category_order_(std::move(category_order)), entries_(std::move(entries)) {
  tokens_.reserve(entries_.size());
  for (const auto& [token, hist] : entries_) {
    if (hist.counts.size() != category_order_.size())
      throw std::runtime_error("histogram slot count mismatch for '" + token + "'");
    if (hist.total() == 0)
      throw std::runtime_error("empty histogram for '" + token + "'");
    tokens_.push_back(token);
  }
}

LdnIndex build_index(const Dataset& train, const EmbeddingStore& store,
                     const LdnConfig& cfg) {
  if (train.sentences.empty()) throw std::runtime_error("training set is empty");

  std::vector<std::string> order = train.tagset.names();
  order.push_back("O");
  const std::size_t slots = order.size();
  const std::size_t o_slot = slots - 1;

  std::map<std::string, TagHistogram> entries;
  for (const Sentence& s : train.sentences) {
    for (const Token& t : s.tokens) {
      const std::string& norm = t.normalized;
      if (norm.empty()) continue;
      if (cfg.stopwords.contains(norm)) continue;
      if (!store.row_of(norm)) continue;
      std::size_t slot;
      if (t.tag.kind == BioKind::O) {
        if (!cfg.include_o_category) continue;
        slot = o_slot;
      } else {
        slot = t.tag.category;
      }
      auto [it, inserted] = entries.try_emplace(norm);
      if (inserted) it->second.counts.assign(slots, 0);
      ++it->second.counts[slot];
    }
  }
  if (entries.empty())
    throw std::runtime_error(
        "LDN index is empty: no training token found in the embedding vocabulary");
  return LdnIndex(std::move(order), std::move(entries));
}

LdnFeature ldn_vector(const LdnIndex& index, const EmbeddingStore& store,
                      const LdnConfig& cfg, const Token& query) {
  if (index.size() == 0) throw std::runtime_error("LDN index is empty");
  const std::size_t slots = index.num_slots();
  LdnFeature feature{std::vector<double>(slots, 0.0), false};

  const std::string& norm = query.normalized;
  if (norm.empty() || cfg.stopwords.contains(norm)) return feature;
  auto row = store.row_of(norm);
  if (!row) return feature;

  auto neighbors = knn(store, index.tokens(), store.row(*row), cfg.x);
  std::vector<double> acc(slots, 0.0);
  for (const Neighbor& nb : neighbors) {
    double w = std::max(nb.similarity, cfg.similarity_floor);
    if (w <= 0.0) continue;
    const TagHistogram& hist = index.entries().at(nb.token);
    double total = static_cast<double>(hist.total());
    for (std::size_t s = 0; s < slots; ++s)
      acc[s] += w * static_cast<double>(hist.counts[s]) / total;
  }
  double sum = 0.0;
  for (double v : acc) sum += v;
  if (sum <= 0.0) return feature;

  for (std::size_t s = 0; s < slots; ++s) feature.distribution[s] = acc[s] / sum;
  feature.support = true;
  return feature;
}

namespace {
constexpr std::uint32_t kIndexVersion = 1;
}

std::vector<std::uint8_t> persist_index(const LdnIndex& index) {
  ByteWriter w;
  w.u32(kIndexVersion);
  w.u32(static_cast<std::uint32_t>(index.num_slots()));
  for (const auto& name : index.category_order()) w.str(name);
  w.u64(index.size());
  for (const auto& [token, hist] : index.entries()) {
    w.str(token);
    for (std::uint64_t c : hist.counts) w.u64(c);
  }
  return w.take();
}

LdnIndex restore_index(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::uint32_t version = r.u32();
  if (version != kIndexVersion)
    throw std::runtime_error("unsupported LDN index version " + std::to_string(version));
  std::uint32_t slots = r.u32();
  if (slots < 2) throw std::runtime_error("corrupt LDN index: too few slots");
  std::vector<std::string> order;
  order.reserve(slots);
  for (std::uint32_t i = 0; i < slots; ++i) order.push_back(r.str());
  std::uint64_t n = r.u64();
  if (n == 0) throw std::runtime_error("corrupt LDN index: no entries");
  std::map<std::string, TagHistogram> entries;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string token = r.str();
    TagHistogram hist;
    hist.counts.reserve(slots);
    for (std::uint32_t s = 0; s < slots; ++s) hist.counts.push_back(r.u64());
    if (hist.total() == 0)
      throw std::runtime_error("corrupt LDN index: empty histogram for '" + token + "'");
    entries.emplace(std::move(token), std::move(hist));
  }
  if (!r.done()) throw std::runtime_error("corrupt LDN index: trailing bytes");
  return LdnIndex(std::move(order), std::move(entries));
}

}  // namespace ldntag
