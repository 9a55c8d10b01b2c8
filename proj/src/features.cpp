#include "ldntag/features.hpp"

#include <stdexcept>

#include "ldntag/util.hpp"

namespace ldntag {

void validate(const FeatureConfig& cfg) {
  if (!cfg.use_word && !cfg.use_ldn && !cfg.use_ortho)
    throw std::runtime_error("feature config enables no blocks");
  if (cfg.prefix_buckets < 1 || cfg.suffix_buckets < 1)
    throw std::runtime_error("affix bucket counts must be >= 1");
}

std::size_t ortho_dim(const FeatureConfig& cfg) {
  return 12 + cfg.prefix_buckets + cfg.suffix_buckets;
}

std::size_t feature_dim(const FeatureConfig& cfg, std::size_t embedding_dim,
                        std::size_t ldn_slots) {
  std::size_t f = 0;
  if (cfg.use_word) f += embedding_dim;
  if (cfg.use_ldn) f += ldn_slots + 1;  // distribution + support
  if (cfg.use_ortho) f += ortho_dim(cfg);
  return f;
}

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::size_t length_bucket(std::size_t n) {
  if (n <= 1) return 0;
  if (n <= 3) return 1;
  if (n <= 6) return 2;
  if (n <= 10) return 3;
  return 4;
}

std::uint64_t affix_hash(char domain, std::string_view affix, std::uint64_t seed) {
  std::string keyed;
  keyed.reserve(affix.size() + 1);
  keyed.push_back(domain);
  keyed.append(affix);
  return fnv1a64(keyed, seed);
}

}  // namespace

std::vector<double> orthographic_features(const Token& token, const FeatureConfig& cfg) {
  validate(cfg);
  std::vector<double> v(ortho_dim(cfg), 0.0);
  const std::string& text = token.text;

  std::size_t upper = 0, lower = 0;
  bool has_digit = false, has_punct = false;
  for (char c : text) {
    if (is_upper(c)) ++upper;
    else if (is_lower(c)) ++lower;
    else if (is_digit(c)) has_digit = true;
    else has_punct = true;
  }
  std::size_t letters = upper + lower;

  std::size_t cap_class;
  if (letters == 0) cap_class = 4;                            // no-letters
  else if (upper == 0) cap_class = 0;                         // all-lower
  else if (lower == 0 && upper >= 2) cap_class = 2;           // all-caps
  else if (upper == 1 && is_upper(text[0])) cap_class = 1;    // init-cap
  else cap_class = 3;                                         // mixed
  v[cap_class] = 1.0;

  v[5] = has_digit ? 1.0 : 0.0;
  v[6] = has_punct ? 1.0 : 0.0;
  v[7 + length_bucket(text.size())] = 1.0;

  for (std::size_t len = 1; len <= 3 && len <= text.size(); ++len) {
    std::uint64_t hp = affix_hash('p', std::string_view(text).substr(0, len), cfg.hash_seed);
    v[12 + hp % cfg.prefix_buckets] = 1.0;
    std::uint64_t hs =
        affix_hash('s', std::string_view(text).substr(text.size() - len), cfg.hash_seed);
    v[12 + cfg.prefix_buckets + hs % cfg.suffix_buckets] = 1.0;
  }
  return v;
}

Matrix featurize_sentence(const Sentence& s, const EmbeddingStore& store,
                          const LdnIndex& index, const FeatureConfig& fcfg,
                          const LdnConfig& lcfg) {
  validate(fcfg);
  const std::size_t f = feature_dim(fcfg, store.dim(), index.num_slots());
  Matrix out(s.tokens.size(), f);

  for (std::size_t t = 0; t < s.tokens.size(); ++t) {
    const Token& tok = s.tokens[t];
    std::size_t off = 0;
    if (fcfg.use_word) {
      if (auto vec = store.lookup(tok.normalized))
        for (std::size_t j = 0; j < store.dim(); ++j) out(t, off + j) = (*vec)[j];
      off += store.dim();
    }
    if (fcfg.use_ldn) {
      LdnFeature ldn = ldn_vector(index, store, lcfg, tok);
      for (std::size_t j = 0; j < ldn.distribution.size(); ++j)
        out(t, off + j) = ldn.distribution[j];
      out(t, off + ldn.distribution.size()) = ldn.support ? 1.0 : 0.0;
      off += index.num_slots() + 1;
    }
    if (fcfg.use_ortho) {
      std::vector<double> ortho = orthographic_features(tok, fcfg);
      for (std::size_t j = 0; j < ortho.size(); ++j) out(t, off + j) = ortho[j];
      off += ortho.size();
    }
  }
  return out;
}

}  // namespace ldntag
