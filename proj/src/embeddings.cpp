#include "ldntag/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "ldntag/util.hpp"

namespace ldntag {

namespace {

bool parse_u64(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_f64(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

EmbeddingStore EmbeddingStore::load(const std::string& path) {
  return from_text(read_text_file(path));
}

EmbeddingStore EmbeddingStore::from_text(std::string_view text) {
  EmbeddingStore store;
  store.checksum_ = fnv1a64(text);

  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& line : lines)
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  std::size_t first_data = 0;
  if (!lines.empty()) {
    auto fields = split(lines[0], ' ');
    std::uint64_t a = 0, b = 0;
    if (fields.size() == 2 && parse_u64(fields[0], a) && parse_u64(fields[1], b))
      first_data = 1;  // header `|V| D`
  }

  for (std::size_t li = first_data; li < lines.size(); ++li) {
    const std::string line_tag = "line " + std::to_string(li + 1) + ": ";
    if (lines[li].empty()) throw std::runtime_error(line_tag + "empty line");
    auto fields = split(lines[li], ' ');
    if (fields[0].empty()) throw std::runtime_error(line_tag + "empty token");
    if (fields.size() < 2) throw std::runtime_error(line_tag + "no vector components");
    std::size_t d = fields.size() - 1;
    if (store.dim_ == 0) {
      store.dim_ = d;
    } else if (d != store.dim_) {
      throw std::runtime_error(line_tag + "expected " + std::to_string(store.dim_) +
                               " components, got " + std::to_string(d));
    }
    std::string token(fields[0]);
    if (store.vocab_.contains(token)) {
      ++store.duplicates_;
      continue;
    }
    for (std::size_t j = 1; j < fields.size(); ++j) {
      double v = 0.0;
      if (!parse_f64(fields[j], v))
        throw std::runtime_error(line_tag + "bad number '" + std::string(fields[j]) + "'");
      store.vectors_.push_back(v);
    }
    store.vocab_.emplace(token, store.tokens_.size());
    store.tokens_.push_back(std::move(token));
  }
  if (store.tokens_.empty()) throw std::runtime_error("no embedding rows");

  store.unit_vectors_ = store.vectors_;
  for (std::size_t r = 0; r < store.tokens_.size(); ++r) {
    double* row = store.unit_vectors_.data() + r * store.dim_;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < store.dim_; ++j) norm2 += row[j] * row[j];
    if (norm2 > 0.0) {
      double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t j = 0; j < store.dim_; ++j) row[j] *= inv;
    }
  }
  return store;
}

std::optional<std::size_t> EmbeddingStore::row_of(std::string_view token) const {
  auto it = vocab_.find(std::string(token));
  if (it == vocab_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::span<const double>> EmbeddingStore::lookup(std::string_view token) const {
  auto r = row_of(token);
  if (!r) return std::nullopt;
  return row(*r);
}

std::span<const double> EmbeddingStore::row(std::size_t r) const {
  return {vectors_.data() + r * dim_, dim_};
}

std::span<const double> EmbeddingStore::unit_row(std::size_t r) const {
  return {unit_vectors_.data() + r * dim_, dim_};
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::vector<Neighbor> knn(const EmbeddingStore& store,
                          const std::vector<std::string>& candidates,
                          std::span<const double> query, std::size_t k) {
  if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
  if (query.size() != store.dim())
    throw std::invalid_argument("knn: query dimension mismatch");

  struct Entry {
    const std::string* token;
    std::size_t row;
    double sim;
  };
  std::vector<Entry> entries;
  entries.reserve(candidates.size());
  for (const std::string& c : candidates) {
    auto r = store.row_of(c);
    if (!r) throw std::runtime_error("knn candidate not in vocabulary: '" + c + "'");
    entries.push_back({&c, *r, 0.0});
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return *a.token < *b.token; });
  entries.erase(std::unique(entries.begin(), entries.end(),
                            [](const Entry& a, const Entry& b) { return *a.token == *b.token; }),
                entries.end());

  double qnorm2 = 0.0;
  for (double x : query) qnorm2 += x * x;
  if (qnorm2 > 0.0) {
    std::vector<double> unit_query(query.begin(), query.end());
    double inv = 1.0 / std::sqrt(qnorm2);
    for (double& x : unit_query) x *= inv;
    for (Entry& e : entries) {
      auto row = store.unit_row(e.row);
      double dot = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) dot += row[j] * unit_query[j];
      e.sim = dot;
    }
  }
  // zero query: similarities stay 0, order falls back to the token tie rule

  std::size_t take = std::min(k, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(take),
                    entries.end(), [](const Entry& a, const Entry& b) {
                      if (a.sim != b.sim) return a.sim > b.sim;
                      return *a.token < *b.token;
                    });
  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({*entries[i].token, entries[i].sim});
  return out;
}

}  // namespace ldntag
