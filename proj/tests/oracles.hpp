#pragma once

// Brute-force references the fast implementations are checked against.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ldntag/crf.hpp"
#include "ldntag/embeddings.hpp"

namespace oracle {

inline double path_score(const ldntag::EmissionMatrix& e, const ldntag::CrfModel& m,
                         const std::vector<std::size_t>& path) {
  double s = m.start_scores[path[0]] + e(0, path[0]);
  for (std::size_t t = 1; t < path.size(); ++t)
    s += m.transitions(path[t - 1], path[t]) + e(t, path[t]);
  return s + m.stop_scores[path.back()];
}

template <typename Fn>
inline void for_each_path(std::size_t n, std::size_t num_tags, Fn&& fn) {
  std::vector<std::size_t> path(n, 0);
  while (true) {
    fn(path);
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++path[pos] < num_tags) break;
      path[pos] = 0;
      if (pos == 0) return;
    }
  }
}

/// log-sum-exp over every one of the T^n path scores.
inline double log_partition(const ldntag::EmissionMatrix& e, const ldntag::CrfModel& m) {
  std::vector<double> scores;
  for_each_path(e.rows(), m.num_tags,
                [&](const std::vector<std::size_t>& p) { scores.push_back(path_score(e, m, p)); });
  double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - mx);
  return mx + std::log(sum);
}

// True when a's reversed sequence is lexicographically smaller than b's;
// the same order the backtracking tie rule (lowest tag index per step) picks.
inline bool reversed_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

inline ldntag::ViterbiResult best_path(const ldntag::EmissionMatrix& e,
                                       const ldntag::CrfModel& m) {
  ldntag::ViterbiResult best;
  best.score = -std::numeric_limits<double>::infinity();
  for_each_path(e.rows(), m.num_tags, [&](const std::vector<std::size_t>& p) {
    double s = path_score(e, m, p);
    if (s > best.score || (s == best.score && reversed_less(p, best.tags))) {
      best.score = s;
      best.tags = p;
    }
  });
  return best;
}

/// Scans every candidate with a direct cosine; sorts by (similarity desc,
/// token asc) without partial_sort or precomputed unit rows.
inline std::vector<ldntag::Neighbor> knn(const ldntag::EmbeddingStore& store,
                                         std::vector<std::string> candidates,
                                         std::span<const double> query, std::size_t k) {
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::vector<ldntag::Neighbor> all;
  for (const auto& token : candidates) {
    auto vec = store.lookup(token);
    all.push_back({token, ldntag::cosine_similarity(*vec, query)});
  }
  std::sort(all.begin(), all.end(), [](const ldntag::Neighbor& a, const ldntag::Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.token < b.token;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

/// Central difference of the sequence NLL with respect to one parameter.
inline double fd_gradient(ldntag::CrfModel& m, double* param, const ldntag::Matrix& feats,
                          std::span<const std::size_t> gold, double step) {
  const double saved = *param;
  *param = saved + step;
  double plus = ldntag::nll_and_gradient(m, feats, gold).first;
  *param = saved - step;
  double minus = ldntag::nll_and_gradient(m, feats, gold).first;
  *param = saved;
  return (plus - minus) / (2.0 * step);
}

}  // namespace oracle
