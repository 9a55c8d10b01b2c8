#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ldntag/corpus.hpp"

namespace ldntag {

struct PRF {
  std::size_t tp = 0;
  std::size_t n_pred = 0;
  std::size_t n_gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

PRF make_prf(std::size_t tp, std::size_t n_pred, std::size_t n_gold);

struct MetricBlock {
  std::vector<PRF> per_category;  // tag-set order
  PRF total;
};

struct ScoreReport {
  MetricBlock entity;
  MetricBlock surface;
};

// Throws when the two corpora do not line up token for token; the message
// names the first divergent sentence.
void check_alignment(const Dataset& gold, const Dataset& pred);

// Span-level scores: a predicted entity counts only when sentence, start,
// end, and category all match a gold entity.
MetricBlock entity_f1(const Dataset& gold, const Dataset& pred);

// Surface-form scores over unique (surface, category) pairs. Comparison is
// case-sensitive; fold_case ASCII-lowercases surfaces first.
MetricBlock surface_f1(const Dataset& gold, const Dataset& pred, bool fold_case = false);

ScoreReport score(const Dataset& gold, const Dataset& pred, bool fold_case = false);

std::string render_report(const ScoreReport& report, const TagSet& tagset);
std::string report_key_values(const ScoreReport& report, const TagSet& tagset);

}  // namespace ldntag
