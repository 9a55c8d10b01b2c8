#include "ldntag/eval.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace ldntag {

PRF make_prf(std::size_t tp, std::size_t n_pred, std::size_t n_gold) {
  PRF r;
  r.tp = tp;
  r.n_pred = n_pred;
  r.n_gold = n_gold;
  r.precision = n_pred == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_pred);
  r.recall = n_gold == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_gold);
  double denom = r.precision + r.recall;
  r.f1 = denom == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / denom;
  return r;
}

void check_alignment(const Dataset& gold, const Dataset& pred) {
  if (!(gold.tagset == pred.tagset))
    throw std::runtime_error("gold and prediction tag sets differ");
  if (gold.sentences.size() != pred.sentences.size())
    throw std::runtime_error("gold has " + std::to_string(gold.sentences.size()) +
                             " sentences, predictions have " +
                             std::to_string(pred.sentences.size()));
  for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& g = gold.sentences[i];
    const auto& p = pred.sentences[i];
    if (g.tokens.size() != p.tokens.size())
      throw std::runtime_error("corpora diverge at sentence " + std::to_string(i) +
                               ": token counts " + std::to_string(g.tokens.size()) +
                               " vs " + std::to_string(p.tokens.size()));
    for (std::size_t t = 0; t < g.tokens.size(); ++t)
      if (g.tokens[t].text != p.tokens[t].text)
        throw std::runtime_error("corpora diverge at sentence " + std::to_string(i) +
                                 ": token " + std::to_string(t) + " is '" +
                                 g.tokens[t].text + "' vs '" + p.tokens[t].text + "'");
  }
}

namespace {

std::vector<EntitySpan> all_spans(const Dataset& d) {
  std::vector<EntitySpan> spans;
  for (const auto& s : d.sentences) {
    auto extracted = extract_spans(s);
    spans.insert(spans.end(), extracted.begin(), extracted.end());
  }
  return spans;
}

MetricBlock block_from_counts(std::size_t num_categories,
                              const std::vector<std::size_t>& tp,
                              const std::vector<std::size_t>& n_pred,
                              const std::vector<std::size_t>& n_gold) {
  MetricBlock block;
  std::size_t tp_sum = 0, pred_sum = 0, gold_sum = 0;
  for (std::size_t c = 0; c < num_categories; ++c) {
    block.per_category.push_back(make_prf(tp[c], n_pred[c], n_gold[c]));
    tp_sum += tp[c];
    pred_sum += n_pred[c];
    gold_sum += n_gold[c];
  }
  block.total = make_prf(tp_sum, pred_sum, gold_sum);
  return block;
}

}  // namespace

MetricBlock entity_f1(const Dataset& gold, const Dataset& pred) {
  check_alignment(gold, pred);
  const std::size_t nc = gold.tagset.size();
  std::vector<std::size_t> tp(nc, 0), n_pred(nc, 0), n_gold(nc, 0);

  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;
  std::map<Key, std::size_t> gold_spans;
  for (const auto& span : all_spans(gold)) {
    ++n_gold[span.category];
    ++gold_spans[{span.sentence_id, span.start, span.end, span.category}];
  }
  for (const auto& span : all_spans(pred)) {
    ++n_pred[span.category];
    auto it = gold_spans.find({span.sentence_id, span.start, span.end, span.category});
    if (it != gold_spans.end() && it->second > 0) {
      --it->second;
      ++tp[span.category];
    }
  }
  return block_from_counts(nc, tp, n_pred, n_gold);
}

MetricBlock surface_f1(const Dataset& gold, const Dataset& pred, bool fold_case) {
  check_alignment(gold, pred);
  const std::size_t nc = gold.tagset.size();
  std::vector<std::size_t> tp(nc, 0), n_pred(nc, 0), n_gold(nc, 0);

  auto form = [fold_case](std::string s) {
    if (fold_case)
      for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
  };
  std::set<std::pair<std::string, std::size_t>> gold_forms, pred_forms;
  for (const auto& span : all_spans(gold))
    gold_forms.insert({form(span.surface), span.category});
  for (const auto& span : all_spans(pred))
    pred_forms.insert({form(span.surface), span.category});

  for (const auto& [surface, cat] : gold_forms) ++n_gold[cat];
  for (const auto& [surface, cat] : pred_forms) {
    ++n_pred[cat];
    if (gold_forms.count({surface, cat})) ++tp[cat];
  }
  return block_from_counts(nc, tp, n_pred, n_gold);
}

ScoreReport score(const Dataset& gold, const Dataset& pred, bool fold_case) {
  ScoreReport report;
  report.entity = entity_f1(gold, pred);
  report.surface = surface_f1(gold, pred, fold_case);
  return report;
}

namespace {

void append_row(std::string& out, const std::string& label, const PRF& ent,
                const PRF& surf) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-16s %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f\n",
                label.c_str(), 100.0 * ent.precision, 100.0 * ent.recall, 100.0 * ent.f1,
                100.0 * surf.precision, 100.0 * surf.recall, 100.0 * surf.f1);
  out += buf;
}

void append_kv(std::string& out, const std::string& prefix, const PRF& prf) {
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%s.tp = %zu\n", prefix.c_str(), prf.tp);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%s.pred = %zu\n", prefix.c_str(), prf.n_pred);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%s.gold = %zu\n", prefix.c_str(), prf.n_gold);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%s.precision = %.6f\n", prefix.c_str(), prf.precision);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%s.recall = %.6f\n", prefix.c_str(), prf.recall);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%s.f1 = %.6f\n", prefix.c_str(), prf.f1);
  out += buf;
}

}  // namespace

std::string render_report(const ScoreReport& report, const TagSet& tagset) {
  if (report.entity.per_category.size() != tagset.size() ||
      report.surface.per_category.size() != tagset.size())
    throw std::runtime_error("report/tag set size mismatch");
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-16s %7s %7s %7s %7s %7s %7s\n", "category", "ent.p",
                "ent.r", "ent.f1", "surf.p", "surf.r", "surf.f1");
  out += buf;
  for (std::size_t c = 0; c < tagset.size(); ++c)
    append_row(out, tagset.name(c), report.entity.per_category[c],
               report.surface.per_category[c]);
  append_row(out, "total", report.entity.total, report.surface.total);
  return out;
}

std::string report_key_values(const ScoreReport& report, const TagSet& tagset) {
  if (report.entity.per_category.size() != tagset.size() ||
      report.surface.per_category.size() != tagset.size())
    throw std::runtime_error("report/tag set size mismatch");
  std::string out;
  for (std::size_t c = 0; c < tagset.size(); ++c) {
    append_kv(out, tagset.name(c) + ".entity", report.entity.per_category[c]);
    append_kv(out, tagset.name(c) + ".surface", report.surface.per_category[c]);
  }
  append_kv(out, "total.entity", report.entity.total);
  append_kv(out, "total.surface", report.surface.total);
  return out;
}

}  // namespace ldntag
