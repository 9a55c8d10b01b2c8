#include <random>
#include <string>

#include "doctest.h"
#include "ldntag/eval.hpp"
#include "ldntag/util.hpp"

using namespace ldntag;

namespace {

const TagSet& two_cats() {
  static TagSet ts({"person", "location"});
  return ts;
}

Dataset ds(const std::string& conll) { return parse_conll(conll, two_cats()); }

}  // namespace

TEST_CASE("precision, recall, and f1 conventions") {
  PRF perfect = make_prf(3, 3, 3);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  PRF nothing_predicted = make_prf(0, 0, 5);
  CHECK(nothing_predicted.precision == 0.0);
  CHECK(nothing_predicted.recall == 0.0);
  CHECK(nothing_predicted.f1 == 0.0);

  PRF no_gold = make_prf(0, 4, 0);
  CHECK(no_gold.precision == 0.0);
  CHECK(no_gold.recall == 0.0);
  CHECK(no_gold.f1 == 0.0);

  PRF half = make_prf(1, 2, 2);
  CHECK(half.precision == 0.5);
  CHECK(half.recall == 0.5);
  CHECK(half.f1 == doctest::Approx(0.5));

  PRF skewed = make_prf(2, 4, 2);
  CHECK(skewed.precision == 0.5);
  CHECK(skewed.recall == 1.0);
  CHECK(skewed.f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("entity scores require exact span and category matches") {
  Dataset gold = ds(
      "Alice\tB-person\n.\tO\n\n"
      "New\tB-location\nYork\tI-location\nrocks\tO\n");
  Dataset pred = ds(
      "Alice\tB-person\n.\tO\n\n"
      "New\tB-location\nYork\tO\nrocks\tO\n");  // span truncated

  MetricBlock entity = entity_f1(gold, pred);
  CHECK(entity.per_category[0].tp == 1);  // person
  CHECK(entity.per_category[0].f1 == 1.0);
  CHECK(entity.per_category[1].tp == 0);  // location: [0,2) vs [0,1)
  CHECK(entity.per_category[1].n_pred == 1);
  CHECK(entity.per_category[1].n_gold == 1);
  CHECK(entity.total.tp == 1);
  CHECK(entity.total.n_pred == 2);
  CHECK(entity.total.n_gold == 2);
  CHECK(entity.total.precision == 0.5);
  CHECK(entity.total.f1 == doctest::Approx(0.5));
}

TEST_CASE("category confusion counts as a miss on both sides") {
  Dataset gold = ds("Paris\tB-location\n");
  Dataset pred = ds("Paris\tB-person\n");
  MetricBlock entity = entity_f1(gold, pred);
  CHECK(entity.per_category[0].n_pred == 1);
  CHECK(entity.per_category[0].tp == 0);
  CHECK(entity.per_category[1].n_gold == 1);
  CHECK(entity.per_category[1].tp == 0);
  CHECK(entity.total.f1 == 0.0);
}

TEST_CASE("repeated spans must each be matched") {
  Dataset gold = ds("Bob\tB-person\nmet\tO\nBob\tB-person\n");
  Dataset one_hit = ds("Bob\tB-person\nmet\tO\nBob\tO\n");
  MetricBlock entity = entity_f1(gold, one_hit);
  CHECK(entity.total.tp == 1);
  CHECK(entity.total.n_gold == 2);
  CHECK(entity.total.recall == 0.5);
}

TEST_CASE("surface scores deduplicate (surface, category) pairs") {
  Dataset gold = ds(
      "Bob\tB-person\nmet\tO\nBob\tB-person\n\n"
      "Bob\tB-person\n");
  Dataset pred = ds(
      "Bob\tB-person\nmet\tO\nBob\tO\n\n"
      "Bob\tO\n");

  MetricBlock surface = surface_f1(gold, pred);
  CHECK(surface.per_category[0].n_gold == 1);  // "Bob" counted once
  CHECK(surface.per_category[0].n_pred == 1);
  CHECK(surface.per_category[0].tp == 1);
  CHECK(surface.per_category[0].f1 == 1.0);
}

TEST_CASE("surface matching is case-sensitive") {
  Dataset gold = ds("Paris\tB-location\n");
  Dataset pred = ds("Paris\tO\n");
  // prediction tags nothing: no surface pairs at all
  MetricBlock surface = surface_f1(gold, pred);
  CHECK(surface.total.n_pred == 0);
  CHECK(surface.total.precision == 0.0);

  Dataset gold2 = ds("PARIS\tB-location\n\nParis\tB-location\n");
  Dataset pred2 = ds("PARIS\tB-location\n\nParis\tO\n");
  MetricBlock surface2 = surface_f1(gold2, pred2);
  CHECK(surface2.per_category[1].n_gold == 2);  // two distinct casings
  CHECK(surface2.per_category[1].tp == 1);

  MetricBlock folded = surface_f1(gold2, pred2, /*fold_case=*/true);
  CHECK(folded.per_category[1].n_gold == 1);  // casings merge
  CHECK(folded.per_category[1].tp == 1);
  CHECK(folded.per_category[1].f1 == 1.0);
}

TEST_CASE("a perfect prediction scores 1.0 everywhere it has support") {
  Dataset gold = ds(
      "Alice\tB-person\nvisited\tO\nNew\tB-location\nYork\tI-location\n\n"
      "Bob\tB-person\n");
  ScoreReport report = score(gold, gold);
  CHECK(report.entity.total.f1 == 1.0);
  CHECK(report.surface.total.f1 == 1.0);
  CHECK(report.entity.per_category[0].f1 == 1.0);
  CHECK(report.entity.per_category[1].f1 == 1.0);
}

TEST_CASE("misaligned corpora are rejected with the divergent sentence") {
  Dataset gold = ds("a\tO\n\nb\tO\n");
  Dataset fewer = ds("a\tO\n");
  CHECK_THROWS_WITH(score(gold, fewer), "gold has 2 sentences, predictions have 1");

  Dataset other_tokens = ds("a\tO\n\nc\tO\n");
  CHECK_THROWS_WITH(score(gold, other_tokens),
                    "corpora diverge at sentence 1: token 0 is 'b' vs 'c'");

  Dataset longer = ds("a\tO\nx\tO\n\nb\tO\n");
  CHECK_THROWS_WITH(score(gold, longer),
                    "corpora diverge at sentence 0: token counts 1 vs 2");

  Dataset other_tagset = parse_conll("a\tO\n\nb\tO\n", TagSet({"person"}));
  CHECK_THROWS_WITH(score(gold, other_tagset), "gold and prediction tag sets differ");
}

TEST_CASE("metrics stay bounded under random taggings") {
  std::mt19937_64 rng(17);
  const TagSet& ts = two_cats();
  const std::size_t t_count = 5;

  auto random_dataset = [&](std::size_t n_sentences, std::mt19937_64& r) {
    Dataset d{{}, ts};
    for (std::size_t i = 0; i < n_sentences; ++i) {
      Sentence s;
      std::size_t len = 1 + uniform_below(r, 6);
      for (std::size_t t = 0; t < len; ++t) {
        std::size_t tag_id = uniform_below(r, t_count);
        BioTag tag = tag_id == 0
                         ? BioTag::o()
                         : (tag_id % 2 == 1 ? BioTag::b((tag_id - 1) / 2)
                                            : BioTag::i((tag_id - 1) / 2));
        s.tokens.push_back(make_token("t" + std::to_string(uniform_below(r, 4)), tag));
      }
      s.id = d.sentences.size();
      d.sentences.push_back(s);
    }
    return d;
  };

  for (int trial = 0; trial < 40; ++trial) {
    std::size_t n = 1 + uniform_below(rng, 5);
    Dataset gold = random_dataset(n, rng);
    Dataset pred = gold;
    for (auto& s : pred.sentences)
      for (auto& tok : s.tokens) {
        std::size_t tag_id = uniform_below(rng, t_count);
        tok.tag = tag_id == 0 ? BioTag::o()
                              : (tag_id % 2 == 1 ? BioTag::b((tag_id - 1) / 2)
                                                 : BioTag::i((tag_id - 1) / 2));
      }
    ScoreReport report = score(gold, pred);
    for (const MetricBlock* block : {&report.entity, &report.surface}) {
      std::size_t tp_sum = 0, pred_sum = 0, gold_sum = 0;
      for (const PRF& prf : block->per_category) {
        CHECK(prf.tp <= prf.n_pred);
        CHECK(prf.tp <= prf.n_gold);
        CHECK(prf.precision >= 0.0);
        CHECK(prf.precision <= 1.0);
        CHECK(prf.recall >= 0.0);
        CHECK(prf.recall <= 1.0);
        CHECK(prf.f1 >= 0.0);
        CHECK(prf.f1 <= 1.0);
        tp_sum += prf.tp;
        pred_sum += prf.n_pred;
        gold_sum += prf.n_gold;
      }
      CHECK(block->total.tp == tp_sum);
      CHECK(block->total.n_pred == pred_sum);
      CHECK(block->total.n_gold == gold_sum);
    }
  }
}

TEST_CASE("rendered report is a fixed-width table in tag-set order") {
  Dataset gold = ds("Alice\tB-person\n");
  ScoreReport report = score(gold, gold);
  std::string table = render_report(report, two_cats());

  auto lines = split(table, '\n');
  REQUIRE(lines.size() == 5);  // header, person, location, total, trailing empty
  CHECK(lines[0].find("category") == 0);
  CHECK(lines[0].find("ent.f1") != std::string::npos);
  CHECK(lines[0].find("surf.f1") != std::string::npos);
  CHECK(lines[1].find("person") == 0);
  CHECK(lines[2].find("location") == 0);
  CHECK(lines[3].find("total") == 0);
  CHECK(lines[1].find("100.00") != std::string::npos);
  CHECK(lines[2].find("0.00") != std::string::npos);
  for (std::size_t i = 1; i < 4; ++i) CHECK(lines[i].size() == lines[0].size());
}

TEST_CASE("key-value report carries counts and six-decimal scores") {
  Dataset gold = ds("Alice\tB-person\n");
  ScoreReport report = score(gold, gold);
  std::string kv = report_key_values(report, two_cats());
  CHECK(kv.find("person.entity.tp = 1\n") != std::string::npos);
  CHECK(kv.find("person.entity.f1 = 1.000000\n") != std::string::npos);
  CHECK(kv.find("location.surface.gold = 0\n") != std::string::npos);
  CHECK(kv.find("total.entity.precision = 1.000000\n") != std::string::npos);
  CHECK(kv.find("total.surface.f1 = 1.000000\n") != std::string::npos);
}
