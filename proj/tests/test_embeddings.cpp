#include <cmath>
#include <vector>

#include "doctest.h"
#include "ldntag/embeddings.hpp"
#include "ldntag/util.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace ldntag;

TEST_CASE("from_text parses rows and detects an optional header") {
  EmbeddingStore plain = EmbeddingStore::from_text("a 1 2\nb 3 4\n");
  CHECK(plain.size() == 2);
  CHECK(plain.dim() == 2);

  EmbeddingStore with_header = EmbeddingStore::from_text("2 2\na 1 2\nb 3 4\n");
  CHECK(with_header.size() == 2);
  CHECK(with_header.row_of("a") == 0);
  CHECK(!with_header.row_of("2").has_value());

  // a first line with anything but two integers is data
  EmbeddingStore not_header = EmbeddingStore::from_text("2 2 2\na 1 2\n");
  CHECK(not_header.size() == 2);
  CHECK(not_header.dim() == 2);
  CHECK(not_header.row_of("2").has_value());

  EmbeddingStore word_count = EmbeddingStore::from_text("b 7\nc 8\n");
  CHECK(word_count.size() == 2);
  CHECK(word_count.dim() == 1);
}

TEST_CASE("from_text reports malformed rows with line numbers") {
  CHECK_THROWS_WITH(EmbeddingStore::from_text("a 1 2\nb 3\n"),
                    "line 2: expected 2 components, got 1");
  CHECK_THROWS_WITH(EmbeddingStore::from_text("a 1 2\n\nb 3 4\n"), "line 2: empty line");
  CHECK_THROWS_WITH(EmbeddingStore::from_text("a 1 oops\n"), "line 1: bad number 'oops'");
  CHECK_THROWS_WITH(EmbeddingStore::from_text("a\n"), "line 1: no vector components");
  CHECK_THROWS_WITH(EmbeddingStore::from_text(""), "no embedding rows");
  CHECK_THROWS_WITH(EmbeddingStore::from_text("5 12\n"), "no embedding rows");
}

TEST_CASE("duplicate tokens keep the first row") {
  EmbeddingStore store = EmbeddingStore::from_text("a 1 0\na 0 1\nb 0 2\n");
  CHECK(store.size() == 2);
  CHECK(store.duplicate_count() == 1);
  auto vec = store.lookup("a");
  REQUIRE(vec.has_value());
  CHECK((*vec)[0] == 1.0);
  CHECK((*vec)[1] == 0.0);
}

TEST_CASE("checksum binds a store to its exact source bytes") {
  std::string text = "a 1 2\nb 3 4\n";
  EmbeddingStore store = EmbeddingStore::from_text(text);
  CHECK(store.checksum() == fnv1a64(text));
  CHECK(EmbeddingStore::from_text("a 1 2\nb 3 5\n").checksum() != store.checksum());
}

TEST_CASE("unit rows are L2-normalized, zero rows stay zero") {
  EmbeddingStore store = EmbeddingStore::from_text("a 3 4\nz 0 0\n");
  auto unit = store.unit_row(0);
  CHECK(unit[0] == doctest::Approx(0.6));
  CHECK(unit[1] == doctest::Approx(0.8));
  auto zero = store.unit_row(1);
  CHECK(zero[0] == 0.0);
  CHECK(zero[1] == 0.0);
}

TEST_CASE("cosine similarity conventions") {
  std::vector<double> x = {1, 0}, y = {0, 1}, nx = {-2, 0}, zero = {0, 0};
  CHECK(cosine_similarity(x, x) == doctest::Approx(1.0));
  CHECK(cosine_similarity(x, y) == doctest::Approx(0.0));
  CHECK(cosine_similarity(x, nx) == doctest::Approx(-1.0));
  CHECK(cosine_similarity(x, zero) == 0.0);
  CHECK(cosine_similarity(zero, zero) == 0.0);
  std::vector<double> wide = {1, 2, 3};
  CHECK_THROWS_AS(cosine_similarity(x, wide), std::invalid_argument);
}

TEST_CASE("knn ranks by similarity with token ties ascending") {
  EmbeddingStore store =
      EmbeddingStore::from_text("up 0 1\nright 1 0\ndiag 1 1\nmirror 0 2\n");
  std::vector<std::string> cands = {"up", "right", "diag", "mirror"};
  std::vector<double> query = {0, 1};

  auto top = knn(store, cands, query, 2);
  REQUIRE(top.size() == 2);
  // "mirror" and "up" both have similarity 1; ascending token breaks the tie
  CHECK(top[0].token == "mirror");
  CHECK(top[1].token == "up");
  CHECK(top[0].similarity == doctest::Approx(1.0));

  auto all = knn(store, cands, query, 10);
  REQUIRE(all.size() == 4);
  CHECK(all[2].token == "diag");
  CHECK(all[3].token == "right");
}

TEST_CASE("knn validates its inputs") {
  EmbeddingStore store = EmbeddingStore::from_text("a 1 0\n");
  std::vector<double> query = {1, 0};
  CHECK_THROWS_AS(knn(store, {"a"}, query, 0), std::invalid_argument);
  std::vector<double> bad_query = {1, 0, 0};
  CHECK_THROWS_AS(knn(store, {"a"}, bad_query, 1), std::invalid_argument);
  CHECK_THROWS_WITH(knn(store, {"missing"}, query, 1),
                    "knn candidate not in vocabulary: 'missing'");
}

TEST_CASE("knn ignores duplicate candidates and handles zero queries") {
  EmbeddingStore store = EmbeddingStore::from_text("a 1 0\nb 0 1\n");
  std::vector<double> query = {1, 0};
  auto result = knn(store, {"a", "a", "b"}, query, 5);
  REQUIRE(result.size() == 2);
  CHECK(result[0].token == "a");

  std::vector<double> zero = {0, 0};
  auto flat = knn(store, {"b", "a"}, zero, 2);
  REQUIRE(flat.size() == 2);
  CHECK(flat[0].token == "a");  // all similarities 0, token order decides
  CHECK(flat[0].similarity == 0.0);
}

TEST_CASE("knn agrees with the exhaustive scan on random stores") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    std::size_t n = 2 + uniform_below(rng, 40);
    // dim >= 2: with a single dimension every vector is parallel to the
    // query, and the two code paths round the resulting ties differently.
    std::size_t dim = 2 + uniform_below(rng, 7);
    std::string text;
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < n; ++i) {
      std::string tok = "w" + std::to_string(i);
      tokens.push_back(tok);
      text += tok;
      for (std::size_t d = 0; d < dim; ++d)
        text += " " + std::to_string(uniform_range(rng, -1.0, 1.0));
      text += "\n";
    }
    EmbeddingStore store = EmbeddingStore::from_text(text);
    std::vector<double> query(dim);
    for (auto& q : query) q = uniform_range(rng, -1.0, 1.0);
    std::size_t k = 1 + uniform_below(rng, n + 2);

    auto fast = knn(store, tokens, query, k);
    auto slow = oracle::knn(store, tokens, query, k);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i].token == slow[i].token);
      CHECK(std::abs(fast[i].similarity - slow[i].similarity) < 1e-9);
    }
  }
}

TEST_CASE("bundled vector file loads") {
  EmbeddingStore store = EmbeddingStore::load(src_path("data/synth/vectors.txt"));
  CHECK(store.size() == 50);
  CHECK(store.dim() == 12);
  CHECK(store.lookup("alice").has_value());
  CHECK(store.duplicate_count() == 0);
}
