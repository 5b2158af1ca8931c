#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lexloop/embedding.h"
#include "lexloop/error.h"
#include "lexloop/lexicon.h"
#include "temp_dir.h"

using namespace lexloop;

TEST_CASE("load_vectors: 2x3 file") {
  const EmbeddingStore store = load_vectors(fixture("vec2x3.txt"));
  CHECK(store.size() == 2);
  CHECK(store.dim() == 3);
  REQUIRE(store.find("happy") != nullptr);
  CHECK(*store.find("happy") == FeatureVector{0.5, -1.0, 2.25});
  CHECK(*store.find("sad") == FeatureVector{1e-3, 0.0, -4.0});
  CHECK(store.find("angry") == nullptr);
}

TEST_CASE("load_vectors: wrong arity names the line") {
  try {
    load_vectors(fixture("vec_bad_arity.txt"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("load_vectors: 50-token fixture returns exact rows") {
  const EmbeddingStore store = load_vectors(fixture("vec50.txt"));
  CHECK(store.size() == 50);
  CHECK(store.dim() == 4);
  for (int i : {0, 7, 31, 49}) {
    char name[8];
    std::snprintf(name, sizeof name, "t%02d", i);
    const FeatureVector* v = store.find(name);
    REQUIRE(v != nullptr);
    char expect_last[32];
    std::snprintf(expect_last, sizeof expect_last, "%.6f", 1.0 / (i + 1));
    CHECK((*v)[0] == i * 0.5);
    CHECK((*v)[1] == -i);
    CHECK((*v)[2] == i * 0.125);
    CHECK((*v)[3] == std::stod(expect_last));
  }
}

TEST_CASE("load_vectors: duplicate keeps the last row and warns") {
  std::istringstream in("2 2\nx 1 2\nx 3 4\n");
  std::vector<std::string> warnings;
  const EmbeddingStore store = load_vectors(in, "dup", &warnings);
  CHECK(store.size() == 1);
  CHECK(*store.find("x") == FeatureVector{3, 4});
  CHECK(warnings.size() == 1);
}

TEST_CASE("load_vectors: header problems") {
  std::istringstream empty("");
  CHECK_THROWS_AS(load_vectors(empty), ParseError);
  std::istringstream count("3 2\nx 1 2\n");
  CHECK_THROWS_AS(load_vectors(count), ParseError);
  std::istringstream bad_value("1 2\nx 1 abc\n");
  CHECK_THROWS_AS(load_vectors(bad_value), ParseError);
}

TEST_CASE("write_vectors round trip is exact") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  EmbeddingStore store(5);
  for (int i = 0; i < 20; ++i) {
    FeatureVector v(5);
    for (double& x : v) x = normal(rng);
    store.insert("tok" + std::to_string(i), v);
  }
  std::stringstream text;
  write_vectors(store, text);
  const EmbeddingStore back = load_vectors(text);
  REQUIRE(back.size() == store.size());
  for (const auto& t : store.tokens()) CHECK(*back.find(t) == *store.find(t));
}

TEST_CASE("EmbeddingStore rejects a wrong-length row") {
  EmbeddingStore store(3);
  CHECK_THROWS_AS(store.insert("x", {1, 2}), DimensionError);
}

namespace {

EmbeddingStore small_store() {
  EmbeddingStore s(2);
  s.insert("a", {1, 0});
  s.insert("b", {0, 1});
  s.insert("c", {2, 4});
  s.insert("d", {-3, 5});
  s.insert("self", {9, 9});
  return s;
}

}  // namespace

TEST_CASE("embed_word") {
  const EmbeddingStore store = small_store();
  Lexicon lex;
  lex.add("one", PartOfSpeech::kAdjective, "c");
  lex.add("two", PartOfSpeech::kAdjective, "a b");
  lex.add("five", PartOfSpeech::kAdjective, "a zz c, qq");
  lex.add("five", PartOfSpeech::kAdjective, "d");
  lex.add("self", PartOfSpeech::kAdjective, "nothing known");
  lex.add("none", PartOfSpeech::kAdjective, "nothing known");

  SUBCASE("single token gloss") {
    const WordEmbedding e = embed_word("one", lex, store);
    CHECK(e.values == FeatureVector{2, 4});
    CHECK(e.coverage() == 1.0);
  }
  SUBCASE("two tokens average") {
    CHECK(embed_word("two", lex, store).values == FeatureVector{0.5, 0.5});
  }
  SUBCASE("three of five tokens found") {
    // aggregated gloss "a zz c, qq; d": a, c, d found; zz, qq missing; punctuation skipped
    const WordEmbedding e = embed_word("five", lex, store);
    CHECK(e.tokens_found == 3);
    CHECK(e.tokens_total == 5);
    CHECK(e.values[0] == doctest::Approx((1.0 + 2.0 - 3.0) / 3.0));
    CHECK(e.values[1] == doctest::Approx((0.0 + 4.0 + 5.0) / 3.0));
  }
  SUBCASE("falls back to the word's own vector") {
    const WordEmbedding e = embed_word("self", lex, store);
    CHECK(e.used_word_vector);
    CHECK(e.values == FeatureVector{9, 9});
  }
  SUBCASE("zero vector when nothing is known") {
    const WordEmbedding e = embed_word("none", lex, store);
    CHECK(e.values == FeatureVector{0, 0});
    CHECK(e.coverage() == 0.0);
  }
  SUBCASE("word missing from the lexicon") {
    CHECK_THROWS_AS(embed_word("absent", lex, store), NotFoundError);
  }
  SUBCASE("strategy vector prefers the word's own row") {
    CHECK(strategy_vector("self", lex, store) == FeatureVector{9, 9});
    CHECK(strategy_vector("one", lex, store) == FeatureVector{2, 4});
  }
}

TEST_CASE("embed_word: gloss token order does not change the mean") {
  const EmbeddingStore store = small_store();
  Lexicon forward_lex, reverse_lex;
  forward_lex.add("w", PartOfSpeech::kAdjective, "a b c d");
  reverse_lex.add("w", PartOfSpeech::kAdjective, "d c b a");
  const auto x = embed_word("w", forward_lex, store).values;
  const auto y = embed_word("w", reverse_lex, store).values;
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == doctest::Approx(y[i]).epsilon(1e-15));
}

TEST_CASE("l2_distance") {
  const FeatureVector zero = {0, 0}, p = {3, 4};
  CHECK(l2_distance(p, p) == 0.0);
  CHECK(l2_distance(zero, p) == 5.0);
  CHECK(l2_distance(p, zero) == 5.0);
  CHECK_THROWS_AS(l2_distance(zero, FeatureVector{1, 2, 3}), DimensionError);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int round = 0; round < 100; ++round) {
    FeatureVector a(10), b(10), c(10);
    for (double& v : a) v = normal(rng);
    for (double& v : b) v = normal(rng);
    for (double& v : c) v = normal(rng);
    double sum = 0.0;
    for (int i = 0; i < 10; ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    CHECK(std::abs(l2_distance(a, b) - std::sqrt(sum)) < 1e-12);
    CHECK(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-9);
  }
}

TEST_CASE("build_feature_table") {
  const EmbeddingStore store = small_store();
  Lexicon lex;
  lex.add("one", PartOfSpeech::kAdjective, "c");
  lex.add("self", PartOfSpeech::kAdjective, "a");
  const std::vector<std::string> words = {"one", "self"};
  const FeatureTable table = build_feature_table(words, lex, store);
  REQUIRE(table.size() == 2);
  CHECK(table.at("one").features == FeatureVector{2, 4});
  CHECK(table.at("one").embedding == FeatureVector{2, 4});
  CHECK(table.at("self").features == FeatureVector{1, 0});
  CHECK(table.at("self").embedding == FeatureVector{9, 9});
  for (const auto& [w, f] : table) CHECK(f.features.size() == store.dim());
}
