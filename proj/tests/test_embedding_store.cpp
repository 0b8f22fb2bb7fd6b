#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "capsel/embedding_store.hpp"

using namespace capsel;

TEST_CASE("load_embeddings parses a TSV stream") {
  std::istringstream in("cat\t0.1\t0.2\n");
  EmbeddingLoadStats stats;
  const EmbeddingTable table = load_embeddings(in, EmbeddingFormat::kTsv, 2, &stats);
  CHECK(table.dimension() == 2);
  CHECK(stats.tokens_loaded == 1);
  const DenseVector* v = table.find("cat");
  REQUIRE(v != nullptr);
  CHECK((*v)[0] == doctest::Approx(0.1));
  CHECK((*v)[1] == doctest::Approx(0.2));
}

TEST_CASE("duplicate tokens keep the first entry and are counted") {
  std::istringstream in("cat\t1\t0\ncat\t9\t9\n");
  EmbeddingLoadStats stats;
  const EmbeddingTable table = load_embeddings(in, EmbeddingFormat::kTsv, 0, &stats);
  CHECK(stats.duplicates_skipped == 1);
  CHECK(table.size() == 1);
  CHECK((*table.find("cat"))[0] == 1.0);
}

TEST_CASE("malformed lines report the line number") {
  std::istringstream in("cat\t0.1\t0.2\ndog\t0.1\n");
  try {
    load_embeddings(in, EmbeddingFormat::kTsv, 2);
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("empty and non-numeric streams are rejected") {
  std::istringstream empty("");
  CHECK_THROWS_AS(load_embeddings(empty, EmbeddingFormat::kTsv), IngestError);
  std::istringstream bad("cat\tx\ty\n");
  CHECK_THROWS_AS(load_embeddings(bad, EmbeddingFormat::kTsv), IngestError);
}

TEST_CASE("lookups are case-insensitive") {
  std::istringstream in("Cat\t1\t2\n");
  const EmbeddingTable table = load_embeddings(in, EmbeddingFormat::kTsv);
  CHECK(table.find("CAT") != nullptr);
  CHECK(table.find("cat") != nullptr);
}

TEST_CASE("binary embeddings round-trip through the container format") {
  std::istringstream in("cat\t1\t2\ndog\t3\t4\n");
  const EmbeddingTable table = load_embeddings(in, EmbeddingFormat::kTsv);
  std::stringstream buffer(std::ios::in | std::ios::out | std::ios::binary);
  write_embeddings_binary(buffer, table);
  const EmbeddingTable reloaded = load_embeddings(buffer, EmbeddingFormat::kBinary, 2);
  CHECK(reloaded.size() == 2);
  CHECK((*reloaded.find("dog"))[1] == 4.0);

  std::istringstream garbage("not a binary stream");
  CHECK_THROWS_AS(load_embeddings(garbage, EmbeddingFormat::kBinary), IngestError);
}

TEST_CASE("cosine similarity basics") {
  CHECK(cosine_similarity({1, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(cosine_similarity({1, 0}, {0, 1}) == doctest::Approx(0.0));
  CHECK(cosine_similarity({0, 0}, {1, 1}) == 0.0);  // zero vector: defined non-match
  CHECK_THROWS_AS(cosine_similarity({1, 0}, {1, 0, 0}), std::invalid_argument);
}

TEST_CASE("euclidean distance basics") {
  CHECK(euclidean_distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
  const DenseVector v{0.3, -2.0, 7.5};
  CHECK(euclidean_distance(v, v) == 0.0);
  CHECK(euclidean_distance({1}, {4}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(euclidean_distance({1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("caption_vector sums surviving tokens") {
  EmbeddingTable table(2);
  table.insert("cat", {0.1, 0.2});
  table.insert("red", {1, 0});
  table.insert("dog", {0, 1});
  const StopwordList stopwords{"a", "the"};

  SUBCASE("single surviving token") {
    const std::vector<std::string> tokens{"a", "cat"};
    const auto result = caption_vector(tokens, table, stopwords);
    CHECK(result.coverage == 1);
    CHECK(result.vector[0] == doctest::Approx(0.1));
    CHECK(result.vector[1] == doctest::Approx(0.2));
  }
  SUBCASE("everything filtered") {
    const std::vector<std::string> tokens{"a", "the"};
    const auto result = caption_vector(tokens, table, stopwords);
    CHECK(result.coverage == 0);
    CHECK(is_zero_vector(result.vector));
  }
  SUBCASE("vector addition") {
    const std::vector<std::string> tokens{"red", "dog"};
    const auto result = caption_vector(tokens, table, stopwords);
    CHECK(result.coverage == 2);
    CHECK(result.vector == DenseVector{1, 1});
  }
  SUBCASE("missing tokens are skipped, not errors") {
    const std::vector<std::string> tokens{"zebra", "cat"};
    const auto result = caption_vector(tokens, table, stopwords);
    CHECK(result.coverage == 1);
  }
}

TEST_CASE("caption_vector is permutation-invariant and stopword-absorbing") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  EmbeddingTable table(3);
  const std::vector<std::string> vocabulary{"one", "two", "three", "four", "five"};
  for (const auto& word : vocabulary) {
    table.insert(word, {value(rng), value(rng), value(rng)});
  }
  const StopwordList stopwords{"a", "of"};

  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> tokens;
    std::uniform_int_distribution<std::size_t> pick(0, vocabulary.size() - 1);
    std::uniform_int_distribution<int> length(1, 8);
    const int n = length(rng);
    for (int i = 0; i < n; ++i) {
      tokens.push_back(vocabulary[pick(rng)]);
    }
    const auto base = caption_vector(tokens, table, stopwords);

    std::vector<std::string> shuffled = tokens;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto permuted = caption_vector(shuffled, table, stopwords);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(permuted.vector[i] == doctest::Approx(base.vector[i]).epsilon(1e-12));
    }

    std::vector<std::string> with_stopword = tokens;
    with_stopword.push_back("of");
    const auto extended = caption_vector(with_stopword, table, stopwords);
    CHECK(extended.vector == base.vector);
    CHECK(extended.coverage == base.coverage);
  }
}

TEST_CASE("metric properties on random vectors") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> value(-5.0, 5.0);
  std::uniform_real_distribution<double> positive(0.01, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    DenseVector a(4), b(4), c(4);
    for (std::size_t i = 0; i < 4; ++i) {
      a[i] = value(rng);
      b[i] = value(rng);
      c[i] = value(rng);
    }
    if (!is_zero_vector(a)) {
      DenseVector scaled = a;
      scale_in_place(scaled, positive(rng));
      CHECK(cosine_similarity(a, scaled) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(euclidean_distance(a, b) == doctest::Approx(euclidean_distance(b, a)));
    CHECK(euclidean_distance(a, c) <=
          euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-12);
  }
}
