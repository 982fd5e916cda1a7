#include <doctest.h>

#include <cmath>
#include <set>

#include "oracle_helpers.hpp"
#include "rclab/corpus.hpp"

using namespace rclab;

namespace {

CorpusSpec small_spec(int n, std::uint64_t seed) {
  CorpusSpec spec;
  spec.n_examples = n;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("generation is deterministic and sized exactly") {
  const auto a = generate_corpus(small_spec(40, 9));
  const auto b = generate_corpus(small_spec(40, 9));
  REQUIRE(a.size() == 40);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].prompt.base == b[i].prompt.base);
    CHECK(a[i].chosen == b[i].chosen);
    CHECK(a[i].rejected == b[i].rejected);
  }
  CHECK(generate_corpus(small_spec(0, 9)).empty());
}

TEST_CASE("thread count never changes the corpus") {
  const auto serial = generate_corpus(small_spec(60, 13), 1);
  const auto parallel = generate_corpus(small_spec(60, 13), 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].chosen == parallel[i].chosen);
    CHECK(serial[i].rejected == parallel[i].rejected);
  }
}

TEST_CASE("chosen-longer fraction tracks the requested bias") {
  const VocabLayout vocab(64);
  CorpusSpec spec = small_spec(1000, 7);
  spec.chosen_longer_prob = 0.5978;
  const auto corpus = generate_corpus(spec);
  const double frac = chosen_longer_fraction(vocab, corpus);
  CHECK(frac >= 0.55);
  CHECK(frac <= 0.65);
  CHECK(std::abs(frac - 0.5978) <= 2.0 / std::sqrt(1000.0));
}

TEST_CASE("probability-one bias makes every chosen response longer") {
  const VocabLayout vocab(64);
  CorpusSpec spec = small_spec(200, 3);
  spec.chosen_longer_prob = 1.0;
  const auto corpus = generate_corpus(spec);
  REQUIRE(corpus.size() == 200);
  for (const auto& ex : corpus)
    CHECK(vocab.word_count(ex.chosen) > vocab.word_count(ex.rejected));
}

TEST_CASE("oracle ranks chosen above rejected on every example") {
  CorpusSpec spec = small_spec(300, 21);
  const auto corpus = generate_corpus(spec);
  const QualityOracle oracle(VocabLayout(spec.vocab_size), spec.seed);
  for (const auto& ex : corpus) {
    REQUIRE(ex.true_quality_chosen.has_value());
    REQUIRE(ex.true_quality_rejected.has_value());
    CHECK(*ex.true_quality_chosen > *ex.true_quality_rejected);
    CHECK(oracle.score(ex.prompt.base, ex.chosen) ==
          doctest::Approx(*ex.true_quality_chosen).epsilon(1e-12));
  }
}

TEST_CASE("quality gap stays decorrelated from length gap") {
  const VocabLayout vocab(64);
  const auto corpus = generate_corpus(small_spec(1000, 7));
  CHECK(std::abs(quality_length_correlation(vocab, corpus)) < 0.1);
}

TEST_CASE("oracle ordering matches a brute-force recount") {
  const VocabLayout vocab(64);
  const QualityOracle oracle(vocab, 11);
  // Regenerate the weight matrix, then recompute both scores from raw counts.
  Rng wrng(derive_seed(11, "oracle"));
  std::vector<double> weights(48 * 48);
  for (auto& w : weights) w = wrng.normal();

  const auto corpus = generate_corpus(small_spec(100, 11));
  for (const auto& ex : corpus) {
    const double brute_chosen = oracles::brute_force_overlap_score(
        weights, 48, ex.prompt.base, ex.chosen);
    const double brute_rejected = oracles::brute_force_overlap_score(
        weights, 48, ex.prompt.base, ex.rejected);
    const bool oracle_prefers_chosen = oracle.score(ex.prompt.base, ex.chosen) >
                                       oracle.score(ex.prompt.base, ex.rejected);
    CHECK(oracle_prefers_chosen == (brute_chosen > brute_rejected));
    CHECK(oracle.score(ex.prompt.base, ex.chosen) ==
          doctest::Approx(brute_chosen).epsilon(1e-9));
  }
}

TEST_CASE("oracle score is exactly invariant to filler padding") {
  const VocabLayout vocab(64);
  const QualityOracle oracle(vocab, 5);
  const TokenSequence prompt{2, 4, 7, 10};
  TokenSequence response{1, 3, 8, 12, 20};
  const double before = oracle.score(prompt, response);
  for (int i = 0; i < 50; ++i) response.push_back(48 + (i % 13));
  CHECK(oracle.score(prompt, response) == before);
}

TEST_CASE("scoring twice gives the identical value") {
  const VocabLayout vocab(64);
  const QualityOracle oracle(vocab, 42);
  const TokenSequence p{1, 2, 3}, r{4, 5, 6};
  CHECK(oracle.score(p, r) == oracle.score(p, r));
}

TEST_CASE("out-of-vocabulary tokens are a domain error") {
  const QualityOracle oracle(VocabLayout(64), 1);
  CHECK_THROWS_AS(oracle.score({64}, {1}), std::domain_error);
}

TEST_CASE("repad keeps content and score, moves only the word count") {
  const VocabLayout vocab(64);
  const QualityOracle oracle(vocab, 19);
  Rng rng(77);
  const TokenSequence base = make_response(vocab, rng, 30);
  REQUIRE(vocab.word_count(base) == 30);
  const TokenSequence prompt{2, 6, 10};
  const double score0 = oracle.score(prompt, base);
  for (int target : {content_word_count(vocab, base), 15, 31, 90}) {
    const TokenSequence padded = repad_response(vocab, rng, base, target);
    CHECK(vocab.word_count(padded) == target);
    CHECK(oracle.score(prompt, padded) == score0);
  }
  CHECK_THROWS_AS(repad_response(vocab, rng, base, 0), std::invalid_argument);
}

TEST_CASE("splits partition the corpus with frozen sizes") {
  const auto corpus = generate_corpus(small_spec(100, 31));
  const auto splits = split_corpus(corpus, SplitFractions{}, 31);
  CHECK(splits.sft.size() == 27);
  CHECK(splits.rm.size() == 63);
  CHECK(splits.eval.size() == 10);

  // Disjoint cover: every chosen sequence appears exactly once across splits.
  std::multiset<TokenSequence> all;
  for (const auto& ex : corpus) all.insert(ex.chosen);
  std::multiset<TokenSequence> seen;
  for (const auto* part : {&splits.sft, &splits.rm, &splits.eval})
    for (const auto& ex : *part) seen.insert(ex.chosen);
  CHECK(seen == all);
}

TEST_CASE("degenerate fractions put everything in one split") {
  const auto corpus = generate_corpus(small_spec(20, 2));
  const auto splits = split_corpus(corpus, SplitFractions{1.0, 0.0, 0.0}, 2);
  CHECK(splits.sft.size() == 20);
  CHECK(splits.rm.empty());
  CHECK(splits.eval.empty());
}

TEST_CASE("identical split seeds give identical partitions") {
  const auto corpus = generate_corpus(small_spec(50, 4));
  const auto a = split_corpus(corpus, SplitFractions{}, 8);
  const auto b = split_corpus(corpus, SplitFractions{}, 8);
  REQUIRE(a.rm.size() == b.rm.size());
  for (std::size_t i = 0; i < a.rm.size(); ++i)
    CHECK(a.rm[i].chosen == b.rm[i].chosen);
}

TEST_CASE("invalid specs and fractions are rejected") {
  CorpusSpec spec;
  spec.n_examples = -1;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = CorpusSpec{};
  spec.chosen_longer_prob = 1.5;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = CorpusSpec{};
  spec.prompt_len_range = {5, 4};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = CorpusSpec{};
  spec.response_len_range = {30, 30};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);

  const auto corpus = generate_corpus(small_spec(10, 1));
  CHECK_THROWS_AS(split_corpus(corpus, SplitFractions{0.5, 0.5, 0.5}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(split_corpus(corpus, SplitFractions{-0.1, 1.0, 0.1}, 1),
                  std::invalid_argument);
}

}  // TEST_SUITE
