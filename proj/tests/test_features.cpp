#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rclab/features.hpp"

using namespace rclab;

namespace {

AugmentedPrompt plain(TokenSequence base) {
  return AugmentedPrompt{std::move(base), std::nullopt};
}

AugmentedPrompt with(TokenSequence base, ConstraintKind kind, int wn) {
  return AugmentedPrompt{std::move(base), LengthConstraint{kind, wn}};
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("vector has the frozen dimension") {
  const VocabLayout vocab(64);
  CHECK(featurize(vocab, plain({1}), {2}).size() == 53);
}

TEST_CASE("histograms are normalized per side") {
  const VocabLayout vocab(64);
  // Prompt ids 0,1 fall in class 0; 40 in class 5. Response all in class 0.
  const auto f = featurize(vocab, plain({0, 1, 40}), {2, 3});
  CHECK(f[0] == doctest::Approx(2.0 / 3.0));
  CHECK(f[5] == doctest::Approx(1.0 / 3.0));
  CHECK(f[6] == doctest::Approx(1.0));
  double psum = 0.0, rsum = 0.0;
  for (int c = 0; c < 6; ++c) psum += f[c], rsum += f[6 + c];
  CHECK(psum == doctest::Approx(1.0));
  CHECK(rsum == doctest::Approx(1.0));
}

TEST_CASE("filler tokens leave the histograms untouched") {
  const VocabLayout vocab(64);
  const auto bare = featurize(vocab, plain({2, 10}), {4, 20});
  auto padded = featurize(vocab, plain({2, 10}), {4, 20, 50, 51, 52});
  // Fillers move only the word-count feature.
  CHECK(padded[48] > bare[48]);
  padded[48] = bare[48];
  CHECK(padded == bare);
}

TEST_CASE("outer-product block is the histogram product") {
  const VocabLayout vocab(64);
  const auto f = featurize(vocab, plain({0, 9, 17}), {8, 8, 33});
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(f[12 + i * 6 + j] == doctest::Approx(f[i] * f[6 + j]));
}

TEST_CASE("token order never matters") {
  const VocabLayout vocab(64);
  const auto a = featurize(vocab, plain({1, 2, 3}), {10, 20, 30});
  const auto b = featurize(vocab, plain({3, 1, 2}), {30, 10, 20});
  CHECK(a == b);
}

TEST_CASE("word count feature uses the fixed scale") {
  const VocabLayout vocab(64);
  // Three odd content ids are words; 2 is not.
  const auto f = featurize(vocab, plain({1}), {1, 3, 5, 2});
  CHECK(f[48] == doctest::Approx(3.0 / 64.0));
}

TEST_CASE("constraint block is zero without a constraint") {
  const VocabLayout vocab(64);
  const auto f = featurize(vocab, plain({1, 2}), {3, 4});
  CHECK(f[49] == 0.0);
  CHECK(f[50] == 0.0);
  CHECK(f[51] == 0.0);
  CHECK(f[52] == 0.0);
}

TEST_CASE("constraint block encodes kind, target, and satisfaction") {
  const VocabLayout vocab(64);
  const TokenSequence two_words{1, 3, 2};

  const auto at_most = featurize(vocab, with({1}, ConstraintKind::AtMost, 5), two_words);
  CHECK(at_most[49] == 1.0);
  CHECK(at_most[50] == 0.0);
  CHECK(at_most[51] == doctest::Approx(5.0 / 64.0));
  CHECK(at_most[52] == 1.0);

  const auto at_least = featurize(vocab, with({1}, ConstraintKind::AtLeast, 5), two_words);
  CHECK(at_least[49] == 0.0);
  CHECK(at_least[50] == 1.0);
  CHECK(at_least[52] == 0.0);

  // Boundary: exactly word_num words satisfies both kinds.
  const auto at_boundary =
      featurize(vocab, with({1}, ConstraintKind::AtLeast, 2), two_words);
  CHECK(at_boundary[52] == 1.0);
}

TEST_CASE("satisfaction bit counts filler words too") {
  const VocabLayout vocab(64);
  // One content word plus two filler words: 3 total, meets at-least 3.
  const auto f = featurize(vocab, with({1}, ConstraintKind::AtLeast, 3), {1, 49, 51});
  CHECK(f[52] == 1.0);
}

TEST_CASE("empty sides leave their histogram all zero") {
  const VocabLayout vocab(64);
  // A filler-only response has no content tokens.
  const auto f = featurize(vocab, plain({1}), {50, 52});
  for (int c = 0; c < 6; ++c) CHECK(f[6 + c] == 0.0);
  for (int k = 12; k < 48; ++k) CHECK(f[k] == 0.0);
}

TEST_CASE("out-of-vocabulary ids are rejected") {
  const VocabLayout vocab(64);
  CHECK_THROWS_AS(featurize(vocab, plain({64}), {1}), std::domain_error);
  CHECK_THROWS_AS(featurize(vocab, plain({1}), {-1}), std::domain_error);
}

}  // TEST_SUITE
