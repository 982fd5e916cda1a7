#pragma once

// Dataset builders: the response-conditioned augmentation, the
// length-instruction baseline (and its sliced variants), and the controlled
// evaluation sets. Every builder is a pure function of (input, seed).

#include <array>
#include <cstdint>
#include <vector>

#include "rclab/constraints.hpp"
#include "rclab/corpus.hpp"

namespace rclab {

struct RcBuildConfig {
  double at_most_prob = 0.5;  // kind mix for sampled constraints
  // Cap for at-least word_nums, as a multiple of the longest response.
  double word_num_cap_factor = 2.0;
};

struct RcBuildResult {
  std::vector<RcExample> examples;
  int skipped = 0;  // pairs no admissible constraint could be drawn for
};

// Two examples per input pair: the chosen response against a constrained
// prompt it violates, and the rejected response under a constrained prompt it
// satisfies against the plain prompt.
RcBuildResult build_rc_dataset(const VocabLayout& vocab,
                               const PreferenceDataset& corpus,
                               std::uint64_t seed,
                               const RcBuildConfig& config = {});

enum class LiftVariant { Full, Reverse, NoReverse, EmptyPrompt };

// Length-instruction augmentation: each pair yields one at-most and one
// at-least prompt with a sampled word_num; when exactly one response
// satisfies the instruction it becomes the chosen one, otherwise the original
// order stands. Variants slice the same seeded stream:
//   Reverse      only pairs the instruction flipped
//   NoReverse    only exactly-one-satisfies pairs it did not flip
//   EmptyPrompt  NoReverse with the base prompt blanked out
PreferenceDataset build_lift_plus(const VocabLayout& vocab,
                                  const PreferenceDataset& corpus,
                                  std::uint64_t seed,
                                  LiftVariant variant = LiftVariant::Full);

// Every prompt replaced by the canonical empty prompt. Quality labels are
// dropped: they were computed against the original prompts.
PreferenceDataset build_eval_empty(const VocabLayout& vocab,
                                   const PreferenceDataset& eval_corpus);

// Prompts permuted by a seeded derangement (no example keeps its own).
PreferenceDataset build_eval_random(const VocabLayout& vocab,
                                    const PreferenceDataset& eval_corpus,
                                    std::uint64_t seed);

// Each pair rewritten to two equal-quality responses that differ only in
// word count, under a constraint only one of them satisfies; the satisfying
// response is chosen. Pairs whose lengths collide are skipped.
struct LengthEvalResult {
  PreferenceDataset examples;
  int skipped = 0;
};
LengthEvalResult build_eval_length(const VocabLayout& vocab,
                                   const QualityOracle& oracle,
                                   const PreferenceDataset& eval_corpus,
                                   std::uint64_t seed);

struct MultiLengthExample {
  AugmentedPrompt prompt;
  std::vector<TokenSequence> variants;  // strictly increasing word counts
};
using MultiLengthDataset = std::vector<MultiLengthExample>;

// n_variants length-varied rewrites of each chosen response, oracle score
// unchanged (content is preserved verbatim). n_variants == 1 returns the
// original response untouched.
MultiLengthDataset build_eval_multilength(const VocabLayout& vocab,
                                          const PreferenceDataset& eval_corpus,
                                          int n_variants, std::uint64_t seed);

// The eight-point at-most word_num ladder around a pair's two lengths:
//   [l_w-2T, l_w-T, l_w, l_w+L, l_w+2L, l_l, l_l+T, l_l+2T]
// with T = 10 and L = (l_l - l_w)/3 rounded half toward zero. Requires
// l_w < l_l and l_w > 2T, and the result must be strictly increasing.
inline constexpr int kSweepPoints = 8;
inline constexpr int kSweepT = 10;

std::array<int, kSweepPoints> sweep_word_nums(int len_chosen, int len_rejected);

std::vector<AugmentedPrompt> build_mls_sweep(const VocabLayout& vocab,
                                             const PreferenceExample& example);

struct SweepExample {
  TokenSequence base;
  std::array<int, kSweepPoints> word_nums;
  TokenSequence chosen;
  TokenSequence rejected;
};

struct SweepDataset {
  std::vector<SweepExample> examples;
  int skipped = 0;  // wrong length order, too short, or degenerate spacing
};

SweepDataset build_mls_dataset(const VocabLayout& vocab,
                               const PreferenceDataset& eval_corpus);

}  // namespace rclab
