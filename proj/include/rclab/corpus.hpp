#pragma once

// Synthetic preference corpus. The quality oracle plays the role an external
// judge would: a fixed random bilinear form over prompt/response content
// histograms, deliberately blind to filler tokens so response length can be
// stretched without moving the score.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "rclab/constraints.hpp"
#include "rclab/rng.hpp"
#include "rclab/tokens.hpp"

namespace rclab {

class QualityOracle {
 public:
  QualityOracle(const VocabLayout& vocab, std::uint64_t seed);

  // Bilinear score of normalized per-id content histograms. Tokens outside
  // the content band contribute nothing, so the score is invariant to filler
  // padding and to token order.
  double score(const TokenSequence& prompt, const TokenSequence& response) const;

  const VocabLayout& vocab() const { return vocab_; }
  std::uint64_t seed() const { return seed_; }

  // Scores are O(1) by construction; tolerances elsewhere hang off this.
  static constexpr double kScoreScale = 1.0;

 private:
  VocabLayout vocab_;
  std::uint64_t seed_;
  int dim_;
  std::vector<double> weights_;  // dim_ x dim_, row-major
};

struct PreferenceExample {
  AugmentedPrompt prompt;
  TokenSequence chosen;
  TokenSequence rejected;
  std::optional<double> true_quality_chosen;
  std::optional<double> true_quality_rejected;
};

using PreferenceDataset = std::vector<PreferenceExample>;

struct IntRange {
  int min = 0;
  int max = 0;
};

struct CorpusSpec {
  int n_examples = 1000;
  double chosen_longer_prob = 0.5978;
  int vocab_size = 64;
  IntRange prompt_len_range{8, 24};
  IntRange response_len_range{24, 160};
  std::uint64_t seed = 0;
};

void validate(const CorpusSpec& spec);

PreferenceDataset generate_corpus(const CorpusSpec& spec, int threads = 1);

struct SplitFractions {
  double sft = 0.27;
  double rm = 0.63;
  double eval = 0.10;
};

struct CorpusSplits {
  PreferenceDataset sft;
  PreferenceDataset rm;
  PreferenceDataset eval;
};

CorpusSplits split_corpus(const PreferenceDataset& corpus,
                          const SplitFractions& fractions, std::uint64_t seed);

// Observed fraction of pairs whose chosen response has strictly more words.
double chosen_longer_fraction(const VocabLayout& vocab,
                              const PreferenceDataset& data);

// Pearson correlation between (q_w - q_l) and (|y_w| - |y_l|); the corpus
// generator is supposed to keep this near zero.
double quality_length_correlation(const VocabLayout& vocab,
                                  const PreferenceDataset& data);

// Response factory shared by the corpus generator and the length-controlled
// rewrites: a short content segment plus enough filler to land exactly on
// target_words. Requires target_words >= 1.
TokenSequence make_response(const VocabLayout& vocab, Rng& rng,
                            int target_words);

// Re-pad an existing response to a new word count, keeping every content
// token (and therefore the oracle score) unchanged. Requires target_words >=
// the content segment's own word count.
TokenSequence repad_response(const VocabLayout& vocab, Rng& rng,
                             const TokenSequence& response, int target_words);

// Word count of the content segment alone: the floor repad_response can reach.
int content_word_count(const VocabLayout& vocab, const TokenSequence& response);

}  // namespace rclab
