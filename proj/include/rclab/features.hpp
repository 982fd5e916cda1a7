#pragma once

// Feature extraction for the scorer. The constraint reaches the scorer only
// through the explicit trailing features, never through header tokens, so
// ablating feature groups cleanly separates "uses length" from "checks the
// constraint".

#include <vector>

#include "rclab/constraints.hpp"
#include "rclab/tokens.hpp"

namespace rclab {

// Layout, in order:
//   [0, 6)    prompt content-class histogram (normalized)
//   [6, 12)   response content-class histogram (normalized)
//   [12, 48)  outer product of the two histograms
//   48        response word_count / kLenScale
//   49        at-most indicator
//   50        at-least indicator
//   51        constraint word_num / kLenScale
//   52        satisfaction bit
struct FeatureLayout {
  static constexpr int kContentClasses = 6;
  static constexpr double kLenScale = 64.0;
  static constexpr int kWordCount = 48;
  static constexpr int kAtMost = 49;
  static constexpr int kAtLeast = 50;
  static constexpr int kWordNum = 51;
  static constexpr int kSatisfied = 52;
  static constexpr int kDim = 53;
};

using FeatureVector = std::vector<double>;

FeatureVector featurize(const VocabLayout& vocab, const AugmentedPrompt& prompt,
                        const TokenSequence& response);

}  // namespace rclab
