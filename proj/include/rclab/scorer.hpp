#pragma once

// Reward scorer over feature vectors: a two-layer tanh perceptron
// (D -> H -> 1), or a plain linear map when hidden_dim is 0. Parameters live
// in one flat vector so training and finite-difference checks can treat every
// model the same way.

#include <cstdint>
#include <vector>

#include "rclab/features.hpp"

namespace rclab {

struct ScorerParams {
  int input_dim = FeatureLayout::kDim;
  int hidden_dim = 16;
  std::vector<double> values;

  static std::size_t param_count(int input_dim, int hidden_dim) {
    if (hidden_dim == 0) return static_cast<std::size_t>(input_dim) + 1;
    return static_cast<std::size_t>(hidden_dim) * input_dim + hidden_dim +
           hidden_dim + 1;
  }
};

// Uniform [-0.1, 0.1] entries, seeded.
ScorerParams init_scorer(int input_dim, int hidden_dim, std::uint64_t seed);

double score(const ScorerParams& params, const FeatureVector& features);

// Accumulates d(score)/d(params) * weight into grad (same length as values).
void score_backward(const ScorerParams& params, const FeatureVector& features,
                    double weight, std::vector<double>& grad);

}  // namespace rclab
