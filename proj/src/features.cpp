#include "rclab/features.hpp"

namespace rclab {

namespace {

// Normalized content-class histogram; classes are V/8-wide id bands, of which
// the first six cover the content range.
void content_histogram(const VocabLayout& vocab, const TokenSequence& tokens,
                       double* out) {
  const int width = vocab.vocab_size / 8;
  double total = 0.0;
  for (Token t : tokens) {
    if (!vocab.in_vocab(t)) throw std::domain_error("token id outside vocabulary");
    if (vocab.is_content(t)) {
      out[t / width] += 1.0;
      total += 1.0;
    }
  }
  if (total > 0.0)
    for (int c = 0; c < FeatureLayout::kContentClasses; ++c) out[c] /= total;
}

}  // namespace

FeatureVector featurize(const VocabLayout& vocab, const AugmentedPrompt& prompt,
                        const TokenSequence& response) {
  constexpr int kC = FeatureLayout::kContentClasses;
  FeatureVector f(FeatureLayout::kDim, 0.0);
  content_histogram(vocab, prompt.base, f.data());
  content_histogram(vocab, response, f.data() + kC);
  for (int i = 0; i < kC; ++i)
    for (int j = 0; j < kC; ++j)
      f[2 * kC + i * kC + j] = f[i] * f[kC + j];
  f[FeatureLayout::kWordCount] =
      static_cast<double>(vocab.word_count(response)) / FeatureLayout::kLenScale;
  if (prompt.constraint) {
    const auto& c = *prompt.constraint;
    f[FeatureLayout::kAtMost] = c.kind == ConstraintKind::AtMost ? 1.0 : 0.0;
    f[FeatureLayout::kAtLeast] = c.kind == ConstraintKind::AtLeast ? 1.0 : 0.0;
    f[FeatureLayout::kWordNum] =
        static_cast<double>(c.word_num) / FeatureLayout::kLenScale;
    f[FeatureLayout::kSatisfied] = c.satisfied_by(vocab, response) ? 1.0 : 0.0;
  }
  return f;
}

}  // namespace rclab
