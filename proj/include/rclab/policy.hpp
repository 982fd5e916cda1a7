#pragma once

// Order-2 autoregressive token model, small enough to enumerate exactly.
// Each next-token distribution is softmax(concat(E[c1], E[c2]) @ U + b) where
// (c1, c2) are the two preceding tokens (BOS-padded). Conditional
// log-probabilities sum per-token terms with the prompt as context; joint
// log-probabilities additionally score the prompt itself from BOS.

#include <cstdint>
#include <vector>

#include "rclab/rng.hpp"
#include "rclab/tokens.hpp"

namespace rclab {

enum class PolicyRole { Trainable, Reference };

struct PolicyParams {
  int vocab_size = 64;
  int embed_dim = 8;
  PolicyRole role = PolicyRole::Trainable;
  // Layout: E ((V+1) x d, row BOS last), U (2d x V), b (V).
  std::vector<double> values;

  static std::size_t param_count(int vocab_size, int embed_dim) {
    return static_cast<std::size_t>(vocab_size + 1) * embed_dim +
           static_cast<std::size_t>(2 * embed_dim) * vocab_size +
           static_cast<std::size_t>(vocab_size);
  }
  Token bos() const { return vocab_size; }
};

PolicyParams init_policy(int vocab_size, int embed_dim, std::uint64_t seed,
                         PolicyRole role = PolicyRole::Trainable);

PolicyParams as_reference(PolicyParams params);

// log pi(response | prompt): response tokens scored left to right with the
// prompt (BOS-padded) as preceding context.
double logprob_cond(const PolicyParams& params, const TokenSequence& prompt,
                    const TokenSequence& response);

// log pi(prompt): the prompt scored from BOS context.
double logprob_marginal(const PolicyParams& params, const TokenSequence& prompt);

// log pi(prompt, response) = logprob_marginal + logprob_cond.
double logprob_joint(const PolicyParams& params, const TokenSequence& prompt,
                     const TokenSequence& response);

// Accumulate weight * d(logprob)/d(params) into grad. Throws if params are
// reference-role; reference policies are frozen by contract.
void logprob_cond_backward(const PolicyParams& params,
                           const TokenSequence& prompt,
                           const TokenSequence& response, double weight,
                           std::vector<double>& grad);
void logprob_joint_backward(const PolicyParams& params,
                            const TokenSequence& prompt,
                            const TokenSequence& response, double weight,
                            std::vector<double>& grad);

struct SamplerConfig {
  int max_tokens = 64;
  bool greedy = true;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

// Draw max_tokens response tokens after the given prompt context. Greedy mode
// is fully deterministic; otherwise temperature sampling from the seeded rng.
TokenSequence sample_response(const PolicyParams& params,
                              const TokenSequence& prompt,
                              const SamplerConfig& config);

// All token sequences over [0, vocab) with length in [min_len, max_len];
// the enumerable spaces the exact objectives integrate over.
std::vector<TokenSequence> enumerate_sequences(int vocab, int min_len,
                                               int max_len);

}  // namespace rclab
