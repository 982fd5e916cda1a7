#include "rclab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rclab {

PolicyParams init_policy(int vocab_size, int embed_dim, std::uint64_t seed,
                         PolicyRole role) {
  if (vocab_size < 2 || embed_dim < 1)
    throw std::invalid_argument("bad policy dimensions");
  PolicyParams p;
  p.vocab_size = vocab_size;
  p.embed_dim = embed_dim;
  p.role = role;
  p.values.resize(PolicyParams::param_count(vocab_size, embed_dim));
  Rng rng(derive_seed(seed, "policy-init"));
  for (auto& v : p.values) v = rng.uniform01() * 0.2 - 0.1;
  return p;
}

PolicyParams as_reference(PolicyParams params) {
  params.role = PolicyRole::Reference;
  return params;
}

namespace {

struct Views {
  const double* E;  // (V+1) x d
  const double* U;  // 2d x V
  const double* b;  // V
  int V, d;
};

Views views_of(const PolicyParams& p) {
  if (p.values.size() != PolicyParams::param_count(p.vocab_size, p.embed_dim))
    throw std::invalid_argument("policy param vector has wrong length");
  Views v;
  v.V = p.vocab_size;
  v.d = p.embed_dim;
  v.E = p.values.data();
  v.U = v.E + static_cast<std::size_t>(v.V + 1) * v.d;
  v.b = v.U + static_cast<std::size_t>(2 * v.d) * v.V;
  return v;
}

void check_tokens(const PolicyParams& p, const TokenSequence& s) {
  for (Token t : s)
    if (t < 0 || t >= p.vocab_size)
      throw std::domain_error("token id outside policy vocabulary");
}

void logits_at(const Views& v, Token c1, Token c2, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(v.V), 0.0);
  for (int t = 0; t < v.V; ++t) out[t] = v.b[t];
  const double* e1 = v.E + static_cast<std::size_t>(c1) * v.d;
  const double* e2 = v.E + static_cast<std::size_t>(c2) * v.d;
  for (int k = 0; k < v.d; ++k) {
    const double* u1 = v.U + static_cast<std::size_t>(k) * v.V;
    const double* u2 = v.U + static_cast<std::size_t>(v.d + k) * v.V;
    const double a1 = e1[k], a2 = e2[k];
    for (int t = 0; t < v.V; ++t) out[t] += a1 * u1[t] + a2 * u2[t];
  }
}

double log_softmax_at(const std::vector<double>& logits, Token target) {
  double mx = logits[0];
  for (double z : logits) mx = std::max(mx, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  return logits[static_cast<std::size_t>(target)] - mx - std::log(sum);
}

// Sum of per-token conditionals for positions [from, end) of seq, contexts
// BOS-padded on the left.
double span_logprob(const PolicyParams& p, const TokenSequence& seq,
                    std::size_t from) {
  const Views v = views_of(p);
  const Token bos = p.bos();
  std::vector<double> logits;
  double total = 0.0;
  for (std::size_t i = from; i < seq.size(); ++i) {
    const Token c1 = i >= 2 ? seq[i - 2] : bos;
    const Token c2 = i >= 1 ? seq[i - 1] : bos;
    logits_at(v, c1, c2, logits);
    total += log_softmax_at(logits, seq[i]);
  }
  return total;
}

void span_backward(const PolicyParams& p, const TokenSequence& seq,
                   std::size_t from, double weight, std::vector<double>& grad) {
  if (p.role == PolicyRole::Reference)
    throw std::logic_error("reference policy is frozen; gradients refused");
  if (grad.size() != p.values.size())
    throw std::invalid_argument("gradient vector has wrong length");
  const Views v = views_of(p);
  const Token bos = p.bos();
  double* gE = grad.data();
  double* gU = gE + static_cast<std::size_t>(v.V + 1) * v.d;
  double* gb = gU + static_cast<std::size_t>(2 * v.d) * v.V;
  std::vector<double> logits, probs(static_cast<std::size_t>(v.V));
  for (std::size_t i = from; i < seq.size(); ++i) {
    const Token c1 = i >= 2 ? seq[i - 2] : bos;
    const Token c2 = i >= 1 ? seq[i - 1] : bos;
    logits_at(v, c1, c2, logits);
    double mx = logits[0];
    for (double z : logits) mx = std::max(mx, z);
    double sum = 0.0;
    for (int t = 0; t < v.V; ++t) {
      probs[t] = std::exp(logits[t] - mx);
      sum += probs[t];
    }
    for (int t = 0; t < v.V; ++t) probs[t] /= sum;

    // d logp(target)/d logit_t = [t == target] - p_t
    const double* e1 = v.E + static_cast<std::size_t>(c1) * v.d;
    const double* e2 = v.E + static_cast<std::size_t>(c2) * v.d;
    for (int t = 0; t < v.V; ++t) {
      const double g =
          weight * ((t == seq[i] ? 1.0 : 0.0) - probs[t]);
      if (g == 0.0) continue;
      gb[t] += g;
      for (int k = 0; k < v.d; ++k) {
        gU[static_cast<std::size_t>(k) * v.V + t] += g * e1[k];
        gU[static_cast<std::size_t>(v.d + k) * v.V + t] += g * e2[k];
      }
    }
    for (int k = 0; k < v.d; ++k) {
      const double* u1 = v.U + static_cast<std::size_t>(k) * v.V;
      const double* u2 = v.U + static_cast<std::size_t>(v.d + k) * v.V;
      double acc1 = 0.0, acc2 = 0.0;
      for (int t = 0; t < v.V; ++t) {
        const double g = weight * ((t == seq[i] ? 1.0 : 0.0) - probs[t]);
        acc1 += g * u1[t];
        acc2 += g * u2[t];
      }
      gE[static_cast<std::size_t>(c1) * v.d + k] += acc1;
      gE[static_cast<std::size_t>(c2) * v.d + k] += acc2;
    }
  }
}

TokenSequence concat(const TokenSequence& a, const TokenSequence& b) {
  TokenSequence out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

double logprob_cond(const PolicyParams& params, const TokenSequence& prompt,
                    const TokenSequence& response) {
  check_tokens(params, prompt);
  check_tokens(params, response);
  return span_logprob(params, concat(prompt, response), prompt.size());
}

double logprob_marginal(const PolicyParams& params, const TokenSequence& prompt) {
  check_tokens(params, prompt);
  return span_logprob(params, prompt, 0);
}

double logprob_joint(const PolicyParams& params, const TokenSequence& prompt,
                     const TokenSequence& response) {
  check_tokens(params, prompt);
  check_tokens(params, response);
  return span_logprob(params, concat(prompt, response), 0);
}

void logprob_cond_backward(const PolicyParams& params,
                           const TokenSequence& prompt,
                           const TokenSequence& response, double weight,
                           std::vector<double>& grad) {
  check_tokens(params, prompt);
  check_tokens(params, response);
  span_backward(params, concat(prompt, response), prompt.size(), weight, grad);
}

void logprob_joint_backward(const PolicyParams& params,
                            const TokenSequence& prompt,
                            const TokenSequence& response, double weight,
                            std::vector<double>& grad) {
  check_tokens(params, prompt);
  check_tokens(params, response);
  span_backward(params, concat(prompt, response), 0, weight, grad);
}

TokenSequence sample_response(const PolicyParams& params,
                              const TokenSequence& prompt,
                              const SamplerConfig& config) {
  check_tokens(params, prompt);
  if (config.max_tokens < 0)
    throw std::invalid_argument("max_tokens must be >= 0");
  if (!config.greedy && config.temperature <= 0.0)
    throw std::invalid_argument("temperature must be positive");
  const Views v = views_of(params);
  const Token bos = params.bos();
  Rng rng(derive_seed(config.seed, "sampler"));
  TokenSequence full = prompt;
  std::vector<double> logits;
  for (int n = 0; n < config.max_tokens; ++n) {
    const std::size_t i = full.size();
    const Token c1 = i >= 2 ? full[i - 2] : bos;
    const Token c2 = i >= 1 ? full[i - 1] : bos;
    logits_at(v, c1, c2, logits);
    Token next = 0;
    if (config.greedy) {
      for (int t = 1; t < v.V; ++t)
        if (logits[t] > logits[next]) next = t;
    } else {
      double mx = logits[0];
      for (double z : logits) mx = std::max(mx, z);
      double sum = 0.0;
      std::vector<double> w(static_cast<std::size_t>(v.V));
      for (int t = 0; t < v.V; ++t) {
        w[t] = std::exp((logits[t] - mx) / config.temperature);
        sum += w[t];
      }
      double u = rng.uniform01() * sum, acc = 0.0;
      next = v.V - 1;
      for (int t = 0; t < v.V; ++t) {
        acc += w[t];
        if (u < acc) {
          next = t;
          break;
        }
      }
    }
    full.push_back(next);
  }
  return TokenSequence(full.begin() + static_cast<std::ptrdiff_t>(prompt.size()),
                       full.end());
}

std::vector<TokenSequence> enumerate_sequences(int vocab, int min_len,
                                               int max_len) {
  if (vocab < 1 || min_len < 0 || max_len < min_len)
    throw std::invalid_argument("bad enumeration bounds");
  double count = 0.0;
  for (int len = min_len; len <= max_len; ++len)
    count += std::pow(static_cast<double>(vocab), len);
  if (count > 2e6) throw std::invalid_argument("space too large to enumerate");
  std::vector<TokenSequence> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int len = min_len; len <= max_len; ++len) {
    TokenSequence seq(static_cast<std::size_t>(len), 0);
    for (;;) {
      out.push_back(seq);
      int pos = len - 1;
      while (pos >= 0 && seq[pos] == vocab - 1) {
        seq[pos] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++seq[pos];
    }
  }
  return out;
}

}  // namespace rclab
