#include "rclab/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rclab {

void validate(const ObjectiveConfig& config) {
  if (!(config.beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (config.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (config.rdpo_alpha < 0.0)
    throw std::invalid_argument("rdpo_alpha must be >= 0");
}

double log_sigmoid(double z) {
  // -softplus(-z), split so neither branch can overflow.
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bt_prob(double score_a, double score_b) {
  const double d = score_a - score_b;
  // The d < 0 branch returns the exact complement of the d >= 0 branch:
  // 1 - q is exact for q in [0.5, 1], so the two orderings sum to 1 exactly.
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  return 1.0 - 1.0 / (1.0 + std::exp(d));
}

namespace {

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double logsumexp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) throw std::domain_error("logsumexp over empty/-inf");
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

}  // namespace

LossResult rm_loss(const ScorerParams& params,
                   const std::vector<FeaturePair>& batch) {
  if (batch.empty()) throw std::invalid_argument("rm_loss: empty batch");
  LossResult out;
  out.grad.assign(params.values.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& pair : batch) {
    const double m = score(params, pair.preferred) -
                     score(params, pair.dispreferred);
    out.loss += softplus(-m) * inv;
    const double w = sigmoid(-m) * inv;
    score_backward(params, pair.preferred, -w, out.grad);
    score_backward(params, pair.dispreferred, w, out.grad);
  }
  return out;
}

LossResult rc_rm_loss(const ScorerParams& params,
                      const std::vector<RcFeaturePair>& batch,
                      const ObjectiveConfig& config) {
  validate(config);
  if (batch.empty()) throw std::invalid_argument("rc_rm_loss: empty batch");
  std::size_t n_c = 0, n_r = 0;
  for (const auto& pair : batch)
    (pair.arm == RcArm::ChosenArm ? n_c : n_r) += 1;

  LossResult out;
  out.grad.assign(params.values.size(), 0.0);
  double loss_c = 0.0, loss_r = 0.0;
  for (const auto& pair : batch) {
    const bool chosen_arm = pair.arm == RcArm::ChosenArm;
    // Skipping the rejected arm outright at lambda == 0 keeps the remaining
    // computation bit-identical to a chosen-arm-only batch.
    if (!chosen_arm && (config.lambda == 0.0 || n_r == 0)) continue;
    const double m = score(params, pair.preferred) -
                     score(params, pair.dispreferred);
    const double inv = chosen_arm
                           ? 1.0 / static_cast<double>(n_c)
                           : config.lambda / static_cast<double>(n_r);
    if (chosen_arm)
      loss_c += softplus(-m) / static_cast<double>(n_c);
    else
      loss_r += softplus(-m) / static_cast<double>(n_r);
    const double w = sigmoid(-m) * inv;
    score_backward(params, pair.preferred, -w, out.grad);
    score_backward(params, pair.dispreferred, w, out.grad);
  }
  out.loss = loss_c;
  if (config.lambda != 0.0 && n_r > 0) out.loss += config.lambda * loss_r;
  return out;
}

namespace {

double dpo_margin(const PolicyParams& theta, const PolicyParams& ref,
                  const PolicyTriple& t, double beta) {
  const double dw = logprob_cond(theta, t.prompt, t.chosen) -
                    logprob_cond(ref, t.prompt, t.chosen);
  const double dl = logprob_cond(theta, t.prompt, t.rejected) -
                    logprob_cond(ref, t.prompt, t.rejected);
  return beta * (dw - dl);
}

LossResult dpo_like_loss(const PolicyParams& theta, const PolicyParams& ref,
                         const std::vector<PolicyTriple>& batch,
                         const ObjectiveConfig& config,
                         const VocabLayout* vocab_for_penalty) {
  validate(config);
  if (batch.empty()) throw std::invalid_argument("dpo_loss: empty batch");
  LossResult out;
  out.grad.assign(theta.values.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& t : batch) {
    double m = dpo_margin(theta, ref, t, config.beta);
    if (vocab_for_penalty && config.rdpo_alpha != 0.0) {
      const int diff = vocab_for_penalty->word_count(t.chosen) -
                       vocab_for_penalty->word_count(t.rejected);
      m -= config.rdpo_alpha * static_cast<double>(diff);
    }
    out.loss += softplus(-m) * inv;
    const double w = sigmoid(-m) * config.beta * inv;
    logprob_cond_backward(theta, t.prompt, t.chosen, -w, out.grad);
    logprob_cond_backward(theta, t.prompt, t.rejected, w, out.grad);
  }
  return out;
}

}  // namespace

LossResult dpo_loss(const PolicyParams& theta, const PolicyParams& ref,
                    const std::vector<PolicyTriple>& batch,
                    const ObjectiveConfig& config) {
  return dpo_like_loss(theta, ref, batch, config, nullptr);
}

LossResult rdpo_loss(const PolicyParams& theta, const PolicyParams& ref,
                     const std::vector<PolicyTriple>& batch,
                     const ObjectiveConfig& config, const VocabLayout& vocab) {
  return dpo_like_loss(theta, ref, batch, config, &vocab);
}

LossResult rc_dpo_loss(const PolicyParams& theta, const PolicyParams& ref,
                       const std::vector<JointTriple>& batch,
                       const ObjectiveConfig& config) {
  validate(config);
  if (batch.empty()) throw std::invalid_argument("rc_dpo_loss: empty batch");
  LossResult out;
  out.grad.assign(theta.values.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& t : batch) {
    const double dw = logprob_joint(theta, t.preferred_prompt, t.response) -
                      logprob_joint(ref, t.preferred_prompt, t.response);
    const double dl = logprob_joint(theta, t.dispreferred_prompt, t.response) -
                      logprob_joint(ref, t.dispreferred_prompt, t.response);
    const double m = config.beta * (dw - dl);
    out.loss += softplus(-m) * inv;
    const double w = sigmoid(-m) * config.beta * inv;
    logprob_joint_backward(theta, t.preferred_prompt, t.response, -w, out.grad);
    logprob_joint_backward(theta, t.dispreferred_prompt, t.response, w, out.grad);
  }
  return out;
}

RewardFn make_scorer_reward(const VocabLayout& vocab, ScorerParams params) {
  return [vocab, params = std::move(params)](const TokenSequence& prompt,
                                             const TokenSequence& y) {
    return score(params, featurize(vocab, parse_prompt(vocab, prompt), y));
  };
}

std::vector<double> prompt_posterior(const PolicyParams& params,
                                     const std::vector<TokenSequence>& space,
                                     const TokenSequence& response) {
  if (space.empty()) throw std::invalid_argument("empty prompt space");
  std::vector<double> logj(space.size());
  for (std::size_t i = 0; i < space.size(); ++i)
    logj[i] = logprob_joint(params, space[i], response);
  const double lse = logsumexp(logj);
  std::vector<double> p(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) p[i] = std::exp(logj[i] - lse);
  return p;
}

double dist_objective(const std::vector<double>& p,
                      const std::vector<double>& p_ref,
                      const std::vector<double>& reward, double beta) {
  if (p.size() != p_ref.size() || p.size() != reward.size())
    throw std::invalid_argument("distribution size mismatch");
  double value = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (p_ref[i] == 0.0)
      throw std::domain_error("KL undefined: support escapes the reference");
    value += p[i] * reward[i] - beta * p[i] * std::log(p[i] / p_ref[i]);
  }
  return value;
}

namespace {

std::vector<double> reward_table(const RewardFn& reward,
                                 const std::vector<TokenSequence>& space,
                                 const TokenSequence& fixed, bool fixed_is_response) {
  std::vector<double> r(space.size());
  for (std::size_t i = 0; i < space.size(); ++i)
    r[i] = fixed_is_response ? reward(space[i], fixed) : reward(fixed, space[i]);
  return r;
}

}  // namespace

double rl_objective_rc(const PolicyParams& theta, const PolicyParams& ref,
                       const RewardFn& reward, const TokenSequence& response,
                       double beta,
                       const std::vector<TokenSequence>& prompt_space) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  const auto p = prompt_posterior(theta, prompt_space, response);
  const auto q = prompt_posterior(ref, prompt_space, response);
  return dist_objective(p, q, reward_table(reward, prompt_space, response, true),
                        beta);
}

double rl_objective_std(const PolicyParams& theta, const PolicyParams& ref,
                        const RewardFn& reward, const TokenSequence& prompt,
                        double beta,
                        const std::vector<TokenSequence>& response_space) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (response_space.empty()) throw std::invalid_argument("empty response space");
  auto conditional = [&](const PolicyParams& m) {
    std::vector<double> lp(response_space.size());
    for (std::size_t i = 0; i < response_space.size(); ++i)
      lp[i] = logprob_cond(m, prompt, response_space[i]);
    const double lse = logsumexp(lp);
    for (auto& v : lp) v = std::exp(v - lse);
    return lp;
  };
  return dist_objective(
      conditional(theta), conditional(ref),
      reward_table(reward, response_space, prompt, false), beta);
}

double partition_function(const PolicyParams& ref, const RewardFn& reward,
                          const TokenSequence& response, double beta,
                          const std::vector<TokenSequence>& prompt_space) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  const auto q = prompt_posterior(ref, prompt_space, response);
  const auto r = reward_table(reward, prompt_space, response, true);
  std::vector<double> terms(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    terms[i] = std::log(q[i]) + r[i] / beta;
  return std::exp(logsumexp(terms));
}

std::vector<double> optimal_policy(const PolicyParams& ref, const RewardFn& reward,
                                   const TokenSequence& response, double beta,
                                   const std::vector<TokenSequence>& prompt_space) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  const auto q = prompt_posterior(ref, prompt_space, response);
  const auto r = reward_table(reward, prompt_space, response, true);
  std::vector<double> logw(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    logw[i] = std::log(q[i]) + r[i] / beta;
  const double lse = logsumexp(logw);
  std::vector<double> p(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) p[i] = std::exp(logw[i] - lse);
  return p;
}

}  // namespace rclab
