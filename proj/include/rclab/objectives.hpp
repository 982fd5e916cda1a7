#pragma once

// Pairwise preference losses (scorer- and policy-based) plus the exact
// enumeration-based objectives used as oracles: the response-conditioned RL
// objective, its partition function, and the closed-form optimal policy.

#include <functional>
#include <vector>

#include "rclab/constraints.hpp"
#include "rclab/corpus.hpp"
#include "rclab/policy.hpp"
#include "rclab/scorer.hpp"

namespace rclab {

struct ObjectiveConfig {
  double beta = 0.1;
  double lambda = 1.0;
  double rdpo_alpha = 0.0;
};

void validate(const ObjectiveConfig& config);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // w.r.t. the trainable model's flat params
};

// Numerically safe primitives. bt_prob(a, b) + bt_prob(b, a) is exactly 1 for
// all finite inputs; log_sigmoid never overflows.
double log_sigmoid(double z);
double sigmoid(double z);
double bt_prob(double score_a, double score_b);

// ---- scorer losses ----

struct FeaturePair {
  FeatureVector preferred;
  FeatureVector dispreferred;
};

struct RcFeaturePair {
  FeatureVector preferred;
  FeatureVector dispreferred;
  RcArm arm;
};

// Mean over the batch of -log sigma(s_pref - s_dispref).
LossResult rm_loss(const ScorerParams& params,
                   const std::vector<FeaturePair>& batch);

// Chosen-arm mean plus lambda times rejected-arm mean, each arm averaged over
// its own count; an absent arm contributes exactly zero.
LossResult rc_rm_loss(const ScorerParams& params,
                      const std::vector<RcFeaturePair>& batch,
                      const ObjectiveConfig& config);

// ---- policy losses ----

struct PolicyTriple {
  TokenSequence prompt;  // serialized, constraint header and all
  TokenSequence chosen;
  TokenSequence rejected;
};

struct JointTriple {
  TokenSequence preferred_prompt;
  TokenSequence dispreferred_prompt;
  TokenSequence response;
};

LossResult dpo_loss(const PolicyParams& theta, const PolicyParams& ref,
                    const std::vector<PolicyTriple>& batch,
                    const ObjectiveConfig& config);

// DPO with the inner margin shifted by -rdpo_alpha * (|y_w| - |y_l|) in
// words; identical to dpo_loss when rdpo_alpha is 0.
LossResult rdpo_loss(const PolicyParams& theta, const PolicyParams& ref,
                     const std::vector<PolicyTriple>& batch,
                     const ObjectiveConfig& config, const VocabLayout& vocab);

// Prompt-comparison DPO on joint log-probabilities: the margin contrasts the
// same response under preferred and dispreferred prompts.
LossResult rc_dpo_loss(const PolicyParams& theta, const PolicyParams& ref,
                       const std::vector<JointTriple>& batch,
                       const ObjectiveConfig& config);

// ---- exact enumeration objectives ----

using RewardFn =
    std::function<double(const TokenSequence& prompt, const TokenSequence& y)>;

RewardFn make_scorer_reward(const VocabLayout& vocab, ScorerParams params);

// Conditional distribution over an enumerated space, obtained by normalizing
// the model's joint probabilities for a fixed response.
std::vector<double> prompt_posterior(const PolicyParams& params,
                                     const std::vector<TokenSequence>& space,
                                     const TokenSequence& response);

// E_{x~p}[r(x,y)] - beta * KL(p || p_ref) for explicit distributions.
double dist_objective(const std::vector<double>& p,
                      const std::vector<double>& p_ref,
                      const std::vector<double>& reward, double beta);

double rl_objective_rc(const PolicyParams& theta, const PolicyParams& ref,
                       const RewardFn& reward, const TokenSequence& response,
                       double beta, const std::vector<TokenSequence>& prompt_space);

double rl_objective_std(const PolicyParams& theta, const PolicyParams& ref,
                        const RewardFn& reward, const TokenSequence& prompt,
                        double beta, const std::vector<TokenSequence>& response_space);

// Z(y) = sum_x pi_ref(x|y) exp(r(x,y)/beta), accumulated in log space.
double partition_function(const PolicyParams& ref, const RewardFn& reward,
                          const TokenSequence& response, double beta,
                          const std::vector<TokenSequence>& prompt_space);

// pi*(x|y) proportional to pi_ref(x|y) exp(r(x,y)/beta), normalized over the
// space; the maximizer of rl_objective_rc on the prompt simplex.
std::vector<double> optimal_policy(const PolicyParams& ref, const RewardFn& reward,
                                   const TokenSequence& response, double beta,
                                   const std::vector<TokenSequence>& prompt_space);

}  // namespace rclab
