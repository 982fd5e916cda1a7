#pragma once

// Evaluation harness: pairwise accuracy, cross-set consistency, length-score
// correlation, multi-length stability, the word_num sweep with its shape
// verdict, instruction-following rate, win ratio, and the ablation grids.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rclab/builders.hpp"
#include "rclab/objectives.hpp"
#include "rclab/policy.hpp"
#include "rclab/scorer.hpp"
#include "rclab/training.hpp"

namespace rclab {

struct EvalReport {
  std::string dataset_id;
  int n = 0;
  double accuracy = 0.0;
  std::optional<double> consistency;
  double mean_margin = 0.0;
  std::vector<double> margins;  // per example, preferred minus dispreferred
};

// Ties count one half. Throws on an empty dataset.
EvalReport eval_accuracy(const VocabLayout& vocab, const ScorerParams& scorer,
                         const PreferenceDataset& data,
                         const std::string& dataset_id);

// Fraction of index-aligned examples whose score comparison lands on the same
// side in both datasets (sign of the margin, ties matching ties).
double eval_consistency(const VocabLayout& vocab, const ScorerParams& scorer,
                        const PreferenceDataset& a, const PreferenceDataset& b);

// Pearson correlation between response word count and score, over every
// response in the dataset. Requires at least three distinct word counts.
double length_score_correlation(const VocabLayout& vocab,
                                const ScorerParams& scorer,
                                const PreferenceDataset& data);

struct StabilityReport {
  std::vector<double> mean_scores;  // one per variant index
  double slope = 0.0;               // least-squares over variant index
};

StabilityReport eval_multilength_stability(const VocabLayout& vocab,
                                           const ScorerParams& scorer,
                                           const MultiLengthDataset& data);

struct SweepCurve {
  std::vector<double> word_nums;    // mean per ladder position, increasing
  std::vector<double> mean_diffs;   // mean score(chosen) - score(rejected)
  bool rise_then_return = false;
  int peak_index = -1;
  double prominence = 0.0;
  double endpoint_gap = 0.0;
};

// Shape verdict: peak strictly inside the satisfaction-split positions (3-5,
// 1-indexed), positive prominence, and endpoints within kShapeTol of each
// other relative to that prominence.
inline constexpr double kShapeTol = 0.20;

SweepCurve eval_mls_sweep(const VocabLayout& vocab, const ScorerParams& scorer,
                          const SweepDataset& data);

// Fraction of constrained prompts whose sampled response satisfies the
// constraint. Prompts without a constraint are a config error.
double eval_length_accuracy(const VocabLayout& vocab, const PolicyParams& policy,
                            const std::vector<AugmentedPrompt>& prompts,
                            const SamplerConfig& sampler);

struct WinRatioReport {
  double win_ratio = 0.0;  // strict oracle wins of A over B; ties count 0
  int n = 0;
};

WinRatioReport eval_win_ratio(const VocabLayout& vocab, const PolicyParams& a,
                              const PolicyParams& b, const QualityOracle& oracle,
                              const std::vector<AugmentedPrompt>& prompts,
                              const SamplerConfig& sampler);

// ---- experiment pipeline ----

// End-to-end scorer training used by the CLI and the ablation grids: builds
// feature pairs from a mixed stream and runs the shared loop.
struct ScorerTrainResult {
  ScorerParams params;
  std::vector<TrainLogEntry> log;
};

ScorerTrainResult train_scorer_rm(const VocabLayout& vocab,
                                  const PreferenceDataset& d_rm,
                                  const TrainConfig& config, int hidden_dim);

ScorerTrainResult train_scorer_rc(const VocabLayout& vocab,
                                  const PreferenceDataset& d_rm,
                                  const std::vector<RcExample>& d_rc,
                                  const TrainConfig& config,
                                  const ObjectiveConfig& objective,
                                  int hidden_dim);

enum class AblationKind { ArmAblation, RcRatio, LambdaSweep };

struct AblationCell {
  std::string name;
  double quality_accuracy = 0.0;
  double length_accuracy = 0.0;
};

struct AblationReport {
  AblationKind kind;
  std::vector<AblationCell> cells;
};

struct AblationInputs {
  const VocabLayout& vocab;
  const PreferenceDataset& d_rm;
  const std::vector<RcExample>& d_rc;
  const PreferenceDataset& quality_eval;
  const PreferenceDataset& length_eval;
  TrainConfig train;
  ObjectiveConfig objective;
  int hidden_dim = 16;
  std::vector<double> lambda_grid{0.0, 0.5, 1.0, 2.0};
};

AblationReport run_ablation(AblationKind kind, const AblationInputs& inputs);

}  // namespace rclab
