#include "rclab/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace rclab {

EvalReport eval_accuracy(const VocabLayout& vocab, const ScorerParams& scorer,
                         const PreferenceDataset& data,
                         const std::string& dataset_id) {
  if (data.empty()) throw std::invalid_argument("eval_accuracy: empty dataset");
  EvalReport report;
  report.dataset_id = dataset_id;
  report.n = static_cast<int>(data.size());
  report.margins.reserve(data.size());
  double wins = 0.0, margin_sum = 0.0;
  for (const auto& ex : data) {
    const double sw = score(scorer, featurize(vocab, ex.prompt, ex.chosen));
    const double sl = score(scorer, featurize(vocab, ex.prompt, ex.rejected));
    const double m = sw - sl;
    report.margins.push_back(m);
    margin_sum += m;
    if (m > 0.0)
      wins += 1.0;
    else if (m == 0.0)
      wins += 0.5;
  }
  report.accuracy = wins / static_cast<double>(data.size());
  report.mean_margin = margin_sum / static_cast<double>(data.size());
  return report;
}

namespace {

int margin_sign(double m) { return m > 0.0 ? 1 : (m < 0.0 ? -1 : 0); }

}  // namespace

double eval_consistency(const VocabLayout& vocab, const ScorerParams& scorer,
                        const PreferenceDataset& a, const PreferenceDataset& b) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument("consistency needs equal-size datasets");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ma = score(scorer, featurize(vocab, a[i].prompt, a[i].chosen)) -
                      score(scorer, featurize(vocab, a[i].prompt, a[i].rejected));
    const double mb = score(scorer, featurize(vocab, b[i].prompt, b[i].chosen)) -
                      score(scorer, featurize(vocab, b[i].prompt, b[i].rejected));
    if (margin_sign(ma) == margin_sign(mb)) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(a.size());
}

double length_score_correlation(const VocabLayout& vocab,
                                const ScorerParams& scorer,
                                const PreferenceDataset& data) {
  std::vector<double> lens, scores;
  for (const auto& ex : data) {
    for (const TokenSequence* y : {&ex.chosen, &ex.rejected}) {
      lens.push_back(static_cast<double>(vocab.word_count(*y)));
      scores.push_back(score(scorer, featurize(vocab, ex.prompt, *y)));
    }
  }
  std::vector<double> distinct = lens;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3)
    throw std::invalid_argument("need at least three distinct word counts");

  const std::size_t n = lens.size();
  double ml = 0.0, ms = 0.0;
  for (std::size_t i = 0; i < n; ++i) ml += lens[i], ms += scores[i];
  ml /= static_cast<double>(n);
  ms /= static_cast<double>(n);
  double num = 0.0, vl = 0.0, vs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (lens[i] - ml) * (scores[i] - ms);
    vl += (lens[i] - ml) * (lens[i] - ml);
    vs += (scores[i] - ms) * (scores[i] - ms);
  }
  if (vl == 0.0 || vs == 0.0)
    throw std::invalid_argument("correlation undefined: zero variance");
  return num / std::sqrt(vl * vs);
}

StabilityReport eval_multilength_stability(const VocabLayout& vocab,
                                           const ScorerParams& scorer,
                                           const MultiLengthDataset& data) {
  if (data.empty()) throw std::invalid_argument("empty multi-length dataset");
  const std::size_t k = data[0].variants.size();
  if (k < 2)
    throw std::invalid_argument("stability slope needs at least two variants");
  for (const auto& ex : data)
    if (ex.variants.size() != k)
      throw std::invalid_argument("ragged variant counts");

  StabilityReport report;
  report.mean_scores.assign(k, 0.0);
  for (const auto& ex : data)
    for (std::size_t j = 0; j < k; ++j)
      report.mean_scores[j] +=
          score(scorer, featurize(vocab, ex.prompt, ex.variants[j]));
  for (auto& s : report.mean_scores) s /= static_cast<double>(data.size());

  const double xbar = static_cast<double>(k - 1) / 2.0;
  double ybar = 0.0;
  for (double y : report.mean_scores) ybar += y;
  ybar /= static_cast<double>(k);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double dx = static_cast<double>(j) - xbar;
    num += dx * (report.mean_scores[j] - ybar);
    den += dx * dx;
  }
  report.slope = num / den;
  return report;
}

SweepCurve eval_mls_sweep(const VocabLayout& vocab, const ScorerParams& scorer,
                          const SweepDataset& data) {
  if (data.examples.empty())
    throw std::invalid_argument("empty sweep dataset");
  SweepCurve curve;
  curve.word_nums.assign(kSweepPoints, 0.0);
  curve.mean_diffs.assign(kSweepPoints, 0.0);
  for (const auto& ex : data.examples) {
    for (int j = 0; j < kSweepPoints; ++j) {
      const AugmentedPrompt prompt{
          ex.base, LengthConstraint{ConstraintKind::AtMost, ex.word_nums[j]}};
      const double diff =
          score(scorer, featurize(vocab, prompt, ex.chosen)) -
          score(scorer, featurize(vocab, prompt, ex.rejected));
      curve.word_nums[j] += static_cast<double>(ex.word_nums[j]);
      curve.mean_diffs[j] += diff;
    }
  }
  const double inv = 1.0 / static_cast<double>(data.examples.size());
  for (int j = 0; j < kSweepPoints; ++j) {
    curve.word_nums[j] *= inv;
    curve.mean_diffs[j] *= inv;
  }

  int peak = 0;
  for (int j = 1; j < kSweepPoints; ++j)
    if (curve.mean_diffs[j] > curve.mean_diffs[peak]) peak = j;
  curve.peak_index = peak;
  const double ends_mid =
      0.5 * (curve.mean_diffs.front() + curve.mean_diffs.back());
  curve.prominence = curve.mean_diffs[peak] - ends_mid;
  curve.endpoint_gap =
      std::fabs(curve.mean_diffs.back() - curve.mean_diffs.front());
  curve.rise_then_return = peak >= 2 && peak <= 4 &&
                           curve.prominence > 1e-12 &&
                           curve.endpoint_gap <= kShapeTol * curve.prominence;
  return curve;
}

double eval_length_accuracy(const VocabLayout& vocab, const PolicyParams& policy,
                            const std::vector<AugmentedPrompt>& prompts,
                            const SamplerConfig& sampler) {
  if (prompts.empty()) throw std::invalid_argument("no prompts to evaluate");
  std::size_t satisfied = 0;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const auto& p = prompts[i];
    if (!p.constraint)
      throw std::invalid_argument("length accuracy needs constrained prompts");
    SamplerConfig cfg = sampler;
    cfg.seed = derive_seed(sampler.seed, "eval-length-acc", i);
    const TokenSequence y =
        sample_response(policy, serialize_prompt(vocab, p), cfg);
    if (p.constraint->satisfied_by(vocab, y)) ++satisfied;
  }
  return static_cast<double>(satisfied) / static_cast<double>(prompts.size());
}

WinRatioReport eval_win_ratio(const VocabLayout& vocab, const PolicyParams& a,
                              const PolicyParams& b, const QualityOracle& oracle,
                              const std::vector<AugmentedPrompt>& prompts,
                              const SamplerConfig& sampler) {
  if (prompts.empty()) throw std::invalid_argument("no prompts to evaluate");
  WinRatioReport report;
  report.n = static_cast<int>(prompts.size());
  std::size_t wins = 0;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    SamplerConfig cfg = sampler;
    cfg.seed = derive_seed(sampler.seed, "win-ratio", i);
    const TokenSequence serialized = serialize_prompt(vocab, prompts[i]);
    const TokenSequence ya = sample_response(a, serialized, cfg);
    const TokenSequence yb = sample_response(b, serialized, cfg);
    if (oracle.score(prompts[i].base, ya) > oracle.score(prompts[i].base, yb))
      ++wins;
  }
  report.win_ratio = static_cast<double>(wins) / static_cast<double>(prompts.size());
  return report;
}

// ---- experiment pipeline ----

namespace {

using FeatureItem = std::variant<FeaturePair, RcFeaturePair>;

std::vector<FeatureItem> featurize_stream(const VocabLayout& vocab,
                                          const std::vector<TrainItem>& stream) {
  std::vector<FeatureItem> out;
  out.reserve(stream.size());
  for (const auto& item : stream) {
    if (std::holds_alternative<PreferenceExample>(item)) {
      const auto& ex = std::get<PreferenceExample>(item);
      out.emplace_back(FeaturePair{featurize(vocab, ex.prompt, ex.chosen),
                                   featurize(vocab, ex.prompt, ex.rejected)});
    } else {
      const auto& rc = std::get<RcExample>(item);
      out.emplace_back(
          RcFeaturePair{featurize(vocab, rc.preferred_prompt, rc.response),
                        featurize(vocab, rc.dispreferred_prompt, rc.response),
                        rc.arm});
    }
  }
  return out;
}

ScorerTrainResult train_scorer_stream(const VocabLayout& vocab,
                                      const std::vector<TrainItem>& stream,
                                      const TrainConfig& config,
                                      const ObjectiveConfig& objective,
                                      int hidden_dim) {
  const auto features = featurize_stream(vocab, stream);
  ScorerParams model =
      init_scorer(FeatureLayout::kDim, hidden_dim, config.seed);

  const BatchObjective batch_objective =
      [&](const std::vector<double>& flat,
          const std::vector<std::size_t>& batch) -> LossResult {
    ScorerParams current = model;
    current.values = flat;
    std::vector<FeaturePair> prefs;
    std::vector<RcFeaturePair> rcs;
    for (std::size_t idx : batch) {
      if (std::holds_alternative<FeaturePair>(features[idx]))
        prefs.push_back(std::get<FeaturePair>(features[idx]));
      else
        rcs.push_back(std::get<RcFeaturePair>(features[idx]));
    }
    LossResult total;
    total.grad.assign(flat.size(), 0.0);
    if (!prefs.empty()) {
      LossResult r = rm_loss(current, prefs);
      total.loss += r.loss;
      for (std::size_t i = 0; i < total.grad.size(); ++i)
        total.grad[i] += r.grad[i];
    }
    if (!rcs.empty()) {
      LossResult r = rc_rm_loss(current, rcs, objective);
      total.loss += r.loss;
      for (std::size_t i = 0; i < total.grad.size(); ++i)
        total.grad[i] += r.grad[i];
    }
    return total;
  };

  TrainResult result =
      train(model.values, batch_objective, features.size(), config);
  model.values = std::move(result.params);
  return {std::move(model), std::move(result.log)};
}

}  // namespace

ScorerTrainResult train_scorer_rm(const VocabLayout& vocab,
                                  const PreferenceDataset& d_rm,
                                  const TrainConfig& config, int hidden_dim) {
  const auto stream = mix_datasets(d_rm, {}, 0.0, config.seed);
  return train_scorer_stream(vocab, stream, config, ObjectiveConfig{},
                             hidden_dim);
}

ScorerTrainResult train_scorer_rc(const VocabLayout& vocab,
                                  const PreferenceDataset& d_rm,
                                  const std::vector<RcExample>& d_rc,
                                  const TrainConfig& config,
                                  const ObjectiveConfig& objective,
                                  int hidden_dim) {
  const auto stream = mix_datasets(d_rm, d_rc, config.mix_ratio, config.seed);
  return train_scorer_stream(vocab, stream, config, objective, hidden_dim);
}

AblationReport run_ablation(AblationKind kind, const AblationInputs& inputs) {
  AblationReport report;
  report.kind = kind;

  const auto evaluate = [&](const ScorerParams& model, const std::string& name) {
    AblationCell cell;
    cell.name = name;
    cell.quality_accuracy =
        eval_accuracy(inputs.vocab, model, inputs.quality_eval, name).accuracy;
    cell.length_accuracy =
        eval_accuracy(inputs.vocab, model, inputs.length_eval, name).accuracy;
    report.cells.push_back(cell);
  };

  switch (kind) {
    case AblationKind::ArmAblation: {
      std::vector<RcExample> only_chosen, only_rejected;
      for (const auto& rc : inputs.d_rc)
        (rc.arm == RcArm::ChosenArm ? only_chosen : only_rejected).push_back(rc);
      evaluate(train_scorer_rc(inputs.vocab, inputs.d_rm, only_rejected,
                               inputs.train, inputs.objective, inputs.hidden_dim)
                   .params,
               "without_chosen_arm");
      evaluate(train_scorer_rc(inputs.vocab, inputs.d_rm, only_chosen,
                               inputs.train, inputs.objective, inputs.hidden_dim)
                   .params,
               "without_rejected_arm");
      break;
    }
    case AblationKind::RcRatio: {
      for (int pct = 0; pct <= 100; pct += 10) {
        TrainConfig config = inputs.train;
        config.mix_ratio = static_cast<double>(pct) / 100.0;
        evaluate(train_scorer_rc(inputs.vocab, inputs.d_rm, inputs.d_rc, config,
                                 inputs.objective, inputs.hidden_dim)
                     .params,
                 "ratio_" + std::to_string(pct));
      }
      break;
    }
    case AblationKind::LambdaSweep: {
      for (double lambda : inputs.lambda_grid) {
        ObjectiveConfig objective = inputs.objective;
        objective.lambda = lambda;
        char name[32];
        std::snprintf(name, sizeof name, "lambda_%g", lambda);
        evaluate(train_scorer_rc(inputs.vocab, inputs.d_rm, inputs.d_rc,
                                 inputs.train, objective, inputs.hidden_dim)
                     .params,
                 name);
      }
      break;
    }
  }
  return report;
}

}  // namespace rclab
