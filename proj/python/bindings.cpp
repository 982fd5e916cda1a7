// Python bindings for the core operations: corpus generation, dataset
// builders, scorer/policy models, losses, training pipelines, and the
// evaluation metrics. Token sequences cross the boundary as plain lists of
// ints; datasets as lists of the bound record types.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rclab/builders.hpp"
#include "rclab/constraints.hpp"
#include "rclab/corpus.hpp"
#include "rclab/evalsuite.hpp"
#include "rclab/io.hpp"
#include "rclab/objectives.hpp"
#include "rclab/policy.hpp"
#include "rclab/scorer.hpp"
#include "rclab/tokens.hpp"
#include "rclab/training.hpp"

namespace py = pybind11;
using namespace rclab;

PYBIND11_MODULE(rclab, m) {
  m.doc() = "response-conditioned preference lab";

  // ---- tokens & constraints ----

  py::class_<VocabLayout>(m, "VocabLayout")
      .def(py::init<int>(), py::arg("vocab_size"))
      .def_readonly("vocab_size", &VocabLayout::vocab_size)
      .def("content_end", &VocabLayout::content_end)
      .def("empty_prompt_token", &VocabLayout::empty_prompt_token)
      .def("at_least_marker", &VocabLayout::at_least_marker)
      .def("at_most_marker", &VocabLayout::at_most_marker)
      .def("is_content", &VocabLayout::is_content)
      .def("is_filler", &VocabLayout::is_filler)
      .def("is_word", &VocabLayout::is_word)
      .def("word_count", &VocabLayout::word_count)
      .def("empty_prompt", &VocabLayout::empty_prompt)
      .def("max_word_num", &VocabLayout::max_word_num);

  py::enum_<ConstraintKind>(m, "ConstraintKind")
      .value("AtMost", ConstraintKind::AtMost)
      .value("AtLeast", ConstraintKind::AtLeast);

  py::class_<LengthConstraint>(m, "LengthConstraint")
      .def(py::init([](ConstraintKind kind, int word_num) {
             return LengthConstraint{kind, word_num};
           }),
           py::arg("kind"), py::arg("word_num"))
      .def_readwrite("kind", &LengthConstraint::kind)
      .def_readwrite("word_num", &LengthConstraint::word_num)
      .def("satisfied_by", &LengthConstraint::satisfied_by, py::arg("vocab"),
           py::arg("response"));

  py::class_<AugmentedPrompt>(m, "AugmentedPrompt")
      .def(py::init([](TokenSequence base,
                       std::optional<LengthConstraint> constraint) {
             return AugmentedPrompt{std::move(base), constraint};
           }),
           py::arg("base"), py::arg("constraint") = std::nullopt)
      .def_readwrite("base", &AugmentedPrompt::base)
      .def_readwrite("constraint", &AugmentedPrompt::constraint)
      .def("__eq__", [](const AugmentedPrompt& a, const AugmentedPrompt& b) {
        return a == b;
      });

  m.def("serialize_prompt", &serialize_prompt, py::arg("vocab"),
        py::arg("prompt"));
  m.def("parse_prompt", &parse_prompt, py::arg("vocab"), py::arg("tokens"));

  py::enum_<RcArm>(m, "RcArm")
      .value("ChosenArm", RcArm::ChosenArm)
      .value("RejectedArm", RcArm::RejectedArm);

  py::class_<RcExample>(m, "RcExample")
      .def_readwrite("preferred_prompt", &RcExample::preferred_prompt)
      .def_readwrite("dispreferred_prompt", &RcExample::dispreferred_prompt)
      .def_readwrite("response", &RcExample::response)
      .def_readwrite("arm", &RcExample::arm);

  // ---- corpus ----

  py::class_<QualityOracle>(m, "QualityOracle")
      .def(py::init<const VocabLayout&, std::uint64_t>(), py::arg("vocab"),
           py::arg("seed"))
      .def("score", &QualityOracle::score, py::arg("prompt"),
           py::arg("response"));

  py::class_<PreferenceExample>(m, "PreferenceExample")
      .def(py::init<>())
      .def_readwrite("prompt", &PreferenceExample::prompt)
      .def_readwrite("chosen", &PreferenceExample::chosen)
      .def_readwrite("rejected", &PreferenceExample::rejected)
      .def_readwrite("true_quality_chosen", &PreferenceExample::true_quality_chosen)
      .def_readwrite("true_quality_rejected",
                     &PreferenceExample::true_quality_rejected);

  py::class_<IntRange>(m, "IntRange")
      .def(py::init([](int min, int max) { return IntRange{min, max}; }),
           py::arg("min"), py::arg("max"))
      .def_readwrite("min", &IntRange::min)
      .def_readwrite("max", &IntRange::max);

  py::class_<CorpusSpec>(m, "CorpusSpec")
      .def(py::init<>())
      .def_readwrite("n_examples", &CorpusSpec::n_examples)
      .def_readwrite("chosen_longer_prob", &CorpusSpec::chosen_longer_prob)
      .def_readwrite("vocab_size", &CorpusSpec::vocab_size)
      .def_readwrite("prompt_len_range", &CorpusSpec::prompt_len_range)
      .def_readwrite("response_len_range", &CorpusSpec::response_len_range)
      .def_readwrite("seed", &CorpusSpec::seed);

  m.def("generate_corpus", &generate_corpus, py::arg("spec"),
        py::arg("threads") = 1);

  py::class_<SplitFractions>(m, "SplitFractions")
      .def(py::init([](double sft, double rm, double eval) {
             return SplitFractions{sft, rm, eval};
           }),
           py::arg("sft") = 0.27, py::arg("rm") = 0.63, py::arg("eval") = 0.10)
      .def_readwrite("sft", &SplitFractions::sft)
      .def_readwrite("rm", &SplitFractions::rm)
      .def_readwrite("eval", &SplitFractions::eval);

  py::class_<CorpusSplits>(m, "CorpusSplits")
      .def_readonly("sft", &CorpusSplits::sft)
      .def_readonly("rm", &CorpusSplits::rm)
      .def_readonly("eval", &CorpusSplits::eval);

  m.def("split_corpus", &split_corpus, py::arg("corpus"), py::arg("fractions"),
        py::arg("seed"));
  m.def("chosen_longer_fraction", &chosen_longer_fraction, py::arg("vocab"),
        py::arg("data"));
  m.def("quality_length_correlation", &quality_length_correlation,
        py::arg("vocab"), py::arg("data"));

  // ---- features & scorer ----

  m.def("featurize", &featurize, py::arg("vocab"), py::arg("prompt"),
        py::arg("response"));

  py::class_<ScorerParams>(m, "ScorerParams")
      .def(py::init<>())
      .def_readwrite("input_dim", &ScorerParams::input_dim)
      .def_readwrite("hidden_dim", &ScorerParams::hidden_dim)
      .def_readwrite("values", &ScorerParams::values);

  m.def("init_scorer", &init_scorer, py::arg("input_dim"), py::arg("hidden_dim"),
        py::arg("seed"));
  m.def("score", &score, py::arg("params"), py::arg("features"));

  // ---- policy ----

  py::enum_<PolicyRole>(m, "PolicyRole")
      .value("Trainable", PolicyRole::Trainable)
      .value("Reference", PolicyRole::Reference);

  py::class_<PolicyParams>(m, "PolicyParams")
      .def(py::init<>())
      .def_readwrite("vocab_size", &PolicyParams::vocab_size)
      .def_readwrite("embed_dim", &PolicyParams::embed_dim)
      .def_readwrite("role", &PolicyParams::role)
      .def_readwrite("values", &PolicyParams::values);

  m.def("init_policy", &init_policy, py::arg("vocab_size"), py::arg("embed_dim"),
        py::arg("seed"), py::arg("role") = PolicyRole::Trainable);
  m.def("as_reference", &as_reference, py::arg("params"));
  m.def("logprob_cond", &logprob_cond, py::arg("params"), py::arg("prompt"),
        py::arg("response"));
  m.def("logprob_marginal", &logprob_marginal, py::arg("params"),
        py::arg("prompt"));
  m.def("logprob_joint", &logprob_joint, py::arg("params"), py::arg("prompt"),
        py::arg("response"));

  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init<>())
      .def_readwrite("max_tokens", &SamplerConfig::max_tokens)
      .def_readwrite("greedy", &SamplerConfig::greedy)
      .def_readwrite("temperature", &SamplerConfig::temperature)
      .def_readwrite("seed", &SamplerConfig::seed);

  m.def("sample_response", &sample_response, py::arg("params"),
        py::arg("prompt"), py::arg("config"));
  m.def("enumerate_sequences", &enumerate_sequences, py::arg("vocab"),
        py::arg("min_len"), py::arg("max_len"));

  // ---- objectives ----

  py::class_<ObjectiveConfig>(m, "ObjectiveConfig")
      .def(py::init<>())
      .def_readwrite("beta", &ObjectiveConfig::beta)
      .def_readwrite("lambda_", &ObjectiveConfig::lambda)
      .def_readwrite("rdpo_alpha", &ObjectiveConfig::rdpo_alpha);

  py::class_<LossResult>(m, "LossResult")
      .def_readonly("loss", &LossResult::loss)
      .def_readonly("grad", &LossResult::grad);

  py::class_<FeaturePair>(m, "FeaturePair")
      .def(py::init([](FeatureVector preferred, FeatureVector dispreferred) {
             return FeaturePair{std::move(preferred), std::move(dispreferred)};
           }),
           py::arg("preferred"), py::arg("dispreferred"))
      .def_readwrite("preferred", &FeaturePair::preferred)
      .def_readwrite("dispreferred", &FeaturePair::dispreferred);

  py::class_<RcFeaturePair>(m, "RcFeaturePair")
      .def(py::init([](FeatureVector preferred, FeatureVector dispreferred,
                       RcArm arm) {
             return RcFeaturePair{std::move(preferred), std::move(dispreferred),
                                  arm};
           }),
           py::arg("preferred"), py::arg("dispreferred"), py::arg("arm"))
      .def_readwrite("preferred", &RcFeaturePair::preferred)
      .def_readwrite("dispreferred", &RcFeaturePair::dispreferred)
      .def_readwrite("arm", &RcFeaturePair::arm);

  m.def("log_sigmoid", &log_sigmoid, py::arg("z"));
  m.def("sigmoid", &sigmoid, py::arg("z"));
  m.def("bt_prob", &bt_prob, py::arg("score_a"), py::arg("score_b"));
  m.def("rm_loss", &rm_loss, py::arg("params"), py::arg("batch"));
  m.def("rc_rm_loss", &rc_rm_loss, py::arg("params"), py::arg("batch"),
        py::arg("config"));

  py::class_<PolicyTriple>(m, "PolicyTriple")
      .def(py::init([](TokenSequence prompt, TokenSequence chosen,
                       TokenSequence rejected) {
             return PolicyTriple{std::move(prompt), std::move(chosen),
                                 std::move(rejected)};
           }),
           py::arg("prompt"), py::arg("chosen"), py::arg("rejected"))
      .def_readwrite("prompt", &PolicyTriple::prompt)
      .def_readwrite("chosen", &PolicyTriple::chosen)
      .def_readwrite("rejected", &PolicyTriple::rejected);

  py::class_<JointTriple>(m, "JointTriple")
      .def(py::init([](TokenSequence preferred_prompt,
                       TokenSequence dispreferred_prompt,
                       TokenSequence response) {
             return JointTriple{std::move(preferred_prompt),
                                std::move(dispreferred_prompt),
                                std::move(response)};
           }),
           py::arg("preferred_prompt"), py::arg("dispreferred_prompt"),
           py::arg("response"))
      .def_readwrite("preferred_prompt", &JointTriple::preferred_prompt)
      .def_readwrite("dispreferred_prompt", &JointTriple::dispreferred_prompt)
      .def_readwrite("response", &JointTriple::response);

  m.def("dpo_loss", &dpo_loss, py::arg("theta"), py::arg("ref"),
        py::arg("batch"), py::arg("config"));
  m.def("rdpo_loss", &rdpo_loss, py::arg("theta"), py::arg("ref"),
        py::arg("batch"), py::arg("config"), py::arg("vocab"));
  m.def("rc_dpo_loss", &rc_dpo_loss, py::arg("theta"), py::arg("ref"),
        py::arg("batch"), py::arg("config"));

  m.def("make_scorer_reward", &make_scorer_reward, py::arg("vocab"),
        py::arg("params"));
  m.def("prompt_posterior", &prompt_posterior, py::arg("params"),
        py::arg("space"), py::arg("response"));
  m.def("dist_objective", &dist_objective, py::arg("p"), py::arg("p_ref"),
        py::arg("reward"), py::arg("beta"));
  m.def("rl_objective_rc", &rl_objective_rc, py::arg("theta"), py::arg("ref"),
        py::arg("reward"), py::arg("response"), py::arg("beta"),
        py::arg("prompt_space"));
  m.def("partition_function", &partition_function, py::arg("ref"),
        py::arg("reward"), py::arg("response"), py::arg("beta"),
        py::arg("prompt_space"));
  m.def("optimal_policy", &optimal_policy, py::arg("ref"), py::arg("reward"),
        py::arg("response"), py::arg("beta"), py::arg("prompt_space"));

  // ---- builders ----

  py::class_<RcBuildConfig>(m, "RcBuildConfig")
      .def(py::init<>())
      .def_readwrite("at_most_prob", &RcBuildConfig::at_most_prob)
      .def_readwrite("word_num_cap_factor", &RcBuildConfig::word_num_cap_factor);

  py::class_<RcBuildResult>(m, "RcBuildResult")
      .def_readonly("examples", &RcBuildResult::examples)
      .def_readonly("skipped", &RcBuildResult::skipped);

  m.def("build_rc_dataset", &build_rc_dataset, py::arg("vocab"),
        py::arg("corpus"), py::arg("seed"),
        py::arg("config") = RcBuildConfig{});

  py::enum_<LiftVariant>(m, "LiftVariant")
      .value("Full", LiftVariant::Full)
      .value("Reverse", LiftVariant::Reverse)
      .value("NoReverse", LiftVariant::NoReverse)
      .value("EmptyPrompt", LiftVariant::EmptyPrompt);

  m.def("build_lift_plus", &build_lift_plus, py::arg("vocab"), py::arg("corpus"),
        py::arg("seed"), py::arg("variant") = LiftVariant::Full);
  m.def("build_eval_empty", &build_eval_empty, py::arg("vocab"),
        py::arg("eval_corpus"));
  m.def("build_eval_random", &build_eval_random, py::arg("vocab"),
        py::arg("eval_corpus"), py::arg("seed"));

  py::class_<LengthEvalResult>(m, "LengthEvalResult")
      .def_readonly("examples", &LengthEvalResult::examples)
      .def_readonly("skipped", &LengthEvalResult::skipped);

  m.def("build_eval_length", &build_eval_length, py::arg("vocab"),
        py::arg("oracle"), py::arg("eval_corpus"), py::arg("seed"));

  py::class_<MultiLengthExample>(m, "MultiLengthExample")
      .def_readwrite("prompt", &MultiLengthExample::prompt)
      .def_readwrite("variants", &MultiLengthExample::variants);

  m.def("build_eval_multilength", &build_eval_multilength, py::arg("vocab"),
        py::arg("eval_corpus"), py::arg("n_variants"), py::arg("seed"));

  m.def("sweep_word_nums", &sweep_word_nums, py::arg("len_chosen"),
        py::arg("len_rejected"));
  m.def("build_mls_sweep", &build_mls_sweep, py::arg("vocab"),
        py::arg("example"));

  py::class_<SweepExample>(m, "SweepExample")
      .def_readwrite("base", &SweepExample::base)
      .def_readwrite("word_nums", &SweepExample::word_nums)
      .def_readwrite("chosen", &SweepExample::chosen)
      .def_readwrite("rejected", &SweepExample::rejected);

  py::class_<SweepDataset>(m, "SweepDataset")
      .def_readonly("examples", &SweepDataset::examples)
      .def_readonly("skipped", &SweepDataset::skipped);

  m.def("build_mls_dataset", &build_mls_dataset, py::arg("vocab"),
        py::arg("eval_corpus"));

  // ---- training & evaluation ----

  py::enum_<OptimizerKind>(m, "OptimizerKind")
      .value("Sgd", OptimizerKind::Sgd)
      .value("Adam", OptimizerKind::Adam);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("warmup_steps", &TrainConfig::warmup_steps)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("optimizer", &TrainConfig::optimizer)
      .def_readwrite("max_grad_norm", &TrainConfig::max_grad_norm)
      .def_readwrite("mix_ratio", &TrainConfig::mix_ratio)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<TrainLogEntry>(m, "TrainLogEntry")
      .def_readonly("step", &TrainLogEntry::step)
      .def_readonly("lr", &TrainLogEntry::lr)
      .def_readonly("loss", &TrainLogEntry::loss)
      .def_readonly("grad_norm", &TrainLogEntry::grad_norm);

  py::class_<ScorerTrainResult>(m, "ScorerTrainResult")
      .def_readonly("params", &ScorerTrainResult::params)
      .def_readonly("log", &ScorerTrainResult::log);

  m.def("train_scorer_rm", &train_scorer_rm, py::arg("vocab"), py::arg("d_rm"),
        py::arg("config"), py::arg("hidden_dim"));
  m.def("train_scorer_rc", &train_scorer_rc, py::arg("vocab"), py::arg("d_rm"),
        py::arg("d_rc"), py::arg("config"), py::arg("objective"),
        py::arg("hidden_dim"));

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("dataset_id", &EvalReport::dataset_id)
      .def_readonly("n", &EvalReport::n)
      .def_readonly("accuracy", &EvalReport::accuracy)
      .def_readonly("consistency", &EvalReport::consistency)
      .def_readonly("mean_margin", &EvalReport::mean_margin)
      .def_readonly("margins", &EvalReport::margins);

  m.def("eval_accuracy", &eval_accuracy, py::arg("vocab"), py::arg("scorer"),
        py::arg("data"), py::arg("dataset_id"));
  m.def("eval_consistency", &eval_consistency, py::arg("vocab"),
        py::arg("scorer"), py::arg("a"), py::arg("b"));
  m.def("length_score_correlation", &length_score_correlation, py::arg("vocab"),
        py::arg("scorer"), py::arg("data"));

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("mean_scores", &StabilityReport::mean_scores)
      .def_readonly("slope", &StabilityReport::slope);

  m.def("eval_multilength_stability", &eval_multilength_stability,
        py::arg("vocab"), py::arg("scorer"), py::arg("data"));

  py::class_<SweepCurve>(m, "SweepCurve")
      .def_readonly("word_nums", &SweepCurve::word_nums)
      .def_readonly("mean_diffs", &SweepCurve::mean_diffs)
      .def_readonly("rise_then_return", &SweepCurve::rise_then_return)
      .def_readonly("peak_index", &SweepCurve::peak_index)
      .def_readonly("prominence", &SweepCurve::prominence)
      .def_readonly("endpoint_gap", &SweepCurve::endpoint_gap);

  m.def("eval_mls_sweep", &eval_mls_sweep, py::arg("vocab"), py::arg("scorer"),
        py::arg("data"));
  m.def("eval_length_accuracy", &eval_length_accuracy, py::arg("vocab"),
        py::arg("policy"), py::arg("prompts"), py::arg("sampler"));

  py::class_<WinRatioReport>(m, "WinRatioReport")
      .def_readonly("win_ratio", &WinRatioReport::win_ratio)
      .def_readonly("n", &WinRatioReport::n);

  m.def("eval_win_ratio", &eval_win_ratio, py::arg("vocab"), py::arg("a"),
        py::arg("b"), py::arg("oracle"), py::arg("prompts"), py::arg("sampler"));

  // ---- file formats ----

  m.def("corpus_to_jsonl",
        static_cast<std::string (*)(const PreferenceDataset&)>(&to_jsonl),
        py::arg("data"));
  m.def("corpus_from_jsonl", &preference_from_jsonl, py::arg("vocab"),
        py::arg("text"));
  m.def("rc_to_jsonl",
        static_cast<std::string (*)(const std::vector<RcExample>&)>(&to_jsonl),
        py::arg("data"));
  m.def("rc_from_jsonl", &rc_from_jsonl, py::arg("vocab"), py::arg("text"));
  m.def("save_scorer", &save_scorer, py::arg("path"), py::arg("params"),
        py::arg("seed"));
  m.def("load_scorer", &load_scorer, py::arg("path"));
  m.def("save_policy", &save_policy, py::arg("path"), py::arg("params"),
        py::arg("seed"));
  m.def("load_policy", &load_policy, py::arg("path"));
}
