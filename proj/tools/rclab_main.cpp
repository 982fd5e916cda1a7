// rclab: command-line frontend for the response-conditioned preference lab.
//
// Every subcommand is a pure function of (config file, input files, seed):
// it reads one JSON config, applies flag overrides (flags win), writes its
// artifacts atomically, and finishes with a manifest.json capturing the fully
// resolved configuration. Feeding that manifest back through --config re-runs
// the command and reproduces every data artifact byte for byte.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rclab/builders.hpp"
#include "rclab/corpus.hpp"
#include "rclab/evalsuite.hpp"
#include "rclab/io.hpp"
#include "rclab/objectives.hpp"
#include "rclab/policy.hpp"
#include "rclab/scorer.hpp"
#include "rclab/training.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rclab;

constexpr const char* kToolVersion = "0.1.0";

// Exit codes: 0 ok, 2 config (bad flags, bad values, malformed inputs),
// 3 io, 4 numeric abort, 1 anything else.
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Accepts either a plain config object or a previously written manifest; a
// manifest is unwrapped to its resolved config after checking the command.
json load_config(const std::string& path, const std::string& command) {
  if (path.empty()) return json::object();
  json j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded())
    throw ConfigError("config file is not valid JSON: " + path);
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  if (j.contains("tool_version") && j.contains("config")) {
    if (j.contains("command") &&
        j.at("command").get<std::string>() != command)
      throw ConfigError("manifest " + path + " was recorded for command '" +
                        j.at("command").get<std::string>() + "'");
    json inner = j.at("config");
    if (!inner.is_object()) throw ConfigError("manifest config must be an object");
    return inner;
  }
  return j;
}

// Typed access to the merged config. Every key read lands in the resolved
// copy with its default materialized, so the manifest records one complete
// truth; keys nobody read are typos and get rejected.
class Cfg {
 public:
  explicit Cfg(json in) : in_(std::move(in)) {}

  double num(const std::string& key, double fallback) {
    touch(key);
    if (!in_.contains(key)) return put(key, fallback);
    if (!in_.at(key).is_number())
      throw ConfigError("config key '" + key + "' must be a number");
    return put(key, in_.at(key).get<double>());
  }

  int integer(const std::string& key, int fallback) {
    touch(key);
    if (!in_.contains(key)) return put(key, fallback);
    if (!in_.at(key).is_number_integer())
      throw ConfigError("config key '" + key + "' must be an integer");
    return put(key, in_.at(key).get<int>());
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    touch(key);
    if (!in_.contains(key)) return put(key, fallback);
    const auto& v = in_.at(key);
    if (!v.is_number_integer())
      throw ConfigError("config key '" + key + "' must be an integer");
    if (v.is_number_unsigned()) return put(key, v.get<std::uint64_t>());
    const std::int64_t s = v.get<std::int64_t>();
    if (s < 0)
      throw ConfigError("config key '" + key + "' must be non-negative");
    return put(key, static_cast<std::uint64_t>(s));
  }

  std::uint64_t seed_value(std::uint64_t fallback = 0) {
    return u64("seed", fallback);
  }

  std::string str(const std::string& key, const std::string& fallback) {
    touch(key);
    if (!in_.contains(key)) return put(key, fallback);
    if (!in_.at(key).is_string())
      throw ConfigError("config key '" + key + "' must be a string");
    return put(key, in_.at(key).get<std::string>());
  }

  std::string required_str(const std::string& key) {
    touch(key);
    if (!in_.contains(key) || !in_.at(key).is_string())
      throw ConfigError("missing required config key '" + key + "'");
    return put(key, in_.at(key).get<std::string>());
  }

  bool flag(const std::string& key, bool fallback) {
    touch(key);
    if (!in_.contains(key)) return put(key, fallback);
    if (!in_.at(key).is_boolean())
      throw ConfigError("config key '" + key + "' must be a boolean");
    return put(key, in_.at(key).get<bool>());
  }

  std::vector<double> numbers(const std::string& key,
                              std::vector<double> fallback) {
    touch(key);
    if (!in_.contains(key)) return put(key, std::move(fallback));
    const auto& v = in_.at(key);
    if (!v.is_array())
      throw ConfigError("config key '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number())
        throw ConfigError("config key '" + key + "' must hold numbers only");
      out.push_back(x.get<double>());
    }
    return put(key, std::move(out));
  }

  void reject_unknown() const {
    for (const auto& item : in_.items())
      if (!seen_.count(item.key()))
        throw ConfigError("unknown config key '" + item.key() + "'");
  }

  const json& resolved() const { return resolved_; }

 private:
  void touch(const std::string& key) { seen_.insert(key); }
  template <typename T>
  T put(const std::string& key, T value) {
    resolved_[key] = value;
    return value;
  }

  json in_;
  json resolved_ = json::object();
  std::set<std::string> seen_;
};

struct CmdResult {
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

void emit(const fs::path& outdir, const std::string& name,
          const std::string& content, CmdResult& result) {
  write_text(outdir / name, content);
  result.outputs.push_back(name);
  std::printf("wrote %s\n", (outdir / name).string().c_str());
}

// ---- gen ----

CmdResult cmd_gen(Cfg& cfg, const fs::path& outdir) {
  CorpusSpec spec;
  spec.n_examples = cfg.integer("n", 1000);
  spec.chosen_longer_prob = cfg.num("chosen_longer_prob", 0.5978);
  spec.vocab_size = cfg.integer("vocab_size", 64);
  spec.prompt_len_range.min = cfg.integer("prompt_len_min", 8);
  spec.prompt_len_range.max = cfg.integer("prompt_len_max", 24);
  spec.response_len_range.min = cfg.integer("response_len_min", 24);
  spec.response_len_range.max = cfg.integer("response_len_max", 160);
  spec.seed = cfg.seed_value();
  SplitFractions fractions;
  fractions.sft = cfg.num("split_sft", 0.27);
  fractions.rm = cfg.num("split_rm", 0.63);
  fractions.eval = cfg.num("split_eval", 0.10);
  const int threads = cfg.integer("threads", 1);
  cfg.reject_unknown();
  validate(spec);

  const PreferenceDataset corpus = generate_corpus(spec, threads);
  const CorpusSplits splits = split_corpus(corpus, fractions, spec.seed);

  CmdResult result;
  result.seed = spec.seed;
  emit(outdir, "corpus.jsonl", to_jsonl(corpus), result);
  emit(outdir, "sft.jsonl", to_jsonl(splits.sft), result);
  emit(outdir, "rm.jsonl", to_jsonl(splits.rm), result);
  emit(outdir, "eval.jsonl", to_jsonl(splits.eval), result);
  return result;
}

// ---- augment ----

CmdResult cmd_augment(Cfg& cfg, const fs::path& outdir) {
  const std::string recipe = cfg.required_str("recipe");
  const std::string input = cfg.required_str("input");
  const int vocab_size = cfg.integer("vocab_size", 64);
  const std::uint64_t seed = cfg.seed_value();
  (void)cfg.integer("threads", 1);

  const VocabLayout vocab(vocab_size);
  CmdResult result;
  result.seed = seed;
  result.inputs.push_back(input);

  std::string payload;
  int skipped = 0;
  if (recipe == "rc") {
    RcBuildConfig bc;
    bc.at_most_prob = cfg.num("at_most_prob", 0.5);
    bc.word_num_cap_factor = cfg.num("word_num_cap_factor", 2.0);
    cfg.reject_unknown();
    const auto corpus = preference_from_jsonl(vocab, read_text(input));
    const RcBuildResult built = build_rc_dataset(vocab, corpus, seed, bc);
    payload = to_jsonl(built.examples);
    skipped = built.skipped;
  } else if (recipe == "lift" || recipe == "lift-reverse" ||
             recipe == "lift-noreverse" || recipe == "lift-empty") {
    cfg.reject_unknown();
    const auto corpus = preference_from_jsonl(vocab, read_text(input));
    const LiftVariant variant = recipe == "lift"           ? LiftVariant::Full
                                : recipe == "lift-reverse" ? LiftVariant::Reverse
                                : recipe == "lift-noreverse"
                                    ? LiftVariant::NoReverse
                                    : LiftVariant::EmptyPrompt;
    payload = to_jsonl(build_lift_plus(vocab, corpus, seed, variant));
  } else if (recipe == "eval-empty") {
    cfg.reject_unknown();
    const auto corpus = preference_from_jsonl(vocab, read_text(input));
    payload = to_jsonl(build_eval_empty(vocab, corpus));
  } else if (recipe == "eval-random") {
    cfg.reject_unknown();
    const auto corpus = preference_from_jsonl(vocab, read_text(input));
    payload = to_jsonl(build_eval_random(vocab, corpus, seed));
  } else if (recipe == "eval-length") {
    const std::uint64_t oracle_seed = cfg.u64("oracle_seed", seed);
    cfg.reject_unknown();
    const auto corpus = preference_from_jsonl(vocab, read_text(input));
    const QualityOracle oracle(vocab, oracle_seed);
    const LengthEvalResult built = build_eval_length(vocab, oracle, corpus, seed);
    payload = to_jsonl(built.examples);
    skipped = built.skipped;
  } else if (recipe == "eval-ml") {
    const int n_variants = cfg.integer("n_variants", 5);
    cfg.reject_unknown();
    const auto corpus = preference_from_jsonl(vocab, read_text(input));
    payload = to_jsonl(build_eval_multilength(vocab, corpus, n_variants, seed));
  } else if (recipe == "eval-mls") {
    cfg.reject_unknown();
    const auto corpus = preference_from_jsonl(vocab, read_text(input));
    const SweepDataset built = build_mls_dataset(vocab, corpus);
    payload = to_jsonl(built);
    skipped = built.skipped;
  } else {
    throw ConfigError("unknown recipe '" + recipe + "'");
  }

  emit(outdir, "dataset.jsonl", payload, result);
  if (skipped > 0) std::printf("skipped %d unusable pairs\n", skipped);
  return result;
}

// ---- train ----

TrainConfig train_config_from(Cfg& cfg) {
  TrainConfig tc;
  tc.lr = cfg.num("lr", 1e-2);
  tc.warmup_steps = cfg.integer("warmup_steps", 10);
  tc.epochs = cfg.integer("epochs", 5);
  tc.batch_size = cfg.integer("batch_size", 64);
  const std::string opt = cfg.str("optimizer", "sgd");
  if (opt == "sgd")
    tc.optimizer = OptimizerKind::Sgd;
  else if (opt == "adam")
    tc.optimizer = OptimizerKind::Adam;
  else
    throw ConfigError("optimizer must be 'sgd' or 'adam'");
  tc.max_grad_norm = cfg.num("max_grad_norm", 0.0);
  tc.mix_ratio = cfg.num("mix_ratio", 1.0);
  tc.seed = cfg.seed_value();
  if (tc.epochs < 1) throw ConfigError("epochs must be at least 1");
  validate(tc);
  return tc;
}

ObjectiveConfig objective_config_from(Cfg& cfg) {
  ObjectiveConfig oc;
  oc.beta = cfg.num("beta", 0.1);
  oc.lambda = cfg.num("lambda", 1.0);
  oc.rdpo_alpha = cfg.num("rdpo_alpha", 0.0);
  validate(oc);
  return oc;
}

CmdResult cmd_train(Cfg& cfg, const fs::path& outdir) {
  const std::string objective_name = cfg.required_str("objective");
  const int vocab_size = cfg.integer("vocab_size", 64);
  const TrainConfig tc = train_config_from(cfg);
  const ObjectiveConfig oc = objective_config_from(cfg);
  (void)cfg.integer("threads", 1);
  const VocabLayout vocab(vocab_size);

  CmdResult result;
  result.seed = tc.seed;
  std::vector<TrainLogEntry> log;

  if (objective_name == "rm" || objective_name == "rc-rm") {
    const int hidden_dim = cfg.integer("hidden_dim", 16);
    const std::string rm_path = cfg.required_str("rm_data");
    result.inputs.push_back(rm_path);
    ScorerTrainResult trained;
    if (objective_name == "rm") {
      cfg.reject_unknown();
      const auto d_rm = preference_from_jsonl(vocab, read_text(rm_path));
      trained = train_scorer_rm(vocab, d_rm, tc, hidden_dim);
    } else {
      const std::string rc_path = cfg.required_str("rc_data");
      cfg.reject_unknown();
      result.inputs.push_back(rc_path);
      const auto d_rm = preference_from_jsonl(vocab, read_text(rm_path));
      const auto d_rc = rc_from_jsonl(vocab, read_text(rc_path));
      trained = train_scorer_rc(vocab, d_rm, d_rc, tc, oc, hidden_dim);
    }
    save_scorer(outdir / "scorer.json", trained.params, tc.seed);
    result.outputs.push_back("scorer.json");
    std::printf("wrote %s\n", (outdir / "scorer.json").string().c_str());
    log = std::move(trained.log);
  } else if (objective_name == "dpo" || objective_name == "r-dpo" ||
             objective_name == "rc-dpo") {
    const int embed_dim = cfg.integer("embed_dim", 8);
    PolicyParams theta = init_policy(vocab_size, embed_dim, tc.seed);
    const PolicyParams ref = as_reference(theta);
    TrainResult res;

    if (objective_name == "rc-dpo") {
      const std::string rc_path = cfg.required_str("rc_data");
      cfg.reject_unknown();
      result.inputs.push_back(rc_path);
      const auto d_rc = rc_from_jsonl(vocab, read_text(rc_path));
      std::vector<JointTriple> triples;
      triples.reserve(d_rc.size());
      for (const auto& rc : d_rc)
        triples.push_back({serialize_prompt(vocab, rc.preferred_prompt),
                           serialize_prompt(vocab, rc.dispreferred_prompt),
                           rc.response});
      const BatchObjective objective =
          [&](const std::vector<double>& flat,
              const std::vector<std::size_t>& batch) -> LossResult {
        PolicyParams current = theta;
        current.values = flat;
        std::vector<JointTriple> sub;
        sub.reserve(batch.size());
        for (std::size_t idx : batch) sub.push_back(triples[idx]);
        return rc_dpo_loss(current, ref, sub, oc);
      };
      res = train(theta.values, objective, triples.size(), tc);
    } else {
      const std::string rm_path = cfg.required_str("rm_data");
      cfg.reject_unknown();
      result.inputs.push_back(rm_path);
      const auto d_rm = preference_from_jsonl(vocab, read_text(rm_path));
      std::vector<PolicyTriple> triples;
      triples.reserve(d_rm.size());
      for (const auto& ex : d_rm)
        triples.push_back(
            {serialize_prompt(vocab, ex.prompt), ex.chosen, ex.rejected});
      const bool with_penalty = objective_name == "r-dpo";
      const BatchObjective objective =
          [&](const std::vector<double>& flat,
              const std::vector<std::size_t>& batch) -> LossResult {
        PolicyParams current = theta;
        current.values = flat;
        std::vector<PolicyTriple> sub;
        sub.reserve(batch.size());
        for (std::size_t idx : batch) sub.push_back(triples[idx]);
        return with_penalty ? rdpo_loss(current, ref, sub, oc, vocab)
                            : dpo_loss(current, ref, sub, oc);
      };
      res = train(theta.values, objective, triples.size(), tc);
    }

    theta.values = std::move(res.params);
    save_policy(outdir / "policy.json", theta, tc.seed);
    result.outputs.push_back("policy.json");
    std::printf("wrote %s\n", (outdir / "policy.json").string().c_str());
    log = std::move(res.log);
  } else {
    throw ConfigError("objective must be one of rm, rc-rm, dpo, rc-dpo, r-dpo");
  }

  emit(outdir, "train_log.csv", train_log_csv(log), result);
  if (!log.empty())
    std::printf("final loss %s after %d steps\n", fmt(log.back().loss).c_str(),
                log.back().step + 1);
  return result;
}

// ---- eval ----

SamplerConfig sampler_from(Cfg& cfg, std::uint64_t seed) {
  SamplerConfig sc;
  sc.max_tokens = cfg.integer("max_tokens", 64);
  sc.greedy = cfg.flag("greedy", true);
  sc.temperature = cfg.num("temperature", 1.0);
  sc.seed = seed;
  return sc;
}

std::vector<AugmentedPrompt> prompts_of(const PreferenceDataset& data) {
  std::vector<AugmentedPrompt> prompts;
  prompts.reserve(data.size());
  for (const auto& ex : data) prompts.push_back(ex.prompt);
  return prompts;
}

CmdResult cmd_eval(Cfg& cfg, const fs::path& outdir) {
  const std::string metric = cfg.required_str("metric");
  const int vocab_size = cfg.integer("vocab_size", 64);
  const std::uint64_t seed = cfg.seed_value();
  (void)cfg.integer("threads", 1);
  const VocabLayout vocab(vocab_size);

  CmdResult result;
  result.seed = seed;

  if (metric == "accuracy" || metric == "consistency") {
    const std::string scorer_path = cfg.required_str("scorer");
    const std::string data_path = cfg.required_str("data");
    const std::string id =
        cfg.str("dataset_id", fs::path(data_path).stem().string());
    std::string data_b_path;
    if (metric == "consistency") data_b_path = cfg.required_str("data_b");
    cfg.reject_unknown();

    result.inputs.push_back(scorer_path);
    result.inputs.push_back(data_path);
    const ScorerParams scorer = load_scorer(scorer_path);
    const auto data = preference_from_jsonl(vocab, read_text(data_path));
    EvalReport report = eval_accuracy(vocab, scorer, data, id);
    if (metric == "consistency") {
      result.inputs.push_back(data_b_path);
      const auto data_b = preference_from_jsonl(vocab, read_text(data_b_path));
      report.consistency = eval_consistency(vocab, scorer, data, data_b);
    }
    emit(outdir, "report.csv", eval_report_csv(report), result);
    emit(outdir, "report.json", eval_report_json(report).dump(2) + "\n", result);
    std::printf("accuracy %s on %d examples\n", fmt(report.accuracy).c_str(),
                report.n);
  } else if (metric == "length-corr") {
    const std::string scorer_path = cfg.required_str("scorer");
    const std::string data_path = cfg.required_str("data");
    cfg.reject_unknown();
    result.inputs.push_back(scorer_path);
    result.inputs.push_back(data_path);
    const ScorerParams scorer = load_scorer(scorer_path);
    const auto data = preference_from_jsonl(vocab, read_text(data_path));
    const double corr = length_score_correlation(vocab, scorer, data);
    emit(outdir, "report.csv",
         "metric,value\nlength_score_correlation," + fmt(corr) + "\n", result);
    emit(outdir, "report.json",
         json{{"length_score_correlation", corr}}.dump(2) + "\n", result);
    std::printf("length-score correlation %s\n", fmt(corr).c_str());
  } else if (metric == "length-acc") {
    const std::string policy_path = cfg.required_str("policy");
    const std::string data_path = cfg.required_str("data");
    const SamplerConfig sampler = sampler_from(cfg, seed);
    cfg.reject_unknown();
    result.inputs.push_back(policy_path);
    result.inputs.push_back(data_path);
    const PolicyParams policy = load_policy(policy_path);
    const auto data = preference_from_jsonl(vocab, read_text(data_path));
    const auto prompts = prompts_of(data);
    const double acc = eval_length_accuracy(vocab, policy, prompts, sampler);
    emit(outdir, "report.csv",
         "metric,value\nlength_accuracy," + fmt(acc) + "\n", result);
    emit(outdir, "report.json",
         json{{"length_accuracy", acc}, {"n", prompts.size()}}.dump(2) + "\n",
         result);
    std::printf("length accuracy %s\n", fmt(acc).c_str());
  } else if (metric == "win-ratio") {
    const std::string policy_path = cfg.required_str("policy");
    const std::string policy_b_path = cfg.required_str("policy_b");
    const std::string data_path = cfg.required_str("data");
    const std::uint64_t oracle_seed = cfg.u64("oracle_seed", seed);
    const SamplerConfig sampler = sampler_from(cfg, seed);
    cfg.reject_unknown();
    result.inputs.push_back(policy_path);
    result.inputs.push_back(policy_b_path);
    result.inputs.push_back(data_path);
    const PolicyParams a = load_policy(policy_path);
    const PolicyParams b = load_policy(policy_b_path);
    const auto data = preference_from_jsonl(vocab, read_text(data_path));
    const auto prompts = prompts_of(data);
    const QualityOracle oracle(vocab, oracle_seed);
    const WinRatioReport report =
        eval_win_ratio(vocab, a, b, oracle, prompts, sampler);
    emit(outdir, "report.csv",
         "metric,value\nwin_ratio," + fmt(report.win_ratio) + "\nn," +
             std::to_string(report.n) + "\n",
         result);
    emit(outdir, "report.json",
         json{{"win_ratio", report.win_ratio}, {"n", report.n}}.dump(2) + "\n",
         result);
    std::printf("win ratio %s over %d prompts\n", fmt(report.win_ratio).c_str(),
                report.n);
  } else {
    throw ConfigError(
        "metric must be one of accuracy, consistency, length-corr, "
        "length-acc, win-ratio");
  }
  return result;
}

// ---- sweep ----

CmdResult cmd_sweep(Cfg& cfg, const fs::path& outdir) {
  const std::string mode = cfg.str("mode", "mls");
  const std::string scorer_path = cfg.required_str("scorer");
  const std::string data_path = cfg.required_str("data");
  const int vocab_size = cfg.integer("vocab_size", 64);
  const std::uint64_t seed = cfg.seed_value();
  (void)cfg.integer("threads", 1);
  cfg.reject_unknown();

  const VocabLayout vocab(vocab_size);
  CmdResult result;
  result.seed = seed;
  result.inputs.push_back(scorer_path);
  result.inputs.push_back(data_path);
  const ScorerParams scorer = load_scorer(scorer_path);

  if (mode == "mls") {
    const SweepDataset data = sweep_from_jsonl(vocab, read_text(data_path));
    const SweepCurve curve = eval_mls_sweep(vocab, scorer, data);
    emit(outdir, "sweep.csv", sweep_csv(curve), result);
    emit(outdir, "sweep.json", sweep_json(curve).dump(2) + "\n", result);
    std::printf("rise-then-return: %s\n", curve.rise_then_return ? "yes" : "no");
  } else if (mode == "ml") {
    const MultiLengthDataset data =
        multilength_from_jsonl(vocab, read_text(data_path));
    const StabilityReport report =
        eval_multilength_stability(vocab, scorer, data);
    std::string csv = "variant,mean_score\n";
    for (std::size_t i = 0; i < report.mean_scores.size(); ++i)
      csv += std::to_string(i + 1) + "," + fmt(report.mean_scores[i]) + "\n";
    emit(outdir, "stability.csv", csv, result);
    emit(outdir, "stability.json",
         json{{"mean_scores", report.mean_scores}, {"slope", report.slope}}
                 .dump(2) +
             "\n",
         result);
    std::printf("stability slope %s\n", fmt(report.slope).c_str());
  } else {
    throw ConfigError("mode must be 'mls' or 'ml'");
  }
  return result;
}

// ---- ablate ----

CmdResult cmd_ablate(Cfg& cfg, const fs::path& outdir) {
  const std::string kind_name = cfg.required_str("kind");
  const int vocab_size = cfg.integer("vocab_size", 64);
  const std::string rm_path = cfg.required_str("rm_data");
  const std::string rc_path = cfg.required_str("rc_data");
  const std::string quality_path = cfg.required_str("quality_eval");
  const std::string length_path = cfg.required_str("length_eval");
  const int hidden_dim = cfg.integer("hidden_dim", 16);
  const TrainConfig tc = train_config_from(cfg);
  const ObjectiveConfig oc = objective_config_from(cfg);
  const std::vector<double> lambda_grid =
      cfg.numbers("lambda_grid", {0.0, 0.5, 1.0, 2.0});
  (void)cfg.integer("threads", 1);
  cfg.reject_unknown();

  AblationKind kind;
  if (kind_name == "arm")
    kind = AblationKind::ArmAblation;
  else if (kind_name == "rc-ratio")
    kind = AblationKind::RcRatio;
  else if (kind_name == "lambda")
    kind = AblationKind::LambdaSweep;
  else
    throw ConfigError("kind must be one of arm, rc-ratio, lambda");

  const VocabLayout vocab(vocab_size);
  CmdResult result;
  result.seed = tc.seed;
  result.inputs = {rm_path, rc_path, quality_path, length_path};

  const auto d_rm = preference_from_jsonl(vocab, read_text(rm_path));
  const auto d_rc = rc_from_jsonl(vocab, read_text(rc_path));
  const auto quality_eval = preference_from_jsonl(vocab, read_text(quality_path));
  const auto length_eval = preference_from_jsonl(vocab, read_text(length_path));

  AblationInputs inputs{vocab,       d_rm, d_rc,       quality_eval,
                        length_eval, tc,   oc,         hidden_dim,
                        lambda_grid};
  const AblationReport report = run_ablation(kind, inputs);

  emit(outdir, "ablation.csv", ablation_csv(report), result);
  emit(outdir, "ablation.json", ablation_json(report).dump(2) + "\n", result);
  return result;
}

// ---- harness ----

int run_command(const std::string& command, json merged) {
  const auto t0 = std::chrono::steady_clock::now();
  Cfg cfg(std::move(merged));
  const fs::path outdir = cfg.str("out", "out");

  CmdResult result;
  if (command == "gen")
    result = cmd_gen(cfg, outdir);
  else if (command == "augment")
    result = cmd_augment(cfg, outdir);
  else if (command == "train")
    result = cmd_train(cfg, outdir);
  else if (command == "eval")
    result = cmd_eval(cfg, outdir);
  else if (command == "sweep")
    result = cmd_sweep(cfg, outdir);
  else
    result = cmd_ablate(cfg, outdir);

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const json manifest{{"command", command},
                      {"config", cfg.resolved()},
                      {"seed", result.seed},
                      {"inputs", result.inputs},
                      {"outputs", result.outputs},
                      {"tool_version", kToolVersion},
                      {"duration_seconds", secs}};
  atomic_write(outdir / "manifest.json", manifest.dump(2) + "\n");
  std::printf("wrote %s\n", (outdir / "manifest.json").string().c_str());
  return 0;
}

struct CommonFlags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

void add_common(CLI::App* cmd, const std::shared_ptr<CommonFlags>& f) {
  cmd->add_option("--config", f->config,
                  "JSON config file, or a manifest to replay");
  f->seed_opt = cmd->add_option("--seed", f->seed, "root seed");
  f->out_opt = cmd->add_option("--out", f->out, "output directory");
  f->threads_opt = cmd->add_option("--threads", f->threads, "worker threads");
}

json merge_flags(const std::string& command, const CommonFlags& f) {
  json cfg = load_config(f.config, command);
  if (f.seed_opt->count()) cfg["seed"] = f.seed;
  if (f.out_opt->count()) cfg["out"] = f.out;
  if (f.threads_opt->count()) cfg["threads"] = f.threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"response-conditioned preference lab"};
  app.require_subcommand(1);
  int exit_code = 0;

  {
    auto f = std::make_shared<CommonFlags>();
    auto n = std::make_shared<int>(0);
    CLI::App* cmd = app.add_subcommand("gen", "generate a corpus and its splits");
    add_common(cmd, f);
    CLI::Option* n_opt = cmd->add_option("--n", *n, "number of examples");
    cmd->callback([f, n, n_opt, &exit_code]() {
      json cfg = merge_flags("gen", *f);
      if (n_opt->count()) cfg["n"] = *n;
      exit_code = run_command("gen", std::move(cfg));
    });
  }
  {
    auto f = std::make_shared<CommonFlags>();
    auto recipe = std::make_shared<std::string>();
    auto input = std::make_shared<std::string>();
    CLI::App* cmd = app.add_subcommand("augment", "derive datasets from a corpus");
    add_common(cmd, f);
    CLI::Option* recipe_opt = cmd->add_option(
        "--recipe", *recipe,
        "rc | lift | lift-reverse | lift-noreverse | lift-empty | eval-empty | "
        "eval-random | eval-length | eval-ml | eval-mls");
    CLI::Option* input_opt =
        cmd->add_option("--input", *input, "source corpus JSONL");
    cmd->callback([f, recipe, input, recipe_opt, input_opt, &exit_code]() {
      json cfg = merge_flags("augment", *f);
      if (recipe_opt->count()) cfg["recipe"] = *recipe;
      if (input_opt->count()) cfg["input"] = *input;
      exit_code = run_command("augment", std::move(cfg));
    });
  }
  {
    auto f = std::make_shared<CommonFlags>();
    auto objective = std::make_shared<std::string>();
    CLI::App* cmd = app.add_subcommand("train", "train a scorer or a policy");
    add_common(cmd, f);
    CLI::Option* obj_opt = cmd->add_option(
        "--objective", *objective, "rm | rc-rm | dpo | rc-dpo | r-dpo");
    cmd->callback([f, objective, obj_opt, &exit_code]() {
      json cfg = merge_flags("train", *f);
      if (obj_opt->count()) cfg["objective"] = *objective;
      exit_code = run_command("train", std::move(cfg));
    });
  }
  {
    auto f = std::make_shared<CommonFlags>();
    auto metric = std::make_shared<std::string>();
    CLI::App* cmd = app.add_subcommand("eval", "score a model on a dataset");
    add_common(cmd, f);
    CLI::Option* metric_opt = cmd->add_option(
        "--metric", *metric,
        "accuracy | consistency | length-corr | length-acc | win-ratio");
    cmd->callback([f, metric, metric_opt, &exit_code]() {
      json cfg = merge_flags("eval", *f);
      if (metric_opt->count()) cfg["metric"] = *metric;
      exit_code = run_command("eval", std::move(cfg));
    });
  }
  {
    auto f = std::make_shared<CommonFlags>();
    auto mode = std::make_shared<std::string>();
    CLI::App* cmd =
        app.add_subcommand("sweep", "word_num sweep and multi-length stability");
    add_common(cmd, f);
    CLI::Option* mode_opt = cmd->add_option("--mode", *mode, "mls | ml");
    cmd->callback([f, mode, mode_opt, &exit_code]() {
      json cfg = merge_flags("sweep", *f);
      if (mode_opt->count()) cfg["mode"] = *mode;
      exit_code = run_command("sweep", std::move(cfg));
    });
  }
  {
    auto f = std::make_shared<CommonFlags>();
    auto kind = std::make_shared<std::string>();
    CLI::App* cmd = app.add_subcommand("ablate", "run an ablation grid");
    add_common(cmd, f);
    CLI::Option* kind_opt =
        cmd->add_option("--kind", *kind, "arm | rc-ratio | lambda");
    cmd->callback([f, kind, kind_opt, &exit_code]() {
      json cfg = merge_flags("ablate", *f);
      if (kind_opt->count()) cfg["kind"] = *kind;
      exit_code = run_command("ablate", std::move(cfg));
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "rclab: config error: %s\n", e.what());
    return kExitConfig;
  } catch (const FormatFailure& e) {
    std::fprintf(stderr, "rclab: config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericFailure& e) {
    std::fprintf(stderr, "rclab: numeric failure at step %d: %s\n", e.step,
                 e.what());
    return kExitNumeric;
  } catch (const IoFailure& e) {
    std::fprintf(stderr, "rclab: io error: %s\n", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "rclab: io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "rclab: config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "rclab: config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rclab: %s\n", e.what());
    return kExitOther;
  }
  return exit_code;
}
