#include <doctest.h>

#include <unistd.h>

#include <filesystem>

#include "rclab/io.hpp"

using namespace rclab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rclab_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path file(const char* name) const { return path / name; }
};

PreferenceDataset labeled_corpus(int n, std::uint64_t seed) {
  CorpusSpec spec;
  spec.n_examples = n;
  spec.seed = seed;
  return generate_corpus(spec);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("atomic writes land complete and leave no temp file") {
  TempDir dir;
  const auto target = dir.file("nested") / "out.txt";
  atomic_write(target, "payload");
  CHECK(read_text(target) == "payload");
  CHECK_FALSE(fs::exists(target.string() + ".tmp"));
  // Overwrite replaces the whole content.
  atomic_write(target, "v2");
  CHECK(read_text(target) == "v2");
  CHECK_THROWS_AS(read_text(dir.file("missing.txt")), IoFailure);
}

TEST_CASE("preference datasets round-trip through jsonl") {
  const VocabLayout vocab(64);
  auto data = labeled_corpus(12, 3);
  data[0].prompt.constraint = make_constraint(vocab, ConstraintKind::AtMost, 40);
  data[1].prompt.constraint = make_constraint(vocab, ConstraintKind::AtLeast, 130);

  const std::string text = to_jsonl(data);
  const auto back = preference_from_jsonl(vocab, text);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].prompt == data[i].prompt);
    CHECK(back[i].chosen == data[i].chosen);
    CHECK(back[i].rejected == data[i].rejected);
    CHECK(*back[i].true_quality_chosen ==
          doctest::Approx(*data[i].true_quality_chosen).epsilon(1e-15));
  }
  // Serialization is deterministic, so a second pass is byte-identical.
  CHECK(to_jsonl(back) == text);
  CHECK(to_jsonl(PreferenceDataset{}).empty());
  CHECK(preference_from_jsonl(vocab, "").empty());
}

TEST_CASE("jsonl rejects malformed lines with their line number") {
  const VocabLayout vocab(64);
  try {
    preference_from_jsonl(vocab, R"({"prompt":[1],"chosen":[2],"rejected":[3]})"
                                 "\nnot json\n");
    FAIL("expected FormatFailure");
  } catch (const FormatFailure& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  // Out-of-order quality labels are a format error, not silently accepted.
  CHECK_THROWS_AS(
      preference_from_jsonl(
          vocab, R"({"prompt":[1],"chosen":[2],"rejected":[3],"q_w":0.1,"q_l":0.9})"
                 "\n"),
      FormatFailure);
  // Token ids outside the vocabulary are rejected on read.
  CHECK_THROWS_AS(
      preference_from_jsonl(vocab,
                            R"({"prompt":[99],"chosen":[2],"rejected":[3]})"
                            "\n"),
      std::domain_error);
  // Missing keys surface as format failures.
  CHECK_THROWS_AS(preference_from_jsonl(vocab, R"({"prompt":[1]})" "\n"),
                  FormatFailure);
}

TEST_CASE("rc datasets round-trip with their arms intact") {
  const VocabLayout vocab(64);
  const auto corpus = labeled_corpus(10, 7);
  const auto built = build_rc_dataset(vocab, corpus, 7);
  const std::string text = to_jsonl(built.examples);
  const auto back = rc_from_jsonl(vocab, text);
  REQUIRE(back.size() == built.examples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].preferred_prompt == built.examples[i].preferred_prompt);
    CHECK(back[i].dispreferred_prompt == built.examples[i].dispreferred_prompt);
    CHECK(back[i].response == built.examples[i].response);
    CHECK(back[i].arm == built.examples[i].arm);
  }
  CHECK_THROWS_AS(
      rc_from_jsonl(vocab,
                    R"({"preferred_prompt":{"prompt":[1]},"dispreferred_prompt":{"prompt":[1]},"response":[2],"arm":"sideways"})"
                    "\n"),
      FormatFailure);
}

TEST_CASE("multi-length and sweep datasets round-trip") {
  const VocabLayout vocab(64);
  const auto corpus = labeled_corpus(8, 11);
  const auto ml = build_eval_multilength(vocab, corpus, 3, 11);
  const auto ml_back = multilength_from_jsonl(vocab, to_jsonl(ml));
  REQUIRE(ml_back.size() == ml.size());
  for (std::size_t i = 0; i < ml.size(); ++i) {
    CHECK(ml_back[i].prompt == ml[i].prompt);
    CHECK(ml_back[i].variants == ml[i].variants);
  }

  const auto sweep = build_mls_dataset(vocab, labeled_corpus(40, 11));
  REQUIRE(!sweep.examples.empty());
  const auto sweep_back = sweep_from_jsonl(vocab, to_jsonl(sweep));
  REQUIRE(sweep_back.examples.size() == sweep.examples.size());
  for (std::size_t i = 0; i < sweep.examples.size(); ++i) {
    CHECK(sweep_back.examples[i].base == sweep.examples[i].base);
    CHECK(sweep_back.examples[i].word_nums == sweep.examples[i].word_nums);
    CHECK(sweep_back.examples[i].chosen == sweep.examples[i].chosen);
  }
  CHECK_THROWS_AS(
      sweep_from_jsonl(
          vocab, R"({"prompt":[1],"word_nums":[1,2,3],"chosen":[2],"rejected":[3]})"
                 "\n"),
      FormatFailure);
}

TEST_CASE("scorer checkpoints reload to identical scores") {
  TempDir dir;
  const auto params = init_scorer(FeatureLayout::kDim, 16, 5);
  save_scorer(dir.file("scorer.json"), params, 5);
  const auto back = load_scorer(dir.file("scorer.json"));
  CHECK(back.input_dim == params.input_dim);
  CHECK(back.hidden_dim == params.hidden_dim);
  CHECK(back.values == params.values);

  const VocabLayout vocab(64);
  const AugmentedPrompt p{{1, 2, 3}, std::nullopt};
  const TokenSequence y{4, 5, 6};
  CHECK(score(back, featurize(vocab, p, y)) ==
        score(params, featurize(vocab, p, y)));
}

TEST_CASE("policy checkpoints keep dims, role, and values") {
  TempDir dir;
  const auto params = as_reference(init_policy(16, 4, 9));
  save_policy(dir.file("policy.json"), params, 9);
  const auto back = load_policy(dir.file("policy.json"));
  CHECK(back.vocab_size == 16);
  CHECK(back.embed_dim == 4);
  CHECK(back.role == PolicyRole::Reference);
  CHECK(back.values == params.values);
}

TEST_CASE("checkpoints refuse the wrong model kind or shape") {
  TempDir dir;
  save_scorer(dir.file("scorer.json"), init_scorer(10, 2, 1), 1);
  CHECK_THROWS_AS(load_policy(dir.file("scorer.json")), FormatFailure);

  save_policy(dir.file("policy.json"), init_policy(8, 2, 1), 1);
  CHECK_THROWS_AS(load_scorer(dir.file("policy.json")), FormatFailure);

  // Corrupt the parameter count.
  auto doc = nlohmann::json::parse(read_text(dir.file("scorer.json")));
  doc["params"].push_back(0.0);
  write_text(dir.file("corrupt.json"), doc.dump());
  CHECK_THROWS_AS(load_scorer(dir.file("corrupt.json")), FormatFailure);

  write_text(dir.file("garbage.json"), "{{{");
  CHECK_THROWS_AS(load_scorer(dir.file("garbage.json")), FormatFailure);
}

TEST_CASE("train log csv is stable and complete") {
  const std::vector<TrainLogEntry> log{{0, 0.0, 0.6931471805599453, 1.5},
                                       {1, 0.01, 0.5, 0.25}};
  const std::string csv = train_log_csv(log);
  CHECK(csv ==
        "step,lr,loss,grad_norm\n"
        "0,0,0.69314718055994529,1.5\n"
        "1,0.01,0.5,0.25\n");
}

TEST_CASE("eval report serializations carry every metric") {
  EvalReport report;
  report.dataset_id = "eval_empty";
  report.n = 4;
  report.accuracy = 0.75;
  report.consistency = 0.5;
  report.mean_margin = -0.125;
  report.margins = {1.0, -0.5, 0.25, -1.25};

  const std::string csv = eval_report_csv(report);
  CHECK(csv ==
        "metric,value\n"
        "dataset_id,eval_empty\n"
        "n,4\n"
        "accuracy,0.75\n"
        "consistency,0.5\n"
        "mean_margin,-0.125\n");

  const auto j = eval_report_json(report);
  CHECK(j.at("accuracy").get<double>() == 0.75);
  CHECK(j.at("consistency").get<double>() == 0.5);
  CHECK(j.at("margins").size() == 4);

  report.consistency.reset();
  CHECK(eval_report_csv(report).find("consistency") == std::string::npos);
  CHECK_FALSE(eval_report_json(report).contains("consistency"));
}

TEST_CASE("ablation and sweep serializations") {
  AblationReport report;
  report.kind = AblationKind::ArmAblation;
  report.cells = {{"without_chosen_arm", 0.5, 0.25},
                  {"without_rejected_arm", 0.625, 0.75}};
  CHECK(ablation_csv(report) ==
        "cell,quality_accuracy,length_accuracy\n"
        "without_chosen_arm,0.5,0.25\n"
        "without_rejected_arm,0.625,0.75\n");
  CHECK(ablation_json(report).at("kind") == "arm");
  report.kind = AblationKind::LambdaSweep;
  CHECK(ablation_json(report).at("kind") == "lambda");

  SweepCurve curve;
  curve.word_nums = {80, 90, 100, 120, 140, 160, 170, 180};
  curve.mean_diffs = {0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0};
  curve.rise_then_return = true;
  curve.peak_index = 2;
  curve.prominence = 1.0;
  const std::string csv = sweep_csv(curve);
  CHECK(csv.rfind("position,word_num,mean_diff\n", 0) == 0);
  CHECK(csv.find("1,80,0\n") != std::string::npos);
  CHECK(csv.find("3,100,1\n") != std::string::npos);
  const auto j = sweep_json(curve);
  CHECK(j.at("rise_then_return").get<bool>());
  CHECK(j.at("peak_index").get<int>() == 2);
}

}  // TEST_SUITE
