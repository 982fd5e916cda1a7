#include "rclab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rclab {

using nlohmann::json;

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoFailure("cannot create directory " + path.parent_path().string());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoFailure("short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoFailure("cannot rename " + tmp.string() + " to " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  atomic_write(path, text);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoFailure("read failure on " + path.string());
  return buf.str();
}

namespace {

json tokens_json(const TokenSequence& s) {
  json arr = json::array();
  for (Token t : s) arr.push_back(t);
  return arr;
}

TokenSequence tokens_from(const VocabLayout& vocab, const json& j,
                          const char* what) {
  if (!j.is_array()) throw FormatFailure(std::string(what) + " must be an array");
  TokenSequence s;
  s.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number_integer())
      throw FormatFailure(std::string(what) + " must hold integers");
    s.push_back(v.get<Token>());
  }
  vocab.check_sequence(s);
  return s;
}

json constraint_json(const LengthConstraint& c) {
  return json{{"kind", c.kind == ConstraintKind::AtMost ? "at_most" : "at_least"},
              {"word_num", c.word_num}};
}

LengthConstraint constraint_from(const VocabLayout& vocab, const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("word_num"))
    throw FormatFailure("constraint needs kind and word_num");
  const std::string kind = j.at("kind").get<std::string>();
  ConstraintKind k;
  if (kind == "at_most")
    k = ConstraintKind::AtMost;
  else if (kind == "at_least")
    k = ConstraintKind::AtLeast;
  else
    throw FormatFailure("unknown constraint kind: " + kind);
  const int wn = j.at("word_num").get<int>();
  if (wn < 1 || wn > vocab.max_word_num())
    throw FormatFailure("constraint word_num out of range");
  return {k, wn};
}

void write_prompt_fields(json& line, const AugmentedPrompt& p) {
  line["prompt"] = tokens_json(p.base);
  if (p.constraint) line["constraint"] = constraint_json(*p.constraint);
}

AugmentedPrompt read_prompt_fields(const VocabLayout& vocab, const json& line) {
  AugmentedPrompt p;
  p.base = tokens_from(vocab, line.at("prompt"), "prompt");
  if (line.contains("constraint"))
    p.constraint = constraint_from(vocab, line.at("constraint"));
  return p;
}

std::vector<json> parse_lines(const std::string& text) {
  std::vector<json> lines;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw FormatFailure("line " + std::to_string(lineno) + ": invalid JSON");
    lines.push_back(std::move(j));
  }
  return lines;
}

}  // namespace

json to_json(const AugmentedPrompt& prompt) {
  json j;
  write_prompt_fields(j, prompt);
  return j;
}

AugmentedPrompt prompt_from_json(const VocabLayout& vocab, const json& j) {
  return read_prompt_fields(vocab, j);
}

std::string to_jsonl(const PreferenceDataset& data) {
  std::string out;
  for (const auto& ex : data) {
    json line;
    write_prompt_fields(line, ex.prompt);
    line["chosen"] = tokens_json(ex.chosen);
    line["rejected"] = tokens_json(ex.rejected);
    if (ex.true_quality_chosen) line["q_w"] = *ex.true_quality_chosen;
    if (ex.true_quality_rejected) line["q_l"] = *ex.true_quality_rejected;
    out += line.dump();
    out += '\n';
  }
  return out;
}

PreferenceDataset preference_from_jsonl(const VocabLayout& vocab,
                                        const std::string& text) {
  PreferenceDataset data;
  for (const auto& line : parse_lines(text)) {
    try {
      PreferenceExample ex;
      ex.prompt = read_prompt_fields(vocab, line);
      ex.chosen = tokens_from(vocab, line.at("chosen"), "chosen");
      ex.rejected = tokens_from(vocab, line.at("rejected"), "rejected");
      if (line.contains("q_w")) ex.true_quality_chosen = line.at("q_w").get<double>();
      if (line.contains("q_l"))
        ex.true_quality_rejected = line.at("q_l").get<double>();
      if (ex.true_quality_chosen && ex.true_quality_rejected &&
          !(*ex.true_quality_chosen > *ex.true_quality_rejected))
        throw FormatFailure("quality labels out of order");
      data.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw FormatFailure(std::string("bad preference line: ") + e.what());
    }
  }
  return data;
}

std::string to_jsonl(const std::vector<RcExample>& data) {
  std::string out;
  for (const auto& rc : data) {
    json line;
    line["preferred_prompt"] = to_json(rc.preferred_prompt);
    line["dispreferred_prompt"] = to_json(rc.dispreferred_prompt);
    line["response"] = tokens_json(rc.response);
    line["arm"] = rc.arm == RcArm::ChosenArm ? "chosen" : "rejected";
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<RcExample> rc_from_jsonl(const VocabLayout& vocab,
                                     const std::string& text) {
  std::vector<RcExample> data;
  for (const auto& line : parse_lines(text)) {
    try {
      RcExample rc;
      rc.preferred_prompt = prompt_from_json(vocab, line.at("preferred_prompt"));
      rc.dispreferred_prompt =
          prompt_from_json(vocab, line.at("dispreferred_prompt"));
      rc.response = tokens_from(vocab, line.at("response"), "response");
      const std::string arm = line.at("arm").get<std::string>();
      if (arm == "chosen")
        rc.arm = RcArm::ChosenArm;
      else if (arm == "rejected")
        rc.arm = RcArm::RejectedArm;
      else
        throw FormatFailure("unknown arm: " + arm);
      data.push_back(std::move(rc));
    } catch (const json::exception& e) {
      throw FormatFailure(std::string("bad rc line: ") + e.what());
    }
  }
  return data;
}

std::string to_jsonl(const MultiLengthDataset& data) {
  std::string out;
  for (const auto& ex : data) {
    json line;
    write_prompt_fields(line, ex.prompt);
    json variants = json::array();
    for (const auto& v : ex.variants) variants.push_back(tokens_json(v));
    line["variants"] = std::move(variants);
    out += line.dump();
    out += '\n';
  }
  return out;
}

MultiLengthDataset multilength_from_jsonl(const VocabLayout& vocab,
                                          const std::string& text) {
  MultiLengthDataset data;
  for (const auto& line : parse_lines(text)) {
    try {
      MultiLengthExample ex;
      ex.prompt = read_prompt_fields(vocab, line);
      for (const auto& v : line.at("variants"))
        ex.variants.push_back(tokens_from(vocab, v, "variant"));
      data.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw FormatFailure(std::string("bad multi-length line: ") + e.what());
    }
  }
  return data;
}

std::string to_jsonl(const SweepDataset& data) {
  std::string out;
  for (const auto& ex : data.examples) {
    json line;
    line["prompt"] = tokens_json(ex.base);
    line["word_nums"] = ex.word_nums;
    line["chosen"] = tokens_json(ex.chosen);
    line["rejected"] = tokens_json(ex.rejected);
    out += line.dump();
    out += '\n';
  }
  return out;
}

SweepDataset sweep_from_jsonl(const VocabLayout& vocab, const std::string& text) {
  SweepDataset data;
  for (const auto& line : parse_lines(text)) {
    try {
      SweepExample ex;
      ex.base = tokens_from(vocab, line.at("prompt"), "prompt");
      const auto& wn = line.at("word_nums");
      if (!wn.is_array() || wn.size() != kSweepPoints)
        throw FormatFailure("word_nums must have eight entries");
      for (int j = 0; j < kSweepPoints; ++j) ex.word_nums[j] = wn[j].get<int>();
      ex.chosen = tokens_from(vocab, line.at("chosen"), "chosen");
      ex.rejected = tokens_from(vocab, line.at("rejected"), "rejected");
      data.examples.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw FormatFailure(std::string("bad sweep line: ") + e.what());
    }
  }
  return data;
}

// ---- checkpoints ----

namespace {

json params_checkpoint(const std::string& kind, json dims, std::uint64_t seed,
                       const std::vector<double>& values) {
  return json{{"version", 1},
              {"model_kind", kind},
              {"dims", std::move(dims)},
              {"seed", seed},
              {"params", values}};
}

json load_checkpoint(const std::filesystem::path& path,
                     const std::string& expected_kind) {
  json j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded())
    throw FormatFailure("checkpoint is not valid JSON: " + path.string());
  if (!j.contains("version") || j.at("version").get<int>() != 1)
    throw FormatFailure("unsupported checkpoint version");
  if (j.at("model_kind").get<std::string>() != expected_kind)
    throw FormatFailure("checkpoint holds a different model kind");
  return j;
}

}  // namespace

void save_scorer(const std::filesystem::path& path, const ScorerParams& params,
                 std::uint64_t seed) {
  const json j = params_checkpoint(
      "scorer",
      json{{"input_dim", params.input_dim}, {"hidden_dim", params.hidden_dim}},
      seed, params.values);
  atomic_write(path, j.dump() + "\n");
}

ScorerParams load_scorer(const std::filesystem::path& path) {
  const json j = load_checkpoint(path, "scorer");
  try {
    ScorerParams p;
    p.input_dim = j.at("dims").at("input_dim").get<int>();
    p.hidden_dim = j.at("dims").at("hidden_dim").get<int>();
    p.values = j.at("params").get<std::vector<double>>();
    if (p.values.size() != ScorerParams::param_count(p.input_dim, p.hidden_dim))
      throw FormatFailure("scorer checkpoint has wrong param count");
    return p;
  } catch (const json::exception& e) {
    throw FormatFailure(std::string("bad scorer checkpoint: ") + e.what());
  }
}

void save_policy(const std::filesystem::path& path, const PolicyParams& params,
                 std::uint64_t seed) {
  const json j = params_checkpoint(
      "policy",
      json{{"vocab_size", params.vocab_size},
           {"embed_dim", params.embed_dim},
           {"role",
            params.role == PolicyRole::Reference ? "reference" : "trainable"}},
      seed, params.values);
  atomic_write(path, j.dump() + "\n");
}

PolicyParams load_policy(const std::filesystem::path& path) {
  const json j = load_checkpoint(path, "policy");
  try {
    PolicyParams p;
    p.vocab_size = j.at("dims").at("vocab_size").get<int>();
    p.embed_dim = j.at("dims").at("embed_dim").get<int>();
    p.role = j.at("dims").at("role").get<std::string>() == "reference"
                 ? PolicyRole::Reference
                 : PolicyRole::Trainable;
    p.values = j.at("params").get<std::vector<double>>();
    if (p.values.size() != PolicyParams::param_count(p.vocab_size, p.embed_dim))
      throw FormatFailure("policy checkpoint has wrong param count");
    return p;
  } catch (const json::exception& e) {
    throw FormatFailure(std::string("bad policy checkpoint: ") + e.what());
  }
}

// ---- CSV ----

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string train_log_csv(const std::vector<TrainLogEntry>& log) {
  std::string out = "step,lr,loss,grad_norm\n";
  for (const auto& e : log) {
    out += std::to_string(e.step);
    out += ',';
    out += fmt(e.lr);
    out += ',';
    out += fmt(e.loss);
    out += ',';
    out += fmt(e.grad_norm);
    out += '\n';
  }
  return out;
}

std::string eval_report_csv(const EvalReport& report) {
  std::string out = "metric,value\n";
  out += "dataset_id," + report.dataset_id + "\n";
  out += "n," + std::to_string(report.n) + "\n";
  out += "accuracy," + fmt(report.accuracy) + "\n";
  if (report.consistency) out += "consistency," + fmt(*report.consistency) + "\n";
  out += "mean_margin," + fmt(report.mean_margin) + "\n";
  return out;
}

json eval_report_json(const EvalReport& report) {
  json j{{"dataset_id", report.dataset_id},
         {"n", report.n},
         {"accuracy", report.accuracy},
         {"mean_margin", report.mean_margin},
         {"margins", report.margins}};
  if (report.consistency) j["consistency"] = *report.consistency;
  return j;
}

std::string ablation_csv(const AblationReport& report) {
  std::string out = "cell,quality_accuracy,length_accuracy\n";
  for (const auto& c : report.cells)
    out += c.name + "," + fmt(c.quality_accuracy) + "," +
           fmt(c.length_accuracy) + "\n";
  return out;
}

json ablation_json(const AblationReport& report) {
  const char* kind = report.kind == AblationKind::ArmAblation ? "arm"
                     : report.kind == AblationKind::RcRatio   ? "rc_ratio"
                                                              : "lambda";
  json cells = json::array();
  for (const auto& c : report.cells)
    cells.push_back(json{{"cell", c.name},
                         {"quality_accuracy", c.quality_accuracy},
                         {"length_accuracy", c.length_accuracy}});
  return json{{"kind", kind}, {"cells", std::move(cells)}};
}

std::string sweep_csv(const SweepCurve& curve) {
  std::string out = "position,word_num,mean_diff\n";
  for (std::size_t j = 0; j < curve.mean_diffs.size(); ++j)
    out += std::to_string(j + 1) + "," + fmt(curve.word_nums[j]) + "," +
           fmt(curve.mean_diffs[j]) + "\n";
  return out;
}

json sweep_json(const SweepCurve& curve) {
  return json{{"word_nums", curve.word_nums},
              {"mean_diffs", curve.mean_diffs},
              {"rise_then_return", curve.rise_then_return},
              {"peak_index", curve.peak_index},
              {"prominence", curve.prominence},
              {"endpoint_gap", curve.endpoint_gap}};
}

}  // namespace rclab
