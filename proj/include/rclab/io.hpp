#pragma once

// File formats: JSONL datasets, CSV train logs and reports, JSON checkpoints
// and run manifests. Every write goes through a temp-file-plus-rename so a
// crash never leaves a half-written artifact behind.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rclab/builders.hpp"
#include "rclab/constraints.hpp"
#include "rclab/corpus.hpp"
#include "rclab/evalsuite.hpp"
#include "rclab/policy.hpp"
#include "rclab/scorer.hpp"
#include "rclab/training.hpp"

namespace rclab {

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void atomic_write(const std::filesystem::path& path, const std::string& content);

// ---- JSONL datasets ----

nlohmann::json to_json(const AugmentedPrompt& prompt);
AugmentedPrompt prompt_from_json(const VocabLayout& vocab, const nlohmann::json& j);

std::string to_jsonl(const PreferenceDataset& data);
PreferenceDataset preference_from_jsonl(const VocabLayout& vocab,
                                        const std::string& text);

std::string to_jsonl(const std::vector<RcExample>& data);
std::vector<RcExample> rc_from_jsonl(const VocabLayout& vocab,
                                     const std::string& text);

std::string to_jsonl(const MultiLengthDataset& data);
MultiLengthDataset multilength_from_jsonl(const VocabLayout& vocab,
                                          const std::string& text);

std::string to_jsonl(const SweepDataset& data);
SweepDataset sweep_from_jsonl(const VocabLayout& vocab, const std::string& text);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// ---- checkpoints ----

void save_scorer(const std::filesystem::path& path, const ScorerParams& params,
                 std::uint64_t seed);
ScorerParams load_scorer(const std::filesystem::path& path);

void save_policy(const std::filesystem::path& path, const PolicyParams& params,
                 std::uint64_t seed);
PolicyParams load_policy(const std::filesystem::path& path);

// ---- train log / reports ----

std::string train_log_csv(const std::vector<TrainLogEntry>& log);
std::string eval_report_csv(const EvalReport& report);
nlohmann::json eval_report_json(const EvalReport& report);
std::string ablation_csv(const AblationReport& report);
nlohmann::json ablation_json(const AblationReport& report);
std::string sweep_csv(const SweepCurve& curve);
nlohmann::json sweep_json(const SweepCurve& curve);

}  // namespace rclab
