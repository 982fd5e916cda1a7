#pragma once

// Deterministic mini-batch training loop with warmup + cosine decay, SGD or
// Adam, and an optional gradient max-norm clip. The loop is generic over the
// objective: anything that maps (flat params, batch indices) to a loss and a
// gradient can be trained.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rclab/constraints.hpp"
#include "rclab/corpus.hpp"

namespace rclab {

enum class OptimizerKind { Sgd, Adam };

struct TrainConfig {
  double lr = 1e-2;
  int warmup_steps = 10;
  int epochs = 5;
  int batch_size = 64;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double max_grad_norm = 0.0;  // 0 disables clipping
  double mix_ratio = 1.0;      // fraction of the Rc set blended in
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

// Linear warmup to lr over warmup_steps, then cosine decay to zero at the
// final step.
double lr_at(const TrainConfig& config, int step, int total_steps);

struct TrainLogEntry {
  int step;
  double lr;
  double loss;
  double grad_norm;
};

struct TrainResult {
  std::vector<double> params;
  std::vector<TrainLogEntry> log;
};

struct NumericFailure : std::runtime_error {
  int step;
  NumericFailure(const std::string& what, int step_)
      : std::runtime_error(what), step(step_) {}
};

using BatchObjective = std::function<struct LossResult(
    const std::vector<double>& params, const std::vector<std::size_t>& batch)>;

TrainResult train(std::vector<double> params, const BatchObjective& objective,
                  std::size_t dataset_size, const TrainConfig& config);

// One stream item: either a plain preference pair or a response-conditioned
// pair. Mixed batches score each family with its own loss and add them.
using TrainItem = std::variant<PreferenceExample, RcExample>;

// All of d_rm plus a seeded ceil(mix_ratio * |d_rc|) subset of d_rc, shuffled
// together deterministically.
std::vector<TrainItem> mix_datasets(const PreferenceDataset& d_rm,
                                    const std::vector<RcExample>& d_rc,
                                    double mix_ratio, std::uint64_t seed);

}  // namespace rclab
