#include "rclab/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rclab/objectives.hpp"

namespace rclab {

void validate(const TrainConfig& config) {
  if (!(config.lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (config.warmup_steps < 0)
    throw std::invalid_argument("warmup_steps must be >= 0");
  if (config.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (config.batch_size < 1)
    throw std::invalid_argument("batch_size must be >= 1");
  if (config.mix_ratio < 0.0 || config.mix_ratio > 1.0)
    throw std::invalid_argument("mix_ratio must lie in [0, 1]");
  if (config.adam_beta1 < 0.0 || config.adam_beta1 >= 1.0 ||
      config.adam_beta2 < 0.0 || config.adam_beta2 >= 1.0 ||
      !(config.adam_eps > 0.0))
    throw std::invalid_argument("bad adam hyperparameters");
  if (config.max_grad_norm < 0.0)
    throw std::invalid_argument("max_grad_norm must be >= 0");
}

double lr_at(const TrainConfig& config, int step, int total_steps) {
  if (step < 0 || step >= total_steps)
    throw std::invalid_argument("step outside schedule");
  if (step < config.warmup_steps)
    return config.lr * static_cast<double>(step) /
           static_cast<double>(config.warmup_steps);
  const int tail = total_steps - 1 - config.warmup_steps;
  const double progress =
      tail <= 0 ? 1.0
                : static_cast<double>(step - config.warmup_steps) /
                      static_cast<double>(tail);
  const double pi = 3.14159265358979323846;
  return config.lr * 0.5 * (1.0 + std::cos(pi * progress));
}

TrainResult train(std::vector<double> params, const BatchObjective& objective,
                  std::size_t dataset_size, const TrainConfig& config) {
  validate(config);
  if (dataset_size == 0) throw std::invalid_argument("empty training set");

  const std::size_t batches_per_epoch =
      (dataset_size + config.batch_size - 1) /
      static_cast<std::size_t>(config.batch_size);
  const int total_steps =
      config.epochs * static_cast<int>(batches_per_epoch);

  TrainResult result;
  result.log.reserve(static_cast<std::size_t>(total_steps));

  std::vector<double> m, v;  // adam state
  if (config.optimizer == OptimizerKind::Adam) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
  }

  std::vector<std::size_t> order(dataset_size);
  std::iota(order.begin(), order.end(), 0);
  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, "train-epoch",
                        static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    for (std::size_t b = 0; b < batches_per_epoch; ++b, ++step) {
      const std::size_t lo = b * static_cast<std::size_t>(config.batch_size);
      const std::size_t hi =
          std::min(dataset_size, lo + static_cast<std::size_t>(config.batch_size));
      const std::vector<std::size_t> batch(order.begin() + lo, order.begin() + hi);

      LossResult r = objective(params, batch);
      if (r.grad.size() != params.size())
        throw std::invalid_argument("objective returned mismatched gradient");

      double norm_sq = 0.0;
      for (double g : r.grad) norm_sq += g * g;
      const double grad_norm = std::sqrt(norm_sq);
      if (!std::isfinite(r.loss) || !std::isfinite(grad_norm))
        throw NumericFailure("non-finite loss or gradient", step);

      double scale = 1.0;
      if (config.max_grad_norm > 0.0 && grad_norm > config.max_grad_norm)
        scale = config.max_grad_norm / grad_norm;

      const double lr = lr_at(config, step, total_steps);
      if (config.optimizer == OptimizerKind::Sgd) {
        for (std::size_t i = 0; i < params.size(); ++i)
          params[i] -= lr * scale * r.grad[i];
      } else {
        const double t = static_cast<double>(step + 1);
        const double c1 = 1.0 - std::pow(config.adam_beta1, t);
        const double c2 = 1.0 - std::pow(config.adam_beta2, t);
        for (std::size_t i = 0; i < params.size(); ++i) {
          const double g = scale * r.grad[i];
          m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * g;
          v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * g * g;
          params[i] -=
              lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.adam_eps);
        }
      }
      result.log.push_back({step, lr, r.loss, grad_norm});
    }
  }
  result.params = std::move(params);
  return result;
}

std::vector<TrainItem> mix_datasets(const PreferenceDataset& d_rm,
                                    const std::vector<RcExample>& d_rc,
                                    double mix_ratio, std::uint64_t seed) {
  if (mix_ratio < 0.0 || mix_ratio > 1.0)
    throw std::invalid_argument("mix_ratio must lie in [0, 1]");
  const std::size_t take = static_cast<std::size_t>(
      std::ceil(mix_ratio * static_cast<double>(d_rc.size())));

  std::vector<std::size_t> rc_order(d_rc.size());
  std::iota(rc_order.begin(), rc_order.end(), 0);
  Rng select(derive_seed(seed, "mix-select"));
  select.shuffle(rc_order);

  std::vector<TrainItem> items;
  items.reserve(d_rm.size() + take);
  for (const auto& ex : d_rm) items.emplace_back(ex);
  for (std::size_t i = 0; i < take; ++i)
    items.emplace_back(d_rc[rc_order[i]]);

  Rng shuffle_rng(derive_seed(seed, "mix-shuffle"));
  shuffle_rng.shuffle(items);
  return items;
}

}  // namespace rclab
