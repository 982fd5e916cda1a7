#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "rclab/objectives.hpp"
#include "rclab/training.hpp"

using namespace rclab;

namespace {

// Scalar quadratic over batch targets; the minimizer is the running mean.
BatchObjective quadratic(const std::vector<double>& targets) {
  return [targets](const std::vector<double>& params,
                   const std::vector<std::size_t>& batch) {
    LossResult r;
    r.grad.assign(params.size(), 0.0);
    for (std::size_t i : batch) {
      const double d = params[0] - targets[i];
      r.loss += d * d / static_cast<double>(batch.size());
      r.grad[0] += 2.0 * d / static_cast<double>(batch.size());
    }
    return r;
  };
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("learning-rate schedule warms up then decays to zero") {
  TrainConfig cfg;
  cfg.lr = 0.4;
  cfg.warmup_steps = 4;
  CHECK(lr_at(cfg, 0, 20) == 0.0);
  CHECK(lr_at(cfg, 2, 20) == doctest::Approx(0.2));
  CHECK(lr_at(cfg, 4, 20) == doctest::Approx(0.4));
  CHECK(lr_at(cfg, 19, 20) == doctest::Approx(0.0).epsilon(1e-12));
  for (int s = 5; s < 20; ++s) CHECK(lr_at(cfg, s, 20) < lr_at(cfg, s - 1, 20));
  CHECK_THROWS_AS(lr_at(cfg, 20, 20), std::invalid_argument);
  CHECK_THROWS_AS(lr_at(cfg, -1, 20), std::invalid_argument);
}

TEST_CASE("zero epochs is a no-op") {
  TrainConfig cfg;
  cfg.epochs = 0;
  const std::vector<double> start{3.0, -1.0};
  const auto res = train(start, quadratic({1.0, 2.0}), 2, cfg);
  CHECK(res.params == start);
  CHECK(res.log.empty());
}

TEST_CASE("sgd walks a quadratic downhill") {
  std::vector<double> targets(16);
  std::iota(targets.begin(), targets.end(), 0.0);  // mean 7.5
  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.warmup_steps = 3;
  cfg.epochs = 120;
  cfg.batch_size = 16;
  const auto res = train({0.0}, quadratic(targets), targets.size(), cfg);
  REQUIRE(res.log.size() == 120);
  CHECK(res.log.back().loss < res.log.front().loss);
  CHECK(res.params[0] == doctest::Approx(7.5).epsilon(0.01));
}

TEST_CASE("adam walks the same quadratic downhill") {
  std::vector<double> targets{2.0, 2.5, 3.0, 3.5};
  TrainConfig cfg;
  cfg.lr = 0.3;
  cfg.warmup_steps = 5;
  cfg.epochs = 60;
  cfg.batch_size = 4;
  cfg.optimizer = OptimizerKind::Adam;
  const auto res = train({-4.0}, quadratic(targets), targets.size(), cfg);
  CHECK(res.log.back().loss < res.log.front().loss);
  CHECK(res.params[0] == doctest::Approx(2.75).epsilon(0.05));
}

TEST_CASE("training is bit-identical across runs") {
  std::vector<double> targets(10);
  std::iota(targets.begin(), targets.end(), -5.0);
  TrainConfig cfg;
  cfg.lr = 0.05;
  cfg.epochs = 7;
  cfg.batch_size = 3;  // partial final batch, shuffled order matters
  cfg.seed = 99;
  const auto a = train({1.0}, quadratic(targets), targets.size(), cfg);
  const auto b = train({1.0}, quadratic(targets), targets.size(), cfg);
  CHECK(a.params == b.params);
  REQUIRE(a.log.size() == b.log.size());
  CHECK(a.log.size() == 7 * 4);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].loss == b.log[i].loss);
    CHECK(a.log[i].lr == b.log[i].lr);
    CHECK(a.log[i].step == static_cast<int>(i));
  }
  cfg.seed = 100;
  const auto c = train({1.0}, quadratic(targets), targets.size(), cfg);
  CHECK(c.params != a.params);
}

TEST_CASE("gradient clipping rescales to the norm cap") {
  // Constant gradient (3, 4): norm 5, clipped to unit norm.
  BatchObjective obj = [](const std::vector<double>&,
                          const std::vector<std::size_t>&) {
    LossResult r;
    r.loss = 1.0;
    r.grad = {3.0, 4.0};
    return r;
  };
  TrainConfig cfg;
  cfg.lr = 0.2;
  cfg.warmup_steps = 0;
  cfg.epochs = 2;  // two steps; the second lands on the zero end of the decay
  cfg.batch_size = 8;
  cfg.max_grad_norm = 1.0;
  const auto res = train({0.0, 0.0}, obj, 4, cfg);
  CHECK(res.params[0] == doctest::Approx(-0.2 * 0.6).epsilon(1e-12));
  CHECK(res.params[1] == doctest::Approx(-0.2 * 0.8).epsilon(1e-12));
  // The log keeps the raw norm, not the clipped one.
  CHECK(res.log[0].grad_norm == doctest::Approx(5.0));
}

TEST_CASE("non-finite losses stop training with the failing step") {
  BatchObjective obj = [](const std::vector<double>& p,
                          const std::vector<std::size_t>&) {
    LossResult r;
    r.loss = std::log(p[0]);  // goes NaN once p dips below zero
    r.grad = {1e6};
    return r;
  };
  TrainConfig cfg;
  cfg.lr = 1.0;
  cfg.warmup_steps = 1;
  cfg.epochs = 5;
  cfg.batch_size = 1;
  try {
    train({1.0}, obj, 1, cfg);
    FAIL("expected NumericFailure");
  } catch (const NumericFailure& e) {
    CHECK(e.step > 0);
  }
}

TEST_CASE("objective gradient size is checked") {
  BatchObjective obj = [](const std::vector<double>&,
                          const std::vector<std::size_t>&) {
    LossResult r;
    r.loss = 0.0;
    r.grad = {0.0, 0.0};  // wrong length for a 1-param model
    return r;
  };
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(train({0.0}, obj, 1, cfg), std::invalid_argument);
  CHECK_THROWS_AS(train({0.0}, quadratic({1.0}), 0, cfg), std::invalid_argument);
}

TEST_CASE("config validation rejects out-of-range values") {
  TrainConfig cfg;
  cfg.lr = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.mix_ratio = 1.5;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.adam_beta1 = 1.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.max_grad_norm = -1.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("dataset mixing keeps all base pairs plus a seeded slice") {
  PreferenceDataset d_rm(10);
  for (std::size_t i = 0; i < d_rm.size(); ++i)
    d_rm[i].chosen = {static_cast<Token>(i)};
  std::vector<RcExample> d_rc(8);
  for (std::size_t i = 0; i < d_rc.size(); ++i)
    d_rc[i].response = {static_cast<Token>(100 + i)};

  const auto half = mix_datasets(d_rm, d_rc, 0.5, 3);
  CHECK(half.size() == 14);
  const auto none = mix_datasets(d_rm, d_rc, 0.0, 3);
  CHECK(none.size() == 10);
  const auto all = mix_datasets(d_rm, d_rc, 1.0, 3);
  CHECK(all.size() == 18);

  // Every base pair survives; the slice holds distinct augmented items.
  int n_rm = 0;
  std::set<Token> rc_ids;
  for (const auto& item : half) {
    if (std::holds_alternative<PreferenceExample>(item))
      ++n_rm;
    else
      rc_ids.insert(std::get<RcExample>(item).response[0]);
  }
  CHECK(n_rm == 10);
  CHECK(rc_ids.size() == 4);
  for (Token t : rc_ids) {
    CHECK(t >= 100);
    CHECK(t < 108);
  }

  // Replays are exact item for item.
  auto tag = [](const TrainItem& item) {
    return std::holds_alternative<PreferenceExample>(item)
               ? std::get<PreferenceExample>(item).chosen[0]
               : std::get<RcExample>(item).response[0];
  };
  const auto again = mix_datasets(d_rm, d_rc, 0.5, 3);
  REQUIRE(again.size() == half.size());
  for (std::size_t i = 0; i < half.size(); ++i)
    CHECK(tag(half[i]) == tag(again[i]));
  CHECK_THROWS_AS(mix_datasets(d_rm, d_rc, -0.1, 3), std::invalid_argument);
}

}  // TEST_SUITE
