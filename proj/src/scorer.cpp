#include "rclab/scorer.hpp"

#include <cmath>
#include <stdexcept>

#include "rclab/rng.hpp"

namespace rclab {

ScorerParams init_scorer(int input_dim, int hidden_dim, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 0)
    throw std::invalid_argument("bad scorer dimensions");
  ScorerParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.values.resize(ScorerParams::param_count(input_dim, hidden_dim));
  Rng rng(derive_seed(seed, "scorer-init"));
  for (auto& v : p.values) v = rng.uniform01() * 0.2 - 0.1;
  return p;
}

namespace {

void check_shape(const ScorerParams& p, const FeatureVector& f) {
  if (static_cast<int>(f.size()) != p.input_dim)
    throw std::invalid_argument("feature dimension mismatch");
  if (p.values.size() != ScorerParams::param_count(p.input_dim, p.hidden_dim))
    throw std::invalid_argument("scorer param vector has wrong length");
}

}  // namespace

double score(const ScorerParams& p, const FeatureVector& f) {
  check_shape(p, f);
  const int D = p.input_dim, H = p.hidden_dim;
  if (H == 0) {
    double s = p.values[static_cast<std::size_t>(D)];
    for (int i = 0; i < D; ++i) s += p.values[i] * f[i];
    return s;
  }
  const double* w1 = p.values.data();
  const double* b1 = w1 + static_cast<std::size_t>(H) * D;
  const double* w2 = b1 + H;
  const double b2 = w2[H];
  double s = b2;
  for (int h = 0; h < H; ++h) {
    double z = b1[h];
    const double* row = w1 + static_cast<std::size_t>(h) * D;
    for (int i = 0; i < D; ++i) z += row[i] * f[i];
    s += w2[h] * std::tanh(z);
  }
  return s;
}

void score_backward(const ScorerParams& p, const FeatureVector& f,
                    double weight, std::vector<double>& grad) {
  check_shape(p, f);
  if (grad.size() != p.values.size())
    throw std::invalid_argument("gradient vector has wrong length");
  const int D = p.input_dim, H = p.hidden_dim;
  if (H == 0) {
    for (int i = 0; i < D; ++i) grad[i] += weight * f[i];
    grad[static_cast<std::size_t>(D)] += weight;
    return;
  }
  const double* w1 = p.values.data();
  const double* b1 = w1 + static_cast<std::size_t>(H) * D;
  const double* w2 = b1 + H;
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + static_cast<std::size_t>(H) * D;
  double* g_w2 = g_b1 + H;
  for (int h = 0; h < H; ++h) {
    double z = b1[h];
    const double* row = w1 + static_cast<std::size_t>(h) * D;
    for (int i = 0; i < D; ++i) z += row[i] * f[i];
    const double a = std::tanh(z);
    g_w2[h] += weight * a;
    const double dz = weight * w2[h] * (1.0 - a * a);
    g_b1[h] += dz;
    double* g_row = g_w1 + static_cast<std::size_t>(h) * D;
    for (int i = 0; i < D; ++i) g_row[i] += dz * f[i];
  }
  g_w2[H] += weight;  // output bias
}

}  // namespace rclab
