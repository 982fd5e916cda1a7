#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "rclab/rng.hpp"

using namespace rclab;

TEST_SUITE("rng") {

TEST_CASE("derive_seed is a pure function of its arguments") {
  CHECK(derive_seed(7, "corpus", 3) == derive_seed(7, "corpus", 3));
  CHECK(derive_seed(7, "corpus", 3) != derive_seed(7, "corpus", 4));
  CHECK(derive_seed(7, "corpus", 3) != derive_seed(7, "oracle", 3));
  CHECK(derive_seed(7, "corpus", 3) != derive_seed(8, "corpus", 3));
}

TEST_CASE("identical seeds give identical streams") {
  Rng a(123), b(123);
  for (int i = 0; i < 200; ++i) {
    CHECK(a.uniform_int(0, 1000) == b.uniform_int(0, 1000));
  }
}

TEST_CASE("uniform_int stays inside the inclusive range and hits both ends") {
  Rng rng(5);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 2000; ++i) {
    const int v = rng.uniform_int(3, 9);
    CHECK(v >= 3);
    CHECK(v <= 9);
    saw_lo |= v == 3;
    saw_hi |= v == 9;
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
  CHECK_THROWS_AS(rng.uniform_int(5, 4), std::invalid_argument);
}

TEST_CASE("uniform01 lands in [0, 1)") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal draws have roughly standard moments") {
  Rng rng(17);
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    CHECK(std::isfinite(x));
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.1);
}

TEST_CASE("shuffle permutes without losing elements") {
  Rng rng(23);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  auto shuffled = v;
  rng.shuffle(shuffled);
  CHECK(shuffled != v);
  auto sorted = shuffled;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == v);
}

TEST_CASE("derangement never keeps an element in place") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto perm = rng.derangement(37);
    std::set<std::size_t> seen(perm.begin(), perm.end());
    CHECK(seen.size() == 37);
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(perm[i] != i);
  }
  CHECK_THROWS_AS(rng.derangement(1), std::invalid_argument);
}

}  // TEST_SUITE
