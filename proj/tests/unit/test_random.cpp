#include <doctest.h>

#include <cmath>
#include <vector>

#include "qdent/random.hpp"
#include "stats.hpp"

using namespace qdent;

TEST_CASE("same seed and stream reproduce the sequence") {
  Rng a(42, streams::kEmission, 7), b(42, streams::kEmission, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a() == b());
}

TEST_CASE("different streams and blocks diverge") {
  Rng a(42, streams::kEmission, 0), b(42, streams::kDetection, 0), c(42, streams::kEmission, 1);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    same_ab += x == b();
    same_ac += x == c();
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("splitmix64 advances its state") {
  std::uint64_t s = 0;
  const auto first = splitmix64(s);
  const auto second = splitmix64(s);
  CHECK(first != second);
  CHECK(first == 0xe220a8397b1dcdafULL);
}

TEST_CASE("uniform draws lie in the open unit interval and are uniform") {
  Rng rng(3);
  std::vector<double> x(200000);
  for (double& v : x) {
    v = rng.uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
  const auto m = teststats::moments(x);
  CHECK(std::abs(m.mean - 0.5) < 4 * m.sem());
  CHECK(m.var == doctest::Approx(1.0 / 12).epsilon(0.01));
  CHECK(teststats::ks_pvalue(x, [](double v) { return v; }) > 0.001);
}

TEST_CASE("exponential draws match the exponential law") {
  Rng rng(5);
  const double mean = 126.7;
  std::vector<double> x(200000);
  for (double& v : x) v = rng.exponential(mean);
  const auto m = teststats::moments(x);
  CHECK(std::abs(m.mean - mean) < 4 * m.sem());
  CHECK(teststats::ks_pvalue(x, [&](double v) { return 1 - std::exp(-v / mean); }) > 0.001);
  CHECK(rng.exponential(0.0) == 0.0);
}

TEST_CASE("normal draws have zero mean and unit variance") {
  Rng rng(9);
  std::vector<double> x(200000);
  for (double& v : x) v = rng.normal();
  const auto m = teststats::moments(x);
  CHECK(std::abs(m.mean) < 4 * m.sem());
  CHECK(m.var == doctest::Approx(1.0).epsilon(0.02));
  CHECK(teststats::ks_pvalue(x, [](double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); }) >
        0.001);
}

TEST_CASE("bernoulli frequency") {
  Rng rng(11);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3);
  const double sigma = std::sqrt(n * 0.3 * 0.7);
  CHECK(std::abs(hits - 0.3 * n) < 4 * sigma);
}
