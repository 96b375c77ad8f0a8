#include <cmath>

#include "doctest.h"
#include "kgeval/metrics.hpp"
#include "kgeval/rng.hpp"
#include "support/oracles.hpp"

using namespace kgeval;

TEST_SUITE("metrics") {

TEST_CASE("accuracy and rmse examples") {
  const std::vector<int> a = {1, 2, 3}, b = {1, 2, 3};
  CHECK(accuracy(a, b) == 1.0);
  const std::vector<double> g = {1.0, 2.0}, p = {1.0, 2.0};
  CHECK(rmse(g, p) == 0.0);
  const std::vector<double> g2 = {0.0, 0.0}, p2 = {1.0, 1.0};
  CHECK(rmse(g2, p2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(accuracy(std::vector<int>{1}, std::vector<int>{1, 2}), ValidationError);
}

TEST_CASE("ari examples") {
  const std::vector<int> a = {0, 0, 1, 1};
  CHECK(ari(a, a) == doctest::Approx(1.0));
  const std::vector<int> permuted = {5, 5, 2, 2};
  CHECK(ari(a, permuted) == doctest::Approx(1.0));
  const std::vector<int> b = {0, 1, 0, 1};
  CHECK(ari(a, b) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("nmi examples") {
  const std::vector<int> a = {0, 0, 1, 1};
  CHECK(nmi(a, a) == doctest::Approx(1.0));
  const std::vector<int> permuted = {9, 9, 4, 4};
  CHECK(nmi(a, permuted) == doctest::Approx(1.0));
  const std::vector<int> indep = {0, 1, 0, 1};
  CHECK(nmi(a, indep) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cluster_accuracy examples") {
  const std::vector<int> gold = {0, 0, 1, 1};
  CHECK(cluster_accuracy(gold, gold) == 1.0);
  const std::vector<int> permuted = {1, 1, 0, 0};
  CHECK(cluster_accuracy(gold, permuted) == 1.0);
  const std::vector<int> single = {0, 0, 0, 0};
  CHECK(cluster_accuracy(gold, single) == doctest::Approx(0.5));
  const std::vector<int> noise = {-1, -1, -1, -1};
  CHECK(cluster_accuracy(gold, noise) == 0.0);
}

TEST_CASE("correlation examples") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 3);
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  CHECK(spearman(x, y) == doctest::Approx(1.0));

  std::vector<double> rev(x.rbegin(), x.rend());
  CHECK(spearman(x, rev) == doctest::Approx(-1.0));
  CHECK(kendall_tau_b(x, rev) == doctest::Approx(-1.0));

  const std::vector<double> gold = {1, 2, 3, 4}, predicted = {1, 2, 4, 3};
  CHECK(kendall_tau_b(gold, predicted) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  const std::vector<double> flat = {2, 2, 2, 2};
  const std::vector<double> ramp = {1, 2, 3, 4};
  CHECK(pearson(flat, ramp) == 0.0);  // zero-variance convention
  CHECK(spearman(flat, flat) == 0.0);
  CHECK(kendall_tau_b(flat, flat) == 0.0);
}

TEST_CASE("harmonic mean examples") {
  CHECK(harmonic_mean(0.2, 0.2) == doctest::Approx(0.2));
  CHECK(harmonic_mean(0.207, 0.294) == doctest::Approx(0.243).epsilon(2e-3));
  CHECK(harmonic_mean(0.0, 0.0) == 0.0);
  CHECK(harmonic_mean(-0.5, 0.5) == 0.0);
}

TEST_CASE("f1_at_k examples") {
  const std::vector<uint32_t> topk = {1, 2, 3, 4, 5};
  const std::vector<uint32_t> test = {1, 2, 3, 4, 5};
  CHECK(f1_at_k(topk, test, 5) == doctest::Approx(1.0));
  const std::vector<uint32_t> miss = {9, 10};
  CHECK(f1_at_k(miss, test, 5) == 0.0);

  const std::vector<uint32_t> topk10 = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<uint32_t> small_test = {1, 2, 3, 4, 5};
  CHECK(f1_at_k(topk10, small_test, 10) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(f1_at_k(topk, test, 0), ConfigError);
}

TEST_CASE("metrics match brute-force oracles on random instances") {
  Rng rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 2 + rng.below(29);

    std::vector<int> la(n), lb(n);
    const int ka = 1 + int(rng.below(5)), kb = 1 + int(rng.below(5));
    for (size_t i = 0; i < n; ++i) {
      la[i] = int(rng.below(ka));
      lb[i] = int(rng.below(kb));
    }
    CHECK(ari(la, lb) == doctest::Approx(oracle::ari(la, lb)).epsilon(1e-9));
    CHECK(nmi(la, lb) == doctest::Approx(oracle::nmi(la, lb)).epsilon(1e-9));
    CHECK(cluster_accuracy(la, lb) ==
          doctest::Approx(oracle::cluster_accuracy(la, lb)).epsilon(1e-9));
    CHECK(accuracy(la, lb) == doctest::Approx(oracle::accuracy(la, lb)).epsilon(1e-12));

    std::vector<double> x(n), y(n);
    for (size_t i = 0; i < n; ++i) {
      x[i] = std::round(rng.uniform(-5, 5) * 4) / 4.0;  // induce ties
      y[i] = std::round(rng.uniform(-5, 5) * 4) / 4.0;
    }
    CHECK(pearson(x, y) == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-9));
    CHECK(spearman(x, y) == doctest::Approx(oracle::spearman(x, y)).epsilon(1e-9));
    CHECK(kendall_tau_b(x, y) == doctest::Approx(oracle::tau_b(x, y)).epsilon(1e-9));
    CHECK(rmse(x, y) == doctest::Approx(oracle::rmse(x, y)).epsilon(1e-9));

    const size_t k = 1 + rng.below(8);
    std::vector<uint32_t> topk;
    for (uint32_t item = 0; item < 12 && topk.size() < k; ++item)
      if (rng.coin()) topk.push_back(item);
    std::vector<uint32_t> test_set;
    const size_t n_test = 1 + rng.below(6);
    for (size_t i = 0; i < n_test; ++i) test_set.push_back(uint32_t(rng.below(12)));
    CHECK(f1_at_k(topk, test_set, k) ==
          doctest::Approx(oracle::f1_at_k(topk, test_set, k)).epsilon(1e-9));
  }
}

TEST_CASE("ari of independent random partitions is centered at zero") {
  Rng rng(77);
  double sum = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    std::vector<int> a(50), b(50);
    for (size_t i = 0; i < 50; ++i) {
      a[i] = int(rng.below(4));
      b[i] = int(rng.below(4));
    }
    sum += ari(a, b);
  }
  CHECK(std::fabs(sum / trials) < 0.02);
}

TEST_CASE("relabeling invariance of ari and nmi") {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const size_t n = 5 + rng.below(20);
    std::vector<int> a(n), b(n), b_relabled(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = int(rng.below(3));
      b[i] = int(rng.below(3));
      b_relabled[i] = 10 - b[i];  // injective relabel
    }
    CHECK(ari(a, b) == doctest::Approx(ari(a, b_relabled)).epsilon(1e-12));
    CHECK(nmi(a, b) == doctest::Approx(nmi(a, b_relabled)).epsilon(1e-12));
  }
}

TEST_CASE("apply_scenario identities") {
  SUBCASE("coverage 1.0 makes both values equal") {
    const std::vector<ScenarioOutcome> outcomes = {{1.0, true}, {0.0, true}, {1.0, true}};
    const ScenarioMetrics m = apply_scenario("accuracy", outcomes, 1.0,
                                             OutcomeAggregation::Mean,
                                             MetricDirection::HigherBetter);
    CHECK(m.value_known == m.value_all);
  }
  SUBCASE("classification: all = known * coverage under the unmapped-wrong rule") {
    std::vector<ScenarioOutcome> outcomes;
    for (int i = 0; i < 4; ++i) outcomes.push_back({1.0, true});
    for (int i = 0; i < 4; ++i) outcomes.push_back({0.0, false});
    const ScenarioMetrics m = apply_scenario("accuracy", outcomes, 0.5,
                                             OutcomeAggregation::Mean,
                                             MetricDirection::HigherBetter);
    CHECK(m.value_known == 1.0);
    CHECK(m.value_all == 0.5);
  }
  SUBCASE("regression: rmse_all = rmse_known * sqrt(coverage) when unmapped errors vanish") {
    // unmapped gold equals the train mean, so their squared error is 0
    std::vector<ScenarioOutcome> outcomes = {{4.0, true}, {1.0, true}, {0.0, false},
                                             {0.0, false}};
    const ScenarioMetrics m = apply_scenario("rmse", outcomes, 0.5,
                                             OutcomeAggregation::RootMean,
                                             MetricDirection::LowerBetter);
    CHECK(m.value_known == doctest::Approx(std::sqrt(2.5)));
    CHECK(m.value_all == doctest::Approx(std::sqrt(2.5) * std::sqrt(0.5)).epsilon(1e-12));
  }
  SUBCASE("no outcomes is an error") {
    CHECK_THROWS_AS(apply_scenario("x", {}, 0.5, OutcomeAggregation::Mean,
                                   MetricDirection::HigherBetter),
                    ValidationError);
  }
}

TEST_CASE("bounds") {
  Rng rng(55);
  for (int t = 0; t < 100; ++t) {
    const size_t n = 2 + rng.below(20);
    std::vector<int> a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = int(rng.below(3));
      b[i] = int(rng.below(3));
    }
    const double acc = accuracy(a, b);
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    const double m = nmi(a, b);
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
    const double r = ari(a, b);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
  }
}

}  // TEST_SUITE
