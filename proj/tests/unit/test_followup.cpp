#include <doctest.h>

#include <random>
#include <stdexcept>

#include "savvy/followup.hpp"

using namespace savvy;

TEST_CASE("maximum follow-up ignores event type") {
  const std::vector<double> t{3, 5, 7};
  CHECK(max_followup_time(t) == 7);
  CHECK(max_followup_time(std::vector<double>{4}) == 4);
  CHECK_THROWS_WITH_AS(max_followup_time(std::vector<double>{}), "no observations",
                       std::invalid_argument);
}

TEST_CASE("empirical quantile of observed times") {
  std::vector<double> t;
  for (int i = 1; i <= 10; ++i) t.push_back(i);
  CHECK(quantile_followup_time(t, 0.3) == 3);
  CHECK(quantile_followup_time(t, 0.9) == 9);
  CHECK(quantile_followup_time(t, 0.6) == 6);
  CHECK(quantile_followup_time(t, 1.0) == 10);
  CHECK(quantile_followup_time(std::vector<double>{5, 5, 5, 5}, 0.3) == 5);
  CHECK(quantile_followup_time(std::vector<double>{5, 5, 5, 5}, 0.9) == 5);
}

TEST_CASE("grid rules") {
  const std::vector<double> a{1, 4, 7}, b{2, 9, 3};
  const auto g = evaluation_times(a, b);
  CHECK(g.tau_A == 7);
  CHECK(g.tau_B == 9);
  CHECK(g.tau_min == 7);
  REQUIRE(g.rules.size() == 5);
  CHECK(g.rule("own_max").tau_A == 7);
  CHECK(g.rule("own_max").tau_B == 9);
  CHECK(g.rule("tau").tau_A == 7);
  CHECK(g.rule("tau").tau_B == 7);
  for (std::size_t i = 0; i < kRuleLabels.size(); ++i) CHECK(g.rules[i].label == kRuleLabels[i]);

  const std::vector<double> same{6, 6, 6};
  const auto c = evaluation_times(same, same);
  for (const auto& r : c.rules) {
    CHECK(r.tau_A == 6);
    CHECK(r.tau_B == 6);
  }
}

TEST_CASE("grid properties on random samples") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 100.0);
  std::uniform_int_distribution<int> size(1, 40);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> a(size(rng)), b(size(rng));
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    const auto g = evaluation_times(a, b);
    CHECK(g.tau_min <= g.tau_A);
    CHECK(g.tau_min <= g.tau_B);
    CHECK(g.quantiles[0].tau <= g.quantiles[1].tau);
    CHECK(g.quantiles[1].tau <= g.quantiles[2].tau);
    CHECK(g.quantiles[2].tau <= g.tau_min);
    double prev = 0;
    for (double p = 0.05; p <= 1.0; p += 0.05) {
      const double q = quantile_followup_time(a, p);
      CHECK(q >= prev);
      CHECK(std::find(a.begin(), a.end(), q) != a.end());
      prev = q;
    }
    std::vector<double> a4 = a, b4 = b;
    for (auto& x : a4) x *= 3;
    for (auto& x : b4) x *= 3;
    const auto g4 = evaluation_times(a4, b4);
    for (std::size_t i = 0; i < g.rules.size(); ++i) {
      CHECK(g4.rules[i].tau_A == 3 * g.rules[i].tau_A);
      CHECK(g4.rules[i].tau_B == 3 * g.rules[i].tau_B);
    }
  }
}
