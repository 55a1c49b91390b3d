#include <doctest.h>

#include <cmath>
#include <random>

#include "savvy/comparisons.hpp"
#include "savvy/errors.hpp"
#include "savvy/simulate.hpp"
#include "support/fixtures.hpp"

using namespace savvy;
using doctest::Approx;

namespace {

Estimate prob(double value, double variance, Group g = Group::A) {
  Estimate e;
  e.method = Method::IP;
  e.group = g;
  e.tau_label = "tau";
  e.value = value;
  e.variance = variance;
  return e;
}

const Estimate* find(const SchemeResult& s, Method m, Target t, Group g, const std::string& rule) {
  for (const auto& e : s.estimates) {
    if (e.method == m && e.target == t && e.group == g && e.tau_label == rule) return &e;
  }
  return nullptr;
}

AnalysisOptions quick(std::size_t b = 50) {
  AnalysisOptions o;
  o.bootstrap.replicates = b;
  return o;
}

}  // namespace

TEST_CASE("risk difference worked example") {
  const auto rd = risk_difference(prob(0.5, 0.01), prob(0.3, 0.01, Group::B));
  CHECK(rd.estimate == Approx(0.2).epsilon(1e-15));
  CHECK(std::sqrt(rd.variance) == Approx(0.14142).epsilon(1e-5));
  CHECK(rd.ci_low == Approx(-0.0772).epsilon(1e-3));
  CHECK(rd.ci_high == Approx(0.4772).epsilon(1e-3));
  const auto swapped = risk_difference(prob(0.3, 0.01), prob(0.5, 0.01, Group::B));
  CHECK(swapped.estimate == -rd.estimate);
  CHECK(swapped.ci_low == Approx(-rd.ci_high).epsilon(1e-15));
  const auto zero = risk_difference(prob(0.4, 0.02), prob(0.4, 0.03));
  CHECK(zero.estimate == 0.0);
  CHECK(zero.ci_low == -zero.ci_high);
}

TEST_CASE("relative risk worked example") {
  const auto rr = relative_risk(prob(0.5, 0.01), prob(0.25, 0.01));
  CHECK(rr.estimate == 2.0);
  CHECK(rr.variance == Approx(0.2).epsilon(1e-15));
  CHECK(rr.ci_low == Approx(0.832).epsilon(1e-3));
  CHECK(rr.ci_high == Approx(4.806).epsilon(1e-3));
  const auto inv = relative_risk(prob(0.25, 0.01), prob(0.5, 0.01));
  CHECK(inv.estimate == 0.5);
  CHECK(inv.ci_low == Approx(1.0 / rr.ci_high).epsilon(1e-14));
  CHECK(inv.ci_high == Approx(1.0 / rr.ci_low).epsilon(1e-14));
  CHECK(relative_risk(prob(0.3, 0.01), prob(0.3, 0.02)).estimate == 1.0);
}

TEST_CASE("relative risk with zero numerator or denominator") {
  const auto b0 = relative_risk(prob(0.3, 0.01), prob(0.0, 0.0));
  CHECK(b0.degenerate);
  CHECK(std::isnan(b0.estimate));
  const auto a0 = relative_risk(prob(0.0, 0.0), prob(0.3, 0.01));
  CHECK(a0.degenerate);
  CHECK(a0.estimate == 0.0);
  CHECK(std::isnan(a0.ci_low));
}

TEST_CASE("comparisons check their inputs") {
  auto a = prob(0.5, 0.01), b = prob(0.3, 0.01);
  b.tau_label = "tau_p30";
  CHECK_THROWS_AS(risk_difference(a, b), std::invalid_argument);
  b = prob(0.3, 0.01);
  b.method = Method::AalenJohansen;
  CHECK_THROWS_AS(relative_risk(a, b), std::invalid_argument);
  a.method = b.method = Method::NelsonAalen;
  CHECK_THROWS_AS(risk_difference(a, b), std::invalid_argument);
}

TEST_CASE("reconstruction identities") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double qb = u(rng);
    const double a = u(rng);
    const auto rd = risk_difference(prob(a, 0.01), prob(qb, 0.01));
    const auto rr = relative_risk(prob(a, 0.01), prob(qb, 0.01));
    CHECK(rd.estimate + qb == Approx(a).epsilon(1e-15));
    CHECK(rr.estimate * qb == Approx(a).epsilon(1e-15));
    CHECK(rd.estimate >= -1.0);
    CHECK(rd.estimate <= 1.0);
  }
}

TEST_CASE("full grid on an F4 trial") {
  std::vector<testing::Obs> obs = testing::f4_obs(Group::A);
  for (const auto& o : testing::f4_obs(Group::B)) obs.push_back(o);
  obs.push_back({Group::B, 5, EventType::SoftCompeting});
  const auto table = compare_all(testing::make_trial(obs, "SAVVY-0001"), quick());
  REQUIRE(table.aes.size() == 1);
  const auto& ae = table.aes[0];
  CHECK(ae.n_A == 4);
  CHECK(ae.n_B == 5);
  REQUIRE(ae.schemes.size() == 4);
  const auto& all = ae.schemes[0];
  CHECK(all.scheme == Scheme::AllEvents);
  CHECK(all.followup.tau_min == 4);
  const auto* aj = find(all, Method::AalenJohansen, Target::Event, Group::A, "tau");
  REQUIRE(aj);
  CHECK(aj->value == 0.75);
  CHECK(aj->variance_source == VarianceSource::Bootstrap);
  CHECK(aj->variance >= 0.0);
  CHECK(all.descriptives.at(Status::Event, Group::A).count == 2);

  for (const auto& s : ae.schemes) {
    const std::size_t per_rule = is_composite(s.scheme) ? 7 * 2 : (7 + 5) * 2;
    CHECK(s.estimates.size() == 5 * per_rule);
    const std::size_t targets = is_composite(s.scheme) ? 1 : 2;
    CHECK(s.hazard_ratios.size() == targets * (1 + 2 * 5));
  }
  bool composite_pair = false;
  for (const auto& r : ae.log_ratios) {
    if (r.pair == "IP/OneMinusKM" && r.scheme == Scheme::CompositeAllEvents) composite_pair = true;
  }
  CHECK(composite_pair);
}

TEST_CASE("schemes coincide without soft competing events") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> day(1, 15), type(0, 2);
  std::vector<testing::Obs> obs;
  for (int i = 0; i < 30; ++i) {
    obs.push_back({i % 2 ? Group::A : Group::B, double(day(rng)), EventType(type(rng))});
  }
  const auto table = compare_all(testing::make_trial(obs), quick(30));
  const auto& s = table.aes[0].schemes;
  REQUIRE(s[0].estimates.size() == s[1].estimates.size());
  for (std::size_t i = 0; i < s[0].estimates.size(); ++i) {
    const double x = s[0].estimates[i].value, y = s[1].estimates[i].value;
    CHECK((x == y || (std::isnan(x) && std::isnan(y))));
  }
}

TEST_CASE("empty comparator group is fatal") {
  const auto trial = testing::make_trial(testing::f4_obs(Group::A));
  CHECK_THROWS_AS(compare_all(trial, quick()), ValidationError);
}

TEST_CASE("risk-difference intervals cover the truth about 95% of the time") {
  SimConfig c;
  c.group_a = {500, 0.2, 0.1, 0.0};
  c.group_b = {500, 0.1, 0.1, 0.0};
  c.censoring = {CensoringKind::Administrative, 2.0, 0.0};
  const double truth = true_cif(0.2, 0.1, 2.0) - true_cif(0.1, 0.1, 2.0);
  int covered = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    c.seed = 1000 + r;
    const auto data = apply_event_scheme(simulate_trial(c), 1, Scheme::AllEvents);
    const CountingProcessView a(data, Group::A), b(data, Group::B);
    auto qa = incidence_proportion(a, 2.0), qb = incidence_proportion(b, 2.0);
    const auto rd = risk_difference(qa, qb);
    if (rd.ci_low <= truth && truth <= rd.ci_high) ++covered;
  }
  const double rate = double(covered) / reps;
  CHECK(rate >= 0.92);
  CHECK(rate <= 0.98);
}
