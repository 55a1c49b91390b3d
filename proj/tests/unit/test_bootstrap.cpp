#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "savvy/bootstrap.hpp"
#include "savvy/errors.hpp"
#include "support/fixtures.hpp"

using namespace savvy;
using doctest::Approx;

namespace {

// Written from the published SplitMix64 reference, independent of rng.hpp.
struct ReferenceSplitMix {
  std::uint64_t x;
  std::uint64_t operator()() {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

std::uint64_t reference_mix(std::uint64_t v) { return ReferenceSplitMix{v}(); }

std::vector<std::size_t> reference_draws(std::uint64_t seed, std::uint64_t counter,
                                         std::uint64_t lane, std::size_t n) {
  ReferenceSplitMix g{reference_mix(reference_mix(reference_mix(seed) ^ counter) ^ lane)};
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned __int128 wide = static_cast<unsigned __int128>(g()) * n;
    out.push_back(static_cast<std::size_t>(wide >> 64));
  }
  return out;
}

AnalysisDataset dataset_of(std::vector<AnalysisRecord> recs) {
  return AnalysisDataset("T", 1, Scheme::AllEvents, std::move(recs));
}

std::vector<AnalysisRecord> scaled_f4(int copies) {
  std::vector<AnalysisRecord> recs;
  for (Group g : {Group::A, Group::B}) {
    for (int c = 0; c < copies; ++c) {
      for (const auto& r : testing::f4_records(g)) recs.push_back(r);
    }
  }
  return recs;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("counter stream matches the reference SplitMix64") {
  std::uint64_t s = 0;
  CHECK(splitmix64(s) == 0xe220a8397b1dcdafull);
  for (std::uint64_t seed : {0ull, 1ull, 42ull, 0xdeadbeefull}) {
    for (std::uint64_t r : {0ull, 1ull, 999ull}) {
      CounterStream stream(seed, r, kLaneGroupB);
      ReferenceSplitMix g{reference_mix(reference_mix(reference_mix(seed) ^ r) ^ kLaneGroupB)};
      for (int i = 0; i < 5; ++i) CHECK(stream.next() == g());
    }
  }
  CounterStream u(9, 9, 9);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform01();
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("n = 4 resample reproduced by an independent implementation") {
  const std::vector<AnalysisRecord> recs = testing::f4_records();
  BootstrapSpec spec;
  spec.master_seed = 20240501;
  for (std::size_t r = 0; r < 20; ++r) {
    const auto drawn = resample_replicate(std::span<const AnalysisRecord>(recs), spec, r);
    const auto idx = reference_draws(spec.master_seed, r, kLaneGroupA, recs.size());
    REQUIRE(drawn.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(drawn[i].time == recs[idx[i]].time);
  }
}

TEST_CASE("resampling basics") {
  const std::vector<AnalysisRecord> one{{Group::A, 3, Status::Event}};
  BootstrapSpec spec;
  for (std::size_t r = 0; r < 10; ++r) {
    const auto d = resample_replicate(std::span<const AnalysisRecord>(one), spec, r);
    REQUIRE(d.size() == 1);
    CHECK(d[0].time == 3);
  }
  const auto recs = scaled_f4(3);
  const auto x = resample_replicate(std::span<const AnalysisRecord>(recs), spec, 7);
  const auto y = resample_replicate(std::span<const AnalysisRecord>(recs), spec, 7);
  const auto z = resample_replicate(std::span<const AnalysisRecord>(recs), spec, 8);
  bool identical = true, differs = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    identical = identical && x[i].time == y[i].time && x[i].group == y[i].group;
    differs = differs || x[i].time != z[i].time;
  }
  CHECK(identical);
  CHECK(differs);
  CHECK(std::count_if(x.begin(), x.end(), [](auto& r) { return r.group == Group::A; }) == 12);

  spec.stratified = false;
  const auto pooled = resample_replicate(std::span<const AnalysisRecord>(recs), spec, 7);
  CHECK(pooled.size() == recs.size());
}

TEST_CASE("identity pair and constant data have zero variance") {
  BootstrapSpec spec;
  spec.replicates = 200;
  Statistic same{Statistic::Kind::LogRatio, Method::AalenJohansen, Method::AalenJohansen};
  const auto r = bootstrap_variance(dataset_of(scaled_f4(10)), spec, same, "tau");
  CHECK(r.variance == 0.0);

  std::vector<AnalysisRecord> constant;
  for (Group g : {Group::A, Group::B}) {
    for (int i = 0; i < 8; ++i) constant.push_back({g, 5, Status::Event});
  }
  for (Method m : {Method::IP, Method::AalenJohansen, Method::ID_prob_CR}) {
    Statistic s{Statistic::Kind::Value, m};
    CHECK(bootstrap_variance(dataset_of(constant), spec, s, "tau").variance == 0.0);
  }
}

TEST_CASE("bootstrap variance of a proportion approaches p(1-p)/n") {
  std::vector<AnalysisRecord> recs;
  for (int i = 0; i < 100; ++i) {
    recs.push_back({Group::A, i < 40 ? 1.0 : 2.0, i < 40 ? Status::Event : Status::Censored});
    recs.push_back({Group::B, 2.0, i < 10 ? Status::Event : Status::Censored});
  }
  BootstrapSpec spec;
  spec.replicates = 10000;
  spec.master_seed = 3;
  const auto r = bootstrap_variance(dataset_of(recs), spec, {Statistic::Kind::Value, Method::IP},
                                    "own_max");
  CHECK(r.n_valid == 10000);
  CHECK(std::abs(r.variance / (0.4 * 0.6 / 100) - 1.0) < 0.05);
}

TEST_CASE("results do not depend on the worker count") {
  const auto ds = dataset_of(scaled_f4(5));
  BootstrapSpec spec;
  spec.replicates = 300;
  spec.master_seed = 11;
  const Statistic s{Statistic::Kind::LogRatio, Method::IP, Method::AalenJohansen};
  spec.threads = 1;
  const auto serial = bootstrap_variance(ds, spec, s, "tau_p90", Execution::Serial);
  for (int threads : {1, 4, 8}) {
    spec.threads = threads;
    const auto par = bootstrap_variance(ds, spec, s, "tau_p90", Execution::Parallel);
    CHECK(same_bits(par.variance, serial.variance));
    CHECK(par.n_valid == serial.n_valid);
  }
}

TEST_CASE("different seeds agree on the variance at B = 5000") {
  const auto ds = dataset_of(scaled_f4(50));
  BootstrapSpec spec;
  spec.replicates = 5000;
  const Statistic s{Statistic::Kind::Value, Method::AalenJohansen};
  spec.master_seed = 1;
  const double v1 = bootstrap_variance(ds, spec, s, "tau").variance;
  spec.master_seed = 987654321;
  const double v2 = bootstrap_variance(ds, spec, s, "tau").variance;
  CHECK(std::abs(v1 - v2) / v1 < 0.10);
}

TEST_CASE("retaining replicate values leaves the variance unchanged") {
  const auto ds = dataset_of(scaled_f4(4));
  BootstrapSpec spec;
  spec.replicates = 100;
  const Statistic s{Statistic::Kind::RiskDifference, Method::OneMinusKM};
  const auto a = bootstrap_variance(ds, spec, s, "tau");
  spec.keep_replicates = true;
  const auto b = bootstrap_variance(ds, spec, s, "tau");
  CHECK(same_bits(a.variance, b.variance));
  CHECK(b.replicate_values.size() == 100);
  CHECK(a.replicate_values.empty());
  CHECK(a.variance >= 0.0);
}

TEST_CASE("frozen grid") {
  const auto ds = dataset_of(scaled_f4(4));
  BootstrapSpec spec;
  spec.replicates = 100;
  spec.frozen_tau = true;
  const auto r = bootstrap_variance(ds, spec, {Statistic::Kind::Value, Method::IP}, "tau_p30");
  CHECK(r.n_valid + r.n_degenerate == 100);
}

TEST_CASE("degenerate replicates are dropped and counted") {
  BootstrapSpec spec;
  spec.replicates = 10;
  const std::vector<AnalysisRecord> recs = testing::f4_records();
  const auto m = run_replicates(std::span<const AnalysisRecord>(recs), spec, 2,
                                [](std::span<const AnalysisRecord>, std::span<double> out) {
                                  out[0] = 1.0;
                                  out[1] = 2.0;
                                });
  ReplicateMatrix odd = m;
  for (std::size_t r = 0; r < 10; ++r) odd.values[r * 2] = r < 6 ? NAN : double(r);
  const auto res = summarize_column(odd, 0, spec, "x");
  CHECK(res.n_valid == 4);
  CHECK(res.n_degenerate == 6);
  CHECK(res.unstable());
  CHECK(res.variance == Approx(5.0 / 3.0));

  const auto thrown = run_replicates(std::span<const AnalysisRecord>(recs), spec, 1,
                                     [](std::span<const AnalysisRecord>, std::span<double>) {
                                       throw std::runtime_error("boom");
                                     });
  CHECK(summarize_column(thrown, 0, spec, "y").n_valid == 0);
}

TEST_CASE("errors") {
  BootstrapSpec spec;
  spec.replicates = 1;
  const auto ds = dataset_of(scaled_f4(2));
  CHECK_THROWS_AS(bootstrap_variance(ds, spec, {}, "tau"), std::invalid_argument);
  spec.replicates = 50;
  std::vector<AnalysisRecord> no_b_events = testing::f4_records(Group::A);
  no_b_events.push_back({Group::B, 4, Status::Censored});
  const Statistic rr{Statistic::Kind::LogRelativeRisk, Method::IP};
  CHECK_THROWS_AS(bootstrap_variance(dataset_of(no_b_events), spec, rr, "tau"), NumericError);
}

TEST_CASE("statistic identifiers") {
  CHECK(statistic_id({Statistic::Kind::LogRatio, Method::IP, Method::AalenJohansen}, Scheme::DeathOnly,
                     "tau") == "logratio:IP/AalenJohansen:event:A:DeathOnly:tau");
  CHECK(statistic_id({Statistic::Kind::Value, Method::AalenJohansen, Method::AalenJohansen,
                      Target::Competing, Group::B},
                     Scheme::AllEvents, "tau_p30") == "value:AalenJohansen:competing:B:AllEvents:tau_p30");
}
