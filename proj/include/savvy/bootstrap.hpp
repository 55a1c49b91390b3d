#pragma once

#include <omp.h>

#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "savvy/estimators.hpp"
#include "savvy/followup.hpp"
#include "savvy/rng.hpp"
#include "savvy/trial_data.hpp"

namespace savvy {

struct BootstrapSpec {
  std::size_t replicates = 1000;
  std::uint64_t master_seed = 1;
  bool stratified = true;       // resample within treatment group
  bool frozen_tau = false;      // evaluate every replicate on the original grid
  int threads = 0;              // 0: OpenMP default
  bool keep_replicates = false;
};

struct BootstrapResult {
  std::string statistic_id;
  double variance = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_valid = 0;
  std::size_t n_degenerate = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<double> replicate_values;  // only when spec.keep_replicates

  // Fewer than half of the replicates gave a defined statistic.
  bool unstable() const { return 2 * n_valid < replicates; }
};

enum class Execution { Serial, Parallel };

// Lanes of the counter stream used for the three resampling strata.
inline constexpr std::uint64_t kLaneGroupA = 0;
inline constexpr std::uint64_t kLaneGroupB = 1;
inline constexpr std::uint64_t kLanePooled = 2;

// n independent uniform draws with replacement from group.
template <class Record>
std::vector<Record> resample(std::span<const Record> group, CounterStream& stream) {
  std::vector<Record> out;
  out.reserve(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) {
    out.push_back(group[stream.uniform_index(group.size())]);
  }
  return out;
}

// Replicate r of a sample. Stratified: group A records (input order) are drawn
// from lane kLaneGroupA, then group B from kLaneGroupB, both with counter r.
// Pooled: all records drawn from kLanePooled.
template <class Record>
std::vector<Record> resample_replicate(std::span<const Record> sample, const BootstrapSpec& spec,
                                       std::size_t replicate) {
  if (!spec.stratified) {
    CounterStream stream(spec.master_seed, replicate, kLanePooled);
    return resample(sample, stream);
  }
  std::vector<Record> a, b;
  for (const auto& r : sample) (r.group == Group::A ? a : b).push_back(r);
  CounterStream stream_a(spec.master_seed, replicate, kLaneGroupA);
  CounterStream stream_b(spec.master_seed, replicate, kLaneGroupB);
  auto out = resample(std::span<const Record>(a), stream_a);
  auto drawn_b = resample(std::span<const Record>(b), stream_b);
  out.insert(out.end(), drawn_b.begin(), drawn_b.end());
  return out;
}

// Row-major replicates x width matrix of statistic values. Non-finite
// entries mark replicates where that statistic is undefined.
struct ReplicateMatrix {
  std::size_t replicates = 0;
  std::size_t width = 0;
  std::vector<double> values;

  std::span<double> row(std::size_t r) { return {values.data() + r * width, width}; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * width, width}; }
  double at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
};

namespace detail {

template <class Record, class Fn>
void run_one(std::span<const Record> sample, const BootstrapSpec& spec, std::size_t r, Fn& fn,
             ReplicateMatrix& m) {
  auto out = m.row(r);
  try {
    const auto drawn = resample_replicate(sample, spec, r);
    fn(std::span<const Record>(drawn), out);
  } catch (const std::exception&) {
    for (auto& v : out) v = std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace detail

// Evaluates fn(resampled records, output row) for every replicate.
// fn must be safe to call concurrently. Serial and Parallel produce
// bit-identical matrices for any thread count.
template <class Record, class Fn>
ReplicateMatrix run_replicates(std::span<const Record> sample, const BootstrapSpec& spec,
                               std::size_t width, Fn&& fn,
                               Execution execution = Execution::Parallel) {
  ReplicateMatrix m;
  m.replicates = spec.replicates;
  m.width = width;
  m.values.assign(spec.replicates * width, std::numeric_limits<double>::quiet_NaN());
  const auto count = static_cast<long long>(spec.replicates);
  if (execution == Execution::Serial) {
    for (long long r = 0; r < count; ++r) {
      detail::run_one(sample, spec, static_cast<std::size_t>(r), fn, m);
    }
  } else {
    const int threads = spec.threads > 0 ? spec.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
    for (long long r = 0; r < count; ++r) {
      detail::run_one(sample, spec, static_cast<std::size_t>(r), fn, m);
    }
  }
  return m;
}

// Sample variance (denominator n_valid - 1) of column c over finite entries,
// accumulated in replicate order.
BootstrapResult summarize_column(const ReplicateMatrix& m, std::size_t column,
                                 const BootstrapSpec& spec, std::string statistic_id);

// Functionals of a single AE that the engine knows how to evaluate.
struct Statistic {
  enum class Kind {
    Value,            // estimator value in one group
    LogRatio,         // log(method / benchmark) in one group
    LogRelativeRisk,  // log(q_A / q_B)
    RiskDifference,   // q_A - q_B
  };
  Kind kind = Kind::Value;
  Method method = Method::IP;
  Method benchmark = Method::AalenJohansen;
  Target target = Target::Event;
  Group group = Group::A;
};

std::string statistic_id(const Statistic& statistic, Scheme scheme, std::string_view rule_label);

// Value of the statistic on one dataset; NaN or +-inf when undefined.
double evaluate_statistic(const Statistic& statistic, const CountingProcessView& a,
                          const CountingProcessView& b, const EvaluationRule& rule);

// Bootstrap variance of a statistic evaluated at one follow-up rule. The rule
// is re-derived on each replicate unless spec.frozen_tau. Throws
// NumericError("bootstrap unstable ...") when fewer than half the replicates
// are valid.
BootstrapResult bootstrap_variance(const AnalysisDataset& dataset, const BootstrapSpec& spec,
                                   const Statistic& statistic, std::string_view rule_label,
                                   Execution execution = Execution::Parallel);

}  // namespace savvy
