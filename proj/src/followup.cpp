#include "savvy/followup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace savvy {

double max_followup_time(std::span<const double> times) {
  if (times.empty()) throw std::invalid_argument("no observations");
  return *std::max_element(times.begin(), times.end());
}

double quantile_followup_time(std::span<const double> times, double p) {
  if (times.empty()) throw std::invalid_argument("no observations");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1]");
  std::vector<double> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  // Smallest k with k/n >= p; the k-th order statistic is the infimum because
  // F jumps to at least k/n there, ties included.
  std::size_t k = static_cast<std::size_t>(std::ceil(p * n));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  while (k > 1 && static_cast<double>(k - 1) / n >= p) --k;
  while (k < sorted.size() && static_cast<double>(k) / n < p) ++k;
  return sorted[k - 1];
}

const EvaluationRule& FollowUpGrid::rule(std::string_view label) const {
  for (const auto& r : rules) {
    if (r.label == label) return r;
  }
  throw std::out_of_range("unknown follow-up rule: " + std::string(label));
}

FollowUpGrid evaluation_times(std::span<const double> times_A, std::span<const double> times_B) {
  FollowUpGrid grid;
  grid.tau_A = max_followup_time(times_A);
  grid.tau_B = max_followup_time(times_B);
  grid.tau_min = std::min(grid.tau_A, grid.tau_B);
  grid.rules.push_back({std::string(kRuleLabels[0]), grid.tau_A, grid.tau_B});
  grid.rules.push_back({std::string(kRuleLabels[1]), grid.tau_min, grid.tau_min});
  for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
    auto& q = grid.quantiles[i];
    q.p = kQuantileLevels[i];
    q.tau_A = quantile_followup_time(times_A, q.p);
    q.tau_B = quantile_followup_time(times_B, q.p);
    q.tau = std::min(q.tau_A, q.tau_B);
    grid.rules.push_back({std::string(kRuleLabels[2 + i]), q.tau, q.tau});
  }
  return grid;
}

FollowUpGrid evaluation_times(const AnalysisDataset& dataset) {
  const auto a = dataset.times(Group::A);
  const auto b = dataset.times(Group::B);
  return evaluation_times(a, b);
}

}  // namespace savvy
