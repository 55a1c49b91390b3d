#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "savvy/trial_data.hpp"

namespace savvy {

inline constexpr std::array<double, 3> kQuantileLevels{0.3, 0.6, 0.9};

// Largest observed time in a group, whatever the event type.
// Throws std::invalid_argument("no observations") on an empty group.
double max_followup_time(std::span<const double> times);

// inf{t : F(t) >= p} for the empirical distribution of all observed times.
// Accepts p in (0, 1]; p = 1 gives the maximum.
double quantile_followup_time(std::span<const double> times, double p);

// Evaluation time per group for one of the five follow-up rules.
struct EvaluationRule {
  std::string label;
  double tau_A = 0.0;
  double tau_B = 0.0;

  double tau(Group group) const { return group == Group::A ? tau_A : tau_B; }
};

struct QuantileTau {
  double p = 0.0;
  double tau_A = 0.0;
  double tau_B = 0.0;
  double tau = 0.0;  // min(tau_A, tau_B)
};

struct FollowUpGrid {
  double tau_A = 0.0;
  double tau_B = 0.0;
  double tau_min = 0.0;
  std::array<QuantileTau, kQuantileLevels.size()> quantiles{};
  // own_max, tau, tau_p30, tau_p60, tau_p90 in that order.
  std::vector<EvaluationRule> rules;

  const EvaluationRule& rule(std::string_view label) const;
};

inline constexpr std::array<std::string_view, 5> kRuleLabels{"own_max", "tau", "tau_p30",
                                                             "tau_p60", "tau_p90"};

FollowUpGrid evaluation_times(std::span<const double> times_A, std::span<const double> times_B);
FollowUpGrid evaluation_times(const AnalysisDataset& dataset);

}  // namespace savvy
