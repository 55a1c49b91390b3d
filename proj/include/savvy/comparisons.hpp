#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "savvy/bootstrap.hpp"
#include "savvy/constants.hpp"
#include "savvy/estimators.hpp"
#include "savvy/followup.hpp"
#include "savvy/hazard.hpp"
#include "savvy/trial_data.hpp"

namespace savvy {

enum class Measure { RD, RR };
std::string_view to_string(Measure measure);

struct ComparisonResult {
  Method method = Method::IP;
  Target target = Target::Event;
  Measure measure = Measure::RD;
  Scheme scheme = Scheme::AllEvents;
  std::string tau_label;
  double estimate = 0.0;
  double variance = 0.0;  // RD scale for RD, log scale for RR
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool degenerate = false;
};

// q_A - q_B with variance s_A^2 + s_B^2 and a Wald interval.
// Throws std::invalid_argument when the two estimates do not describe the same
// method, target, scheme and follow-up rule, or are not probabilities.
ComparisonResult risk_difference(const Estimate& qa, const Estimate& qb);

// q_A / q_B; log-scale delta-method variance and back-transformed interval.
ComparisonResult relative_risk(const Estimate& qa, const Estimate& qb);

struct AnalysisOptions {
  BootstrapSpec bootstrap;
  HazardOptions hazard;
};

// A log-ratio of a comparator to its benchmark computed on the same data,
// with the bootstrap variance the meta-analysis needs.
struct LogRatioEntry {
  std::string pair;  // "<comparator>/<benchmark>"
  std::string statistic_id;
  Scheme scheme = Scheme::AllEvents;
  Target target = Target::Event;
  std::optional<Group> group;  // nullopt for hazard-ratio pairs
  std::string tau_label;
  double theta = 0.0;
  double comparator_value = 0.0;
  double benchmark_value = 0.0;
  double comparator_se = 0.0;
  double benchmark_se = 0.0;
  BootstrapResult bootstrap;
  std::map<std::string, double> moderators;
};

struct SchemeResult {
  Scheme scheme = Scheme::AllEvents;
  FollowUpGrid followup;
  DescriptiveSummary descriptives;
  std::vector<Estimate> estimates;
  std::vector<ComparisonResult> comparisons;
  std::vector<HazardRatioResult> hazard_ratios;
};

struct AeResult {
  int ae_id = 0;
  std::size_t n_A = 0;
  std::size_t n_B = 0;
  std::vector<SchemeResult> schemes;
  std::vector<LogRatioEntry> log_ratios;
  std::vector<BootstrapResult> bootstrap;  // every bootstrapped statistic
};

struct TrialResultTable {
  std::string savvy_id;
  AnalysisOptions options;
  std::size_t input_rows = 0;
  std::map<std::string, std::size_t> exclusions_by_reason;
  std::vector<AeResult> aes;
};

// Full per-trial grid: four schemes x five follow-up rules x all estimators,
// group comparisons, hazard comparisons and bootstrap variances. Degenerate
// cells are flagged, never fatal. Throws ValidationError when an AE has an
// empty treatment group.
TrialResultTable compare_all(const TrialDataset& dataset, const AnalysisOptions& options = {});

// Comparator/benchmark pairs on the probability scale.
struct ProbabilityPair {
  Method comparator;
  Method benchmark;
};
inline constexpr ProbabilityPair kProbabilityPairs[] = {
    {Method::IP, Method::AalenJohansen},
    {Method::ID_prob, Method::AalenJohansen},
    {Method::OneMinusKM, Method::AalenJohansen},
    {Method::ID_prob_CR, Method::AalenJohansen},
    {Method::IP, Method::OneMinusKM},  // composite endpoint comparison
};

}  // namespace savvy
