#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "savvy/estimators.hpp"
#include "savvy/followup.hpp"
#include "savvy/trial_data.hpp"

namespace savvy {

enum class HazardKind { Cox, IDRatio, NAARatio };

std::string_view to_string(HazardKind kind);
HazardKind parse_hazard_kind(std::string_view name);

struct HazardRatioResult {
  HazardKind kind = HazardKind::Cox;
  Target target = Target::Event;
  Scheme scheme = Scheme::AllEvents;
  std::string tau_label;       // empty for Cox
  std::optional<double> tau;   // Cox: the shared horizon the data were truncated at
  double log_hr = 0.0;
  double var_log_hr = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool converged = true;
  bool degenerate = false;
  std::string diagnostic;
};

struct HazardOptions {
  // Adds half an event to both groups when either has none (ID ratio only).
  bool continuity_correction = false;
};

// Newton iterate trace of the one-covariate Breslow partial likelihood.
struct CoxFit {
  double beta = 0.0;
  double variance = 0.0;  // inverse observed information at beta
  double score = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> score_trace;  // |score| after each iterate
  std::string diagnostic;
};

// Group indicator (A = 1) Cox model on events of the target type at times
// <= horizon; everything else is censored. Monotone likelihoods (estimate at
// +-infinity) return converged = false with a diagnostic and no Newton steps.
// Throws NumericError when there is no target event up to the horizon.
CoxFit fit_cox_two_sample(const CountingProcessView& a, const CountingProcessView& b,
                          Target target, double horizon);

HazardRatioResult cox_two_sample(const AnalysisDataset& dataset, Target target, double tau);
HazardRatioResult cox_two_sample(const CountingProcessView& a, const CountingProcessView& b,
                                 Target target, double tau);

// log(ID_A(tau_A) / ID_B(tau_B)), variance 1/N_A + 1/N_B.
HazardRatioResult incidence_density_ratio(const CountingProcessView& a,
                                          const CountingProcessView& b, Target target,
                                          const EvaluationRule& rule,
                                          const HazardOptions& options = {});
HazardRatioResult incidence_density_ratio(const AnalysisDataset& dataset, Target target,
                                          const EvaluationRule& rule,
                                          const HazardOptions& options = {});

// log(Lambda_A(tau_A) / Lambda_B(tau_B)), delta-method variance.
HazardRatioResult nelson_aalen_ratio(const CountingProcessView& a, const CountingProcessView& b,
                                     Target target, const EvaluationRule& rule);
HazardRatioResult nelson_aalen_ratio(const AnalysisDataset& dataset, Target target,
                                     const EvaluationRule& rule);

}  // namespace savvy
