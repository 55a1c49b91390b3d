#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "savvy/trial_data.hpp"

namespace savvy {

enum class Method { IP, ID_raw, ID_prob, OneMinusKM, NelsonAalen, ID_prob_CR, AalenJohansen };
enum class Target { Event, Competing };
enum class VarianceSource { ClosedForm, Bootstrap, None };

inline constexpr Method kAllMethods[] = {Method::IP,          Method::ID_raw,
                                         Method::ID_prob,     Method::OneMinusKM,
                                         Method::NelsonAalen, Method::ID_prob_CR,
                                         Method::AalenJohansen};

std::string_view to_string(Method method);
std::string_view to_string(Target target);
std::string_view to_string(VarianceSource source);
Method parse_method(std::string_view name);
Target parse_target(std::string_view name);

// ID_raw and NelsonAalen live on the hazard scale, the rest are probabilities.
constexpr bool is_probability_scale(Method m) {
  return m != Method::ID_raw && m != Method::NelsonAalen;
}

// Aggregated counting processes of one treatment group.
class CountingProcessView {
 public:
  // One entry per distinct observed time.
  struct Step {
    double time = 0.0;
    int events = 0;     // dN(u)
    int competing = 0;  // dN-bar(u)
    int censored = 0;
    int at_risk = 0;    // Y(u), left-continuous: observed time >= u
  };

  CountingProcessView(std::span<const AnalysisRecord> records, Group group, Scheme scheme);
  CountingProcessView(const AnalysisDataset& dataset, Group group);

  Group group() const { return group_; }
  Scheme scheme() const { return scheme_; }
  std::size_t n() const { return times_.size(); }
  std::span<const Step> steps() const { return steps_; }

  // Integral of the risk-set size over (0, tau], in patient-days.
  double person_time(double tau) const;
  // N(tau) or N-bar(tau): observed events of the target type at times <= tau.
  int count(Target target, double tau) const;
  // Y(t) = number with observed time >= t.
  int at_risk(double t) const;

 private:
  Group group_;
  Scheme scheme_;
  std::vector<double> times_;        // sorted observed times
  std::vector<double> prefix_sums_;  // prefix_sums_[k] = sum of the first k sorted times
  std::vector<Step> steps_;
};

struct Estimate {
  Method method = Method::IP;
  Target target = Target::Event;
  Group group = Group::A;
  Scheme scheme = Scheme::AllEvents;
  std::string tau_label;
  double tau = 0.0;
  double value = 0.0;
  double variance = 0.0;  // on the scale of value
  VarianceSource variance_source = VarianceSource::ClosedForm;
  bool degenerate = false;
};

// N(tau)/n with binomial variance.
Estimate incidence_proportion(const CountingProcessView& view, double tau,
                              Target target = Target::Event);

// Events per patient-day at risk; Poisson variance N/PT^2 (1/N on the log scale).
// Zero events give value 0 flagged degenerate. Throws NumericError on zero person-time.
Estimate incidence_density(const CountingProcessView& view, double tau,
                           Target target = Target::Event);

// 1 - exp(-ID * tau), delta-method variance from the incidence density.
Estimate prob_transform_incidence_density(const CountingProcessView& view, double tau);

// One minus the product-limit estimator that censors everything except the
// target event. Greenwood variance.
Estimate one_minus_kaplan_meier(const CountingProcessView& view, double tau,
                                Target target = Target::Event);

// Cumulative hazard sum dN/Y with variance sum dN/Y^2.
Estimate nelson_aalen(const CountingProcessView& view, double tau, Target target = Target::Event);

// ID/(ID + ID-bar) * (1 - exp(-tau (ID + ID-bar))), delta method over both
// Poisson counts. Value 0 and degenerate when no events of either kind.
Estimate prob_incidence_density_competing(const CountingProcessView& view, double tau);

// Cumulative incidence of the target event with all other event types as
// competing. The variance is not computed here (VarianceSource::None); the
// analysis pipeline attaches a bootstrap variance.
Estimate aalen_johansen(const CountingProcessView& view, double tau,
                        Target target = Target::Event);

// Dispatch by method. Hazard-scale methods and AJ accept both targets.
Estimate estimate(Method method, const CountingProcessView& view, double tau,
                  Target target = Target::Event);

// All-cause product-limit survivor S(tau).
double product_limit_survivor(const CountingProcessView& view, double tau);

// Kaplan-Meier of the censoring distribution just before t, events leaving the
// risk set before censorings at tied times.
double censoring_survivor_before(const CountingProcessView& view, double t);

}  // namespace savvy
