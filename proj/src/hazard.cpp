#include "savvy/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "savvy/constants.hpp"
#include "savvy/errors.hpp"

namespace savvy {

std::string_view to_string(HazardKind kind) {
  switch (kind) {
    case HazardKind::Cox:
      return "Cox";
    case HazardKind::IDRatio:
      return "IDRatio";
    case HazardKind::NAARatio:
      return "NAARatio";
  }
  return "?";
}

HazardKind parse_hazard_kind(std::string_view name) {
  for (HazardKind k : {HazardKind::Cox, HazardKind::IDRatio, HazardKind::NAARatio}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown hazard kind: " + std::string(name));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxNewtonIterations = 50;
constexpr double kScoreTolerance = 1e-10;

struct RiskPoint {
  double at_risk_a;
  double at_risk_b;
  double events_a;
  double events;
};

std::vector<RiskPoint> risk_points(const CountingProcessView& a, const CountingProcessView& b,
                                   Target target, double horizon) {
  std::vector<double> times;
  for (const auto* view : {&a, &b}) {
    for (const auto& s : view->steps()) {
      if (s.time > horizon) break;
      if ((target == Target::Event ? s.events : s.competing) > 0) times.push_back(s.time);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  auto events_at = [target](const CountingProcessView& v, double t) {
    const auto steps = v.steps();
    const auto it = std::lower_bound(steps.begin(), steps.end(), t,
                                     [](const auto& s, double x) { return s.time < x; });
    if (it == steps.end() || it->time != t) return 0;
    return target == Target::Event ? it->events : it->competing;
  };

  std::vector<RiskPoint> points;
  points.reserve(times.size());
  for (double t : times) {
    const double da = events_at(a, t);
    const double db = events_at(b, t);
    points.push_back({static_cast<double>(a.at_risk(t)), static_cast<double>(b.at_risk(t)), da,
                      da + db});
  }
  return points;
}

// log(y_b + y_a e^beta), stable for large |beta|.
double log_denominator(const RiskPoint& p, double beta) {
  if (p.at_risk_a == 0.0) return std::log(p.at_risk_b);
  if (p.at_risk_b == 0.0) return std::log(p.at_risk_a) + beta;
  if (beta > 0.0) return beta + std::log(p.at_risk_a + p.at_risk_b * std::exp(-beta));
  return std::log(p.at_risk_b + p.at_risk_a * std::exp(beta));
}

double share_a(const RiskPoint& p, double beta) {
  if (p.at_risk_a == 0.0) return 0.0;
  if (p.at_risk_b == 0.0) return 1.0;
  return 1.0 / (1.0 + p.at_risk_b / p.at_risk_a * std::exp(-beta));
}

double log_likelihood(const std::vector<RiskPoint>& points, double beta) {
  double ll = 0.0;
  for (const auto& p : points) ll += p.events_a * beta - p.events * log_denominator(p, beta);
  return ll;
}

void score_and_information(const std::vector<RiskPoint>& points, double beta, double& score,
                           double& information) {
  score = 0.0;
  information = 0.0;
  for (const auto& p : points) {
    const double s = share_a(p, beta);
    score += p.events_a - p.events * s;
    information += p.events * s * (1.0 - s);
  }
}

void fill_interval(HazardRatioResult& r) {
  if (std::isfinite(r.log_hr) && std::isfinite(r.var_log_hr)) {
    const double half = kZ975 * std::sqrt(r.var_log_hr);
    r.ci_low = std::exp(r.log_hr - half);
    r.ci_high = std::exp(r.log_hr + half);
  } else {
    r.ci_low = kNaN;
    r.ci_high = kNaN;
  }
}

HazardRatioResult degenerate_result(HazardKind kind, Target target, Scheme scheme,
                                    std::string diagnostic) {
  HazardRatioResult r;
  r.kind = kind;
  r.target = target;
  r.scheme = scheme;
  r.log_hr = kNaN;
  r.var_log_hr = kNaN;
  r.degenerate = true;
  r.diagnostic = std::move(diagnostic);
  fill_interval(r);
  return r;
}

}  // namespace

CoxFit fit_cox_two_sample(const CountingProcessView& a, const CountingProcessView& b,
                          Target target, double horizon) {
  const auto points = risk_points(a, b, target, horizon);
  if (points.empty()) throw NumericError("no events for Cox");

  CoxFit fit;
  // Limits of the expected group-A event count as beta runs to -inf / +inf.
  double observed = 0.0, lower = 0.0, upper = 0.0;
  for (const auto& p : points) {
    observed += p.events_a;
    if (p.at_risk_b == 0.0) lower += p.events;
    if (p.at_risk_a > 0.0) upper += p.events;
  }
  if (!(observed > lower && observed < upper)) {
    fit.beta = observed <= lower ? -std::numeric_limits<double>::infinity()
                                 : std::numeric_limits<double>::infinity();
    fit.variance = kNaN;
    fit.diagnostic = observed <= lower ? "monotone likelihood: estimate diverges to -infinity"
                                       : "monotone likelihood: estimate diverges to +infinity";
    return fit;
  }

  double beta = 0.0;
  double ll = log_likelihood(points, beta);
  double score = 0.0, information = 0.0;
  score_and_information(points, beta, score, information);
  fit.score_trace.push_back(std::abs(score));
  while (std::abs(score) >= kScoreTolerance && fit.iterations < kMaxNewtonIterations) {
    double step = score / information;
    double candidate = beta + step;
    double ll_candidate = log_likelihood(points, candidate);
    for (int halvings = 0; ll_candidate < ll && halvings < 60; ++halvings) {
      step *= 0.5;
      candidate = beta + step;
      ll_candidate = log_likelihood(points, candidate);
    }
    if (candidate == beta) break;
    beta = candidate;
    ll = ll_candidate;
    score_and_information(points, beta, score, information);
    ++fit.iterations;
    fit.score_trace.push_back(std::abs(score));
  }
  fit.beta = beta;
  fit.score = score;
  fit.variance = 1.0 / information;
  fit.converged = std::abs(score) < kScoreTolerance;
  if (!fit.converged) fit.diagnostic = "Newton iteration stopped before |score| < 1e-10";
  return fit;
}

HazardRatioResult cox_two_sample(const CountingProcessView& a, const CountingProcessView& b,
                                 Target target, double tau) {
  HazardRatioResult r;
  r.kind = HazardKind::Cox;
  r.target = target;
  r.scheme = a.scheme();
  r.tau = tau;
  CoxFit fit;
  try {
    fit = fit_cox_two_sample(a, b, target, tau);
  } catch (const NumericError& e) {
    auto d = degenerate_result(HazardKind::Cox, target, a.scheme(), e.what());
    d.tau = tau;
    d.converged = false;
    return d;
  }
  r.log_hr = std::isfinite(fit.beta) ? fit.beta : kNaN;
  r.var_log_hr = fit.variance;
  r.converged = fit.converged;
  r.degenerate = !std::isfinite(fit.beta);
  r.diagnostic = fit.diagnostic;
  fill_interval(r);
  return r;
}

HazardRatioResult cox_two_sample(const AnalysisDataset& dataset, Target target, double tau) {
  const CountingProcessView a(dataset, Group::A);
  const CountingProcessView b(dataset, Group::B);
  return cox_two_sample(a, b, target, tau);
}

HazardRatioResult incidence_density_ratio(const CountingProcessView& a,
                                          const CountingProcessView& b, Target target,
                                          const EvaluationRule& rule,
                                          const HazardOptions& options) {
  double events_a = a.count(target, rule.tau_A);
  double events_b = b.count(target, rule.tau_B);
  const double pt_a = a.person_time(rule.tau_A);
  const double pt_b = b.person_time(rule.tau_B);
  HazardRatioResult r;
  if (events_a == 0.0 || events_b == 0.0) {
    if (!options.continuity_correction) {
      r = degenerate_result(HazardKind::IDRatio, target, a.scheme(), "zero events in a group");
      r.tau_label = rule.label;
      return r;
    }
    events_a += 0.5;
    events_b += 0.5;
    r.diagnostic = "0.5 continuity correction applied";
  }
  r.kind = HazardKind::IDRatio;
  r.target = target;
  r.scheme = a.scheme();
  r.tau_label = rule.label;
  r.tau = rule.tau_A == rule.tau_B ? std::optional<double>(rule.tau_A) : std::nullopt;
  r.log_hr = std::log((events_a / pt_a) / (events_b / pt_b));
  r.var_log_hr = 1.0 / events_a + 1.0 / events_b;
  fill_interval(r);
  return r;
}

HazardRatioResult incidence_density_ratio(const AnalysisDataset& dataset, Target target,
                                          const EvaluationRule& rule,
                                          const HazardOptions& options) {
  const CountingProcessView a(dataset, Group::A);
  const CountingProcessView b(dataset, Group::B);
  return incidence_density_ratio(a, b, target, rule, options);
}

HazardRatioResult nelson_aalen_ratio(const CountingProcessView& a, const CountingProcessView& b,
                                     Target target, const EvaluationRule& rule) {
  const auto na_a = nelson_aalen(a, rule.tau_A, target);
  const auto na_b = nelson_aalen(b, rule.tau_B, target);
  if (!(na_a.value > 0.0) || !(na_b.value > 0.0)) {
    auto r = degenerate_result(HazardKind::NAARatio, target, a.scheme(), "zero events in a group");
    r.tau_label = rule.label;
    return r;
  }
  HazardRatioResult r;
  r.kind = HazardKind::NAARatio;
  r.target = target;
  r.scheme = a.scheme();
  r.tau_label = rule.label;
  r.tau = rule.tau_A == rule.tau_B ? std::optional<double>(rule.tau_A) : std::nullopt;
  r.log_hr = std::log(na_a.value / na_b.value);
  r.var_log_hr =
      na_a.variance / (na_a.value * na_a.value) + na_b.variance / (na_b.value * na_b.value);
  fill_interval(r);
  return r;
}

HazardRatioResult nelson_aalen_ratio(const AnalysisDataset& dataset, Target target,
                                     const EvaluationRule& rule) {
  const CountingProcessView a(dataset, Group::A);
  const CountingProcessView b(dataset, Group::B);
  return nelson_aalen_ratio(a, b, target, rule);
}

}  // namespace savvy
