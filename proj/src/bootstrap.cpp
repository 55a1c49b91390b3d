#include "savvy/bootstrap.hpp"

#include <sstream>

#include "savvy/errors.hpp"

namespace savvy {

BootstrapResult summarize_column(const ReplicateMatrix& m, std::size_t column,
                                 const BootstrapSpec& spec, std::string statistic_id) {
  BootstrapResult result;
  result.statistic_id = std::move(statistic_id);
  result.replicates = m.replicates;
  result.seed = spec.master_seed;
  // Moments are accumulated around the first finite value.
  double shift = std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (std::size_t r = 0; r < m.replicates; ++r) {
    const double v = m.at(r, column);
    if (std::isfinite(v)) {
      if (std::isnan(shift)) shift = v;
      sum += v - shift;
      ++result.n_valid;
    }
    if (spec.keep_replicates) result.replicate_values.push_back(v);
  }
  result.n_degenerate = m.replicates - result.n_valid;
  if (result.n_valid < 2) return result;
  const double mean = sum / static_cast<double>(result.n_valid);
  double ss = 0.0;
  for (std::size_t r = 0; r < m.replicates; ++r) {
    const double v = m.at(r, column);
    if (std::isfinite(v)) ss += (v - shift - mean) * (v - shift - mean);
  }
  result.variance = ss / static_cast<double>(result.n_valid - 1);
  return result;
}

std::string statistic_id(const Statistic& s, Scheme scheme, std::string_view rule_label) {
  std::ostringstream id;
  switch (s.kind) {
    case Statistic::Kind::Value:
      id << "value:" << to_string(s.method) << ':' << to_string(s.target) << ':'
         << to_string(s.group);
      break;
    case Statistic::Kind::LogRatio:
      id << "logratio:" << to_string(s.method) << '/' << to_string(s.benchmark) << ':'
         << to_string(s.target) << ':' << to_string(s.group);
      break;
    case Statistic::Kind::LogRelativeRisk:
      id << "logrr:" << to_string(s.method) << ':' << to_string(s.target);
      break;
    case Statistic::Kind::RiskDifference:
      id << "rd:" << to_string(s.method) << ':' << to_string(s.target);
      break;
  }
  id << ':' << to_string(scheme) << ':' << rule_label;
  return id.str();
}

namespace {

double value_in(Method method, const CountingProcessView& view, double tau, Target target) {
  return estimate(method, view, tau, target).value;
}

}  // namespace

double evaluate_statistic(const Statistic& s, const CountingProcessView& a,
                          const CountingProcessView& b, const EvaluationRule& rule) {
  const auto& own = s.group == Group::A ? a : b;
  const double own_tau = rule.tau(s.group);
  switch (s.kind) {
    case Statistic::Kind::Value:
      return value_in(s.method, own, own_tau, s.target);
    case Statistic::Kind::LogRatio:
      return std::log(value_in(s.method, own, own_tau, s.target) /
                      value_in(s.benchmark, own, own_tau, s.target));
    case Statistic::Kind::LogRelativeRisk:
      return std::log(value_in(s.method, a, rule.tau_A, s.target) /
                      value_in(s.method, b, rule.tau_B, s.target));
    case Statistic::Kind::RiskDifference:
      return value_in(s.method, a, rule.tau_A, s.target) -
             value_in(s.method, b, rule.tau_B, s.target);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

BootstrapResult bootstrap_variance(const AnalysisDataset& dataset, const BootstrapSpec& spec,
                                   const Statistic& statistic, std::string_view rule_label,
                                   Execution execution) {
  if (spec.replicates < 2) throw std::invalid_argument("bootstrap needs at least 2 replicates");
  const auto original_grid = evaluation_times(dataset);
  const EvaluationRule frozen = original_grid.rule(rule_label);
  {
    const CountingProcessView a(dataset, Group::A);
    const CountingProcessView b(dataset, Group::B);
    if (!std::isfinite(evaluate_statistic(statistic, a, b, frozen))) {
      throw NumericError("statistic " + statistic_id(statistic, dataset.scheme(), rule_label) +
                         " is undefined on the original data");
    }
  }
  const Scheme scheme = dataset.scheme();
  const std::string label(rule_label);
  auto functional = [&](std::span<const AnalysisRecord> drawn, std::span<double> out) {
    const CountingProcessView a(drawn, Group::A, scheme);
    const CountingProcessView b(drawn, Group::B, scheme);
    if (spec.frozen_tau) {
      out[0] = evaluate_statistic(statistic, a, b, frozen);
    } else {
      std::vector<double> ta, tb;
      for (const auto& r : drawn) (r.group == Group::A ? ta : tb).push_back(r.time);
      const auto grid = evaluation_times(ta, tb);
      out[0] = evaluate_statistic(statistic, a, b, grid.rule(label));
    }
  };
  const auto matrix = run_replicates(dataset.records(), spec, 1, functional, execution);
  auto result = summarize_column(matrix, 0, spec, statistic_id(statistic, scheme, rule_label));
  if (result.unstable()) {
    throw NumericError("bootstrap unstable: " + std::to_string(result.n_valid) + " valid, " +
                       std::to_string(result.n_degenerate) + " degenerate of " +
                       std::to_string(result.replicates) + " replicates");
  }
  return result;
}

}  // namespace savvy
