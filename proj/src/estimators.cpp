#include "savvy/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "savvy/errors.hpp"

namespace savvy {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::IP:
      return "IP";
    case Method::ID_raw:
      return "ID_raw";
    case Method::ID_prob:
      return "ID_prob";
    case Method::OneMinusKM:
      return "OneMinusKM";
    case Method::NelsonAalen:
      return "NelsonAalen";
    case Method::ID_prob_CR:
      return "ID_prob_CR";
    case Method::AalenJohansen:
      return "AalenJohansen";
  }
  return "?";
}

std::string_view to_string(Target target) {
  return target == Target::Event ? "event" : "competing";
}

std::string_view to_string(VarianceSource source) {
  switch (source) {
    case VarianceSource::ClosedForm:
      return "closed_form";
    case VarianceSource::Bootstrap:
      return "bootstrap";
    case VarianceSource::None:
      return "none";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown method: " + std::string(name));
}

Target parse_target(std::string_view name) {
  if (name == "event") return Target::Event;
  if (name == "competing") return Target::Competing;
  throw std::invalid_argument("unknown target: " + std::string(name));
}

CountingProcessView::CountingProcessView(std::span<const AnalysisRecord> records, Group group,
                                         Scheme scheme)
    : group_(group), scheme_(scheme) {
  std::vector<const AnalysisRecord*> own;
  for (const auto& r : records) {
    if (r.group == group) own.push_back(&r);
  }
  std::sort(own.begin(), own.end(),
            [](const AnalysisRecord* a, const AnalysisRecord* b) { return a->time < b->time; });

  times_.reserve(own.size());
  prefix_sums_.reserve(own.size() + 1);
  prefix_sums_.push_back(0.0);
  int remaining = static_cast<int>(own.size());
  for (std::size_t i = 0; i < own.size();) {
    Step step;
    step.time = own[i]->time;
    step.at_risk = remaining;
    for (; i < own.size() && own[i]->time == step.time; ++i) {
      switch (own[i]->status) {
        case Status::Event:
          ++step.events;
          break;
        case Status::Competing:
          ++step.competing;
          break;
        case Status::Censored:
          ++step.censored;
          break;
      }
      times_.push_back(own[i]->time);
      prefix_sums_.push_back(prefix_sums_.back() + own[i]->time);
    }
    remaining -= step.events + step.competing + step.censored;
    steps_.push_back(step);
  }
}

CountingProcessView::CountingProcessView(const AnalysisDataset& dataset, Group group)
    : CountingProcessView(dataset.records(), group, dataset.scheme()) {}

double CountingProcessView::person_time(double tau) const {
  const auto k = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), tau) -
                                          times_.begin());
  return prefix_sums_[k] + tau * static_cast<double>(times_.size() - k);
}

int CountingProcessView::count(Target target, double tau) const {
  int total = 0;
  for (const auto& s : steps_) {
    if (s.time > tau) break;
    total += target == Target::Event ? s.events : s.competing;
  }
  return total;
}

int CountingProcessView::at_risk(double t) const {
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  return static_cast<int>(times_.end() - it);
}

namespace {

Estimate make(Method method, Target target, const CountingProcessView& view, double tau) {
  Estimate e;
  e.method = method;
  e.target = target;
  e.group = view.group();
  e.scheme = view.scheme();
  e.tau = tau;
  return e;
}

void check_tau(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("evaluation time must be positive");
}

int target_events(const CountingProcessView::Step& s, Target target) {
  return target == Target::Event ? s.events : s.competing;
}

int other_events(const CountingProcessView::Step& s, Target target) {
  return target == Target::Event ? s.competing : s.events;
}

struct ProductLimit {
  double incidence = 0.0;  // sum of S(u-) dN(u)/Y(u)
  double survivor = 1.0;
  double greenwood = 0.0;  // sum dN/(Y(Y-dN)) over factors with Y > dN
};

// Shared recursion for 1-KM and AJ. With competing_as_censoring the other event
// type never leaves the survivor product, which turns AJ into 1-KM; with no
// competing events both paths perform identical floating-point operations.
ProductLimit product_limit(const CountingProcessView& view, double tau, Target target,
                           bool competing_as_censoring) {
  ProductLimit pl;
  for (const auto& s : view.steps()) {
    if (s.time > tau) break;
    const int d = target_events(s, target);
    const int other = competing_as_censoring ? 0 : other_events(s, target);
    const double y = static_cast<double>(s.at_risk);
    pl.incidence += pl.survivor * static_cast<double>(d) / y;
    pl.survivor *= 1.0 - static_cast<double>(d + other) / y;
    if (s.at_risk > d && d > 0) {
      pl.greenwood += static_cast<double>(d) / (y * (y - static_cast<double>(d)));
    }
  }
  return pl;
}

}  // namespace

Estimate incidence_proportion(const CountingProcessView& view, double tau, Target target) {
  check_tau(tau);
  auto e = make(Method::IP, target, view, tau);
  const int events = view.count(target, tau);
  const auto n = static_cast<double>(view.n());
  e.value = static_cast<double>(events) / n;
  e.variance = e.value * (1.0 - e.value) / n;
  e.degenerate = events == 0;
  return e;
}

Estimate incidence_density(const CountingProcessView& view, double tau, Target target) {
  check_tau(tau);
  auto e = make(Method::ID_raw, target, view, tau);
  const double pt = view.person_time(tau);
  if (!(pt > 0.0)) throw NumericError("zero person-time at risk");
  const int events = view.count(target, tau);
  e.value = static_cast<double>(events) / pt;
  e.variance = static_cast<double>(events) / (pt * pt);
  e.degenerate = events == 0;
  return e;
}

Estimate prob_transform_incidence_density(const CountingProcessView& view, double tau) {
  const auto id = incidence_density(view, tau, Target::Event);
  auto e = make(Method::ID_prob, Target::Event, view, tau);
  const double survival = std::exp(-id.value * tau);
  e.value = 1.0 - survival;
  const double slope = tau * survival;
  e.variance = slope * slope * id.variance;
  e.degenerate = id.degenerate;
  return e;
}

Estimate one_minus_kaplan_meier(const CountingProcessView& view, double tau, Target target) {
  check_tau(tau);
  auto e = make(Method::OneMinusKM, target, view, tau);
  const auto pl = product_limit(view, tau, target, /*competing_as_censoring=*/true);
  e.value = pl.incidence;
  e.variance = pl.survivor > 0.0 ? pl.survivor * pl.survivor * pl.greenwood : 0.0;
  e.degenerate = view.count(target, tau) == 0;
  return e;
}

Estimate nelson_aalen(const CountingProcessView& view, double tau, Target target) {
  check_tau(tau);
  auto e = make(Method::NelsonAalen, target, view, tau);
  for (const auto& s : view.steps()) {
    if (s.time > tau) break;
    const double d = target_events(s, target);
    const double y = s.at_risk;
    e.value += d / y;
    e.variance += d / (y * y);
  }
  e.degenerate = view.count(target, tau) == 0;
  return e;
}

Estimate prob_incidence_density_competing(const CountingProcessView& view, double tau) {
  check_tau(tau);
  auto e = make(Method::ID_prob_CR, Target::Event, view, tau);
  const double pt = view.person_time(tau);
  if (!(pt > 0.0)) throw NumericError("zero person-time at risk");
  const double n_event = view.count(Target::Event, tau);
  const double n_comp = view.count(Target::Competing, tau);
  if (n_event == 0.0) {
    e.degenerate = true;
    return e;
  }
  const double lambda = n_event / pt;
  const double mu = n_comp / pt;
  const double total = lambda + mu;
  const double survival = std::exp(-tau * total);
  const double mass = 1.0 - survival;
  e.value = lambda / total * mass;

  const double d_lambda = mu / (total * total) * mass + lambda / total * tau * survival;
  const double d_mu = -lambda / (total * total) * mass + lambda / total * tau * survival;
  const double var_lambda = n_event / (pt * pt);
  const double var_mu = n_comp / (pt * pt);
  e.variance = d_lambda * d_lambda * var_lambda + d_mu * d_mu * var_mu;
  return e;
}

Estimate aalen_johansen(const CountingProcessView& view, double tau, Target target) {
  check_tau(tau);
  auto e = make(Method::AalenJohansen, target, view, tau);
  e.value = product_limit(view, tau, target, /*competing_as_censoring=*/false).incidence;
  e.variance = 0.0;
  e.variance_source = VarianceSource::None;
  e.degenerate = view.count(target, tau) == 0;
  return e;
}

Estimate estimate(Method method, const CountingProcessView& view, double tau, Target target) {
  switch (method) {
    case Method::IP:
      return incidence_proportion(view, tau, target);
    case Method::ID_raw:
      return incidence_density(view, tau, target);
    case Method::ID_prob:
      return prob_transform_incidence_density(view, tau);
    case Method::OneMinusKM:
      return one_minus_kaplan_meier(view, tau, target);
    case Method::NelsonAalen:
      return nelson_aalen(view, tau, target);
    case Method::ID_prob_CR:
      return prob_incidence_density_competing(view, tau);
    case Method::AalenJohansen:
      return aalen_johansen(view, tau, target);
  }
  throw std::logic_error("unhandled method");
}

double product_limit_survivor(const CountingProcessView& view, double tau) {
  return product_limit(view, tau, Target::Event, false).survivor;
}

double censoring_survivor_before(const CountingProcessView& view, double t) {
  double g = 1.0;
  for (const auto& s : view.steps()) {
    if (s.time >= t) break;
    const int risk = s.at_risk - s.events - s.competing;
    if (risk > 0) g *= 1.0 - static_cast<double>(s.censored) / risk;
  }
  return g;
}

}  // namespace savvy
