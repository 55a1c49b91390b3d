#include "savvy/comparisons.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "savvy/errors.hpp"

namespace savvy {

std::string_view to_string(Measure measure) { return measure == Measure::RD ? "RD" : "RR"; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pairable(const Estimate& qa, const Estimate& qb) {
  if (!is_probability_scale(qa.method) || !is_probability_scale(qb.method)) {
    throw std::invalid_argument("group comparisons need probability-scale estimates");
  }
  if (qa.method != qb.method || qa.target != qb.target || qa.scheme != qb.scheme ||
      qa.tau_label != qb.tau_label) {
    throw std::invalid_argument("estimates differ in method, target, scheme or follow-up rule");
  }
}

ComparisonResult base(const Estimate& qa, Measure measure) {
  ComparisonResult c;
  c.method = qa.method;
  c.target = qa.target;
  c.measure = measure;
  c.scheme = qa.scheme;
  c.tau_label = qa.tau_label;
  return c;
}

}  // namespace

ComparisonResult risk_difference(const Estimate& qa, const Estimate& qb) {
  check_pairable(qa, qb);
  auto c = base(qa, Measure::RD);
  c.estimate = qa.value - qb.value;
  c.variance = qa.variance + qb.variance;
  const double half = kZ975 * std::sqrt(c.variance);
  c.ci_low = c.estimate - half;
  c.ci_high = c.estimate + half;
  c.degenerate = qa.degenerate || qb.degenerate || !std::isfinite(c.variance);
  return c;
}

ComparisonResult relative_risk(const Estimate& qa, const Estimate& qb) {
  check_pairable(qa, qb);
  auto c = base(qa, Measure::RR);
  if (!(qb.value > 0.0)) {
    c.estimate = kNaN;
    c.variance = kNaN;
    c.ci_low = c.ci_high = kNaN;
    c.degenerate = true;
    return c;
  }
  c.estimate = qa.value / qb.value;
  if (!(qa.value > 0.0)) {
    c.variance = kNaN;
    c.ci_low = c.ci_high = kNaN;
    c.degenerate = true;
    return c;
  }
  c.variance = qa.variance / (qa.value * qa.value) + qb.variance / (qb.value * qb.value);
  const double half = kZ975 * std::sqrt(c.variance);
  c.ci_low = c.estimate * std::exp(-half);
  c.ci_high = c.estimate * std::exp(half);
  c.degenerate = qa.degenerate || qb.degenerate || !std::isfinite(c.variance);
  return c;
}

namespace {

constexpr Group kGroups[] = {Group::A, Group::B};

std::vector<Target> targets_for(Scheme scheme) {
  if (is_composite(scheme)) return {Target::Event};
  return {Target::Event, Target::Competing};
}

// One bootstrapped quantity of an AE.
struct Slot {
  enum class Kind { Value, LogRatio, HazardPair, CrossScheme };
  Kind kind = Kind::Value;
  std::string id;
  std::string pair;
  Scheme scheme = Scheme::AllEvents;
  Target target = Target::Event;
  std::optional<Group> group;
  std::string rule;
  Method method = Method::IP;
  Method benchmark = Method::AalenJohansen;
  HazardKind hazard = HazardKind::IDRatio;
};

// Appends values; records slot descriptions only when asked, so the
// per-replicate path does no string work.
class Collector {
 public:
  Collector(std::vector<double>& values, std::vector<Slot>* slots) : values_(values), slots_(slots) {}

  template <class Describe>
  void put(double value, Describe&& describe) {
    values_.push_back(value);
    if (slots_) slots_->push_back(describe());
  }

 private:
  std::vector<double>& values_;
  std::vector<Slot>* slots_;
};

std::string hazard_pair_id(HazardKind kind, Target target, Scheme scheme, std::string_view rule) {
  return "hrratio:" + std::string(to_string(kind)) + "/Cox:" + std::string(to_string(target)) +
         ':' + std::string(to_string(scheme)) + ':' + std::string(rule);
}

std::string cross_scheme_id(Target target, Group group, std::string_view rule) {
  return "crossscheme:AalenJohansen[DeathOnly]/AalenJohansen[AllEvents]:" +
         std::string(to_string(target)) + ':' + std::string(to_string(group)) + ':' +
         std::string(rule);
}

double safe_log_hr(const HazardRatioResult& r) { return r.degenerate ? kNaN : r.log_hr; }

// Every bootstrapped statistic of one AE, in a fixed order. The grid is
// re-derived from the sample unless frozen is given.
void evaluate_ae(std::span<const PatientRecord> sample, const FollowUpGrid* frozen,
                 const HazardOptions& hazard_options, std::vector<double>& values,
                 std::vector<Slot>* slots) {
  FollowUpGrid derived;
  if (!frozen) {
    std::vector<double> ta, tb;
    for (const auto& r : sample) (r.group == Group::A ? ta : tb).push_back(r.time);
    derived = evaluation_times(ta, tb);
  }
  const FollowUpGrid& grid = frozen ? *frozen : derived;
  Collector out(values, slots);

  // AJ by [scheme][rule][group][target] for the cross-scheme comparison.
  double aj_store[4][5][2][2];

  for (Scheme scheme : kAllSchemes) {
    const auto records = apply_event_scheme(sample, scheme);
    const CountingProcessView va(records, Group::A, scheme);
    const CountingProcessView vb(records, Group::B, scheme);
    const auto si = static_cast<std::size_t>(scheme);

    for (std::size_t ri = 0; ri < grid.rules.size(); ++ri) {
      const auto& rule = grid.rules[ri];
      for (Group group : kGroups) {
        const auto& view = group == Group::A ? va : vb;
        const double tau = rule.tau(group);
        const auto gi = static_cast<std::size_t>(group);

        auto value_slot = [&](Method m, Target t) {
          return [&, m, t] {
            Slot s;
            s.kind = Slot::Kind::Value;
            s.id = statistic_id({Statistic::Kind::Value, m, m, t, group}, scheme, rule.label);
            s.scheme = scheme;
            s.target = t;
            s.group = group;
            s.rule = rule.label;
            s.method = m;
            return s;
          };
        };

        const double aj = aalen_johansen(view, tau, Target::Event).value;
        aj_store[si][ri][gi][0] = aj;
        out.put(aj, value_slot(Method::AalenJohansen, Target::Event));
        const double cr = prob_incidence_density_competing(view, tau).value;
        out.put(cr, value_slot(Method::ID_prob_CR, Target::Event));
        if (!is_composite(scheme)) {
          const double aj_comp = aalen_johansen(view, tau, Target::Competing).value;
          aj_store[si][ri][gi][1] = aj_comp;
          out.put(aj_comp, value_slot(Method::AalenJohansen, Target::Competing));
        }

        const double ip = incidence_proportion(view, tau).value;
        const double idp = prob_transform_incidence_density(view, tau).value;
        const double km = one_minus_kaplan_meier(view, tau).value;
        auto value_of = [&](Method m) {
          switch (m) {
            case Method::IP:
              return ip;
            case Method::ID_prob:
              return idp;
            case Method::OneMinusKM:
              return km;
            case Method::ID_prob_CR:
              return cr;
            case Method::AalenJohansen:
              return aj;
            default:
              return kNaN;
          }
        };
        for (const auto& pair : kProbabilityPairs) {
          out.put(std::log(value_of(pair.comparator) / value_of(pair.benchmark)), [&] {
            Slot s;
            s.kind = Slot::Kind::LogRatio;
            s.id = statistic_id({Statistic::Kind::LogRatio, pair.comparator, pair.benchmark,
                                 Target::Event, group},
                                scheme, rule.label);
            s.pair = std::string(to_string(pair.comparator)) + "/" +
                     std::string(to_string(pair.benchmark));
            s.scheme = scheme;
            s.group = group;
            s.rule = rule.label;
            s.method = pair.comparator;
            s.benchmark = pair.benchmark;
            return s;
          });
        }
      }
    }

    for (Target target : targets_for(scheme)) {
      const double cox = safe_log_hr(cox_two_sample(va, vb, target, grid.tau_min));
      for (const auto& rule : grid.rules) {
        const double idr = safe_log_hr(incidence_density_ratio(va, vb, target, rule, hazard_options));
        const double nar = safe_log_hr(nelson_aalen_ratio(va, vb, target, rule));
        for (auto [kind, value] : {std::pair{HazardKind::IDRatio, idr}, std::pair{HazardKind::NAARatio, nar}}) {
          out.put(value - cox, [&, kind = kind] {
            Slot s;
            s.kind = Slot::Kind::HazardPair;
            s.id = hazard_pair_id(kind, target, scheme, rule.label);
            s.pair = std::string(to_string(kind)) + "/Cox";
            s.scheme = scheme;
            s.target = target;
            s.rule = rule.label;
            s.hazard = kind;
            return s;
          });
        }
      }
    }
  }

  const auto all = static_cast<std::size_t>(Scheme::AllEvents);
  const auto death = static_cast<std::size_t>(Scheme::DeathOnly);
  for (std::size_t ri = 0; ri < grid.rules.size(); ++ri) {
    for (Group group : kGroups) {
      const auto gi = static_cast<std::size_t>(group);
      for (Target target : {Target::Event, Target::Competing}) {
        const auto ti = static_cast<std::size_t>(target);
        out.put(std::log(aj_store[death][ri][gi][ti] / aj_store[all][ri][gi][ti]), [&] {
          Slot s;
          s.kind = Slot::Kind::CrossScheme;
          s.id = cross_scheme_id(target, group, grid.rules[ri].label);
          s.pair = "AalenJohansen[DeathOnly]/AalenJohansen[AllEvents]";
          s.scheme = Scheme::AllEvents;
          s.target = target;
          s.group = group;
          s.rule = grid.rules[ri].label;
          return s;
        });
      }
    }
  }
}

double group_fraction(const DescriptiveSummary& d, Status status, std::optional<Group> group) {
  const auto& all = d.at(std::nullopt, group);
  if (all.count == 0) return kNaN;
  return static_cast<double>(d.at(status, group).count) / static_cast<double>(all.count);
}

AeResult analyze_ae(const TrialDataset& dataset, int ae_id, const AnalysisOptions& options) {
  AeResult result;
  result.ae_id = ae_id;
  result.n_A = dataset.group_size(ae_id, Group::A);
  result.n_B = dataset.group_size(ae_id, Group::B);
  if (result.n_A == 0 || result.n_B == 0) {
    throw ValidationError("AE " + std::to_string(ae_id) + ": treatment group " +
                          (result.n_A == 0 ? "A" : "B") + " has no records");
  }
  const auto sample = dataset.sample(ae_id);
  const BootstrapSpec& spec = options.bootstrap;
  if (spec.replicates < 2) throw std::invalid_argument("bootstrap needs at least 2 replicates");

  // Point values and slot layout on the original data.
  std::vector<double> point;
  std::vector<Slot> slots;
  evaluate_ae(sample, nullptr, options.hazard, point, &slots);
  std::vector<double> ta, tb;
  for (const auto& r : sample) (r.group == Group::A ? ta : tb).push_back(r.time);
  const FollowUpGrid grid = evaluation_times(ta, tb);

  const std::size_t width = point.size();
  auto functional = [&](std::span<const PatientRecord> drawn, std::span<double> row) {
    std::vector<double> values;
    values.reserve(width);
    evaluate_ae(drawn, spec.frozen_tau ? &grid : nullptr, options.hazard, values, nullptr);
    if (values.size() != width) throw std::logic_error("statistic layout changed");
    std::copy(values.begin(), values.end(), row.begin());
  };
  const auto matrix =
      run_replicates(std::span<const PatientRecord>(sample), spec, width, functional);

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < width; ++c) {
    index.emplace(slots[c].id, c);
    result.bootstrap.push_back(summarize_column(matrix, c, spec, slots[c].id));
  }
  auto boot_variance = [&](const std::string& id) {
    const auto& b = result.bootstrap.at(index.at(id));
    return b.unstable() ? kNaN : b.variance;
  };

  for (Scheme scheme : kAllSchemes) {
    SchemeResult sr;
    sr.scheme = scheme;
    sr.followup = grid;
    const auto analysis = apply_event_scheme(dataset, ae_id, scheme);
    sr.descriptives = describe(analysis);
    const CountingProcessView va(analysis, Group::A);
    const CountingProcessView vb(analysis, Group::B);

    for (const auto& rule : grid.rules) {
      for (Target target : targets_for(scheme)) {
        std::vector<Method> methods;
        if (target == Target::Event) {
          methods.assign(std::begin(kAllMethods), std::end(kAllMethods));
        } else {
          methods = {Method::IP, Method::ID_raw, Method::OneMinusKM, Method::NelsonAalen,
                     Method::AalenJohansen};
        }
        for (Method method : methods) {
          Estimate per_group[2];
          for (Group group : kGroups) {
            const auto& view = group == Group::A ? va : vb;
            Estimate e = estimate(method, view, rule.tau(group), target);
            e.tau_label = rule.label;
            if (method == Method::AalenJohansen || method == Method::ID_prob_CR) {
              e.variance = boot_variance(
                  statistic_id({Statistic::Kind::Value, method, method, target, group}, scheme,
                               rule.label));
              e.variance_source = VarianceSource::Bootstrap;
            }
            per_group[static_cast<std::size_t>(group)] = e;
            sr.estimates.push_back(e);
          }
          if (is_probability_scale(method)) {
            sr.comparisons.push_back(risk_difference(per_group[0], per_group[1]));
            sr.comparisons.push_back(relative_risk(per_group[0], per_group[1]));
          }
        }
      }
    }

    for (Target target : targets_for(scheme)) {
      sr.hazard_ratios.push_back(cox_two_sample(va, vb, target, grid.tau_min));
      for (const auto& rule : grid.rules) {
        sr.hazard_ratios.push_back(incidence_density_ratio(va, vb, target, rule, options.hazard));
        sr.hazard_ratios.push_back(nelson_aalen_ratio(va, vb, target, rule));
      }
    }
    result.schemes.push_back(std::move(sr));
  }

  auto find_estimate = [&](Scheme scheme, Method method, Target target, Group group,
                           const std::string& rule) -> const Estimate& {
    for (const auto& e : result.schemes[static_cast<std::size_t>(scheme)].estimates) {
      if (e.method == method && e.target == target && e.group == group && e.tau_label == rule) {
        return e;
      }
    }
    throw std::logic_error("missing estimate cell");
  };
  auto find_hazard = [&](Scheme scheme, HazardKind kind, Target target,
                         const std::string& rule) -> const HazardRatioResult& {
    for (const auto& h : result.schemes[static_cast<std::size_t>(scheme)].hazard_ratios) {
      if (h.kind == kind && h.target == target && (kind == HazardKind::Cox || h.tau_label == rule)) {
        return h;
      }
    }
    throw std::logic_error("missing hazard cell");
  };

  for (std::size_t c = 0; c < width; ++c) {
    const Slot& s = slots[c];
    if (s.kind == Slot::Kind::Value) continue;
    LogRatioEntry entry;
    entry.pair = s.pair;
    entry.statistic_id = s.id;
    entry.scheme = s.scheme;
    entry.target = s.target;
    entry.group = s.group;
    entry.tau_label = s.rule;
    entry.theta = point[c];
    entry.bootstrap = result.bootstrap[c];
    const auto& rule = grid.rule(s.rule);
    const auto& descriptives = result.schemes[static_cast<std::size_t>(s.scheme)].descriptives;
    switch (s.kind) {
      case Slot::Kind::LogRatio: {
        const auto& comp = find_estimate(s.scheme, s.method, s.target, *s.group, s.rule);
        const auto& bench = find_estimate(s.scheme, s.benchmark, s.target, *s.group, s.rule);
        entry.comparator_value = comp.value;
        entry.benchmark_value = bench.value;
        entry.comparator_se = std::sqrt(comp.variance);
        entry.benchmark_se = std::sqrt(bench.variance);
        entry.moderators["tau_days"] = rule.tau(*s.group);
        break;
      }
      case Slot::Kind::HazardPair: {
        const auto& comp = find_hazard(s.scheme, s.hazard, s.target, s.rule);
        const auto& cox = find_hazard(s.scheme, HazardKind::Cox, s.target, s.rule);
        entry.comparator_value = std::exp(comp.log_hr);
        entry.benchmark_value = std::exp(cox.log_hr);
        entry.comparator_se = std::sqrt(comp.var_log_hr);
        entry.benchmark_se = std::sqrt(cox.var_log_hr);
        entry.moderators["tau_days"] = rule.tau_A == rule.tau_B ? rule.tau_A : kNaN;
        break;
      }
      case Slot::Kind::CrossScheme: {
        const auto& comp = find_estimate(Scheme::DeathOnly, Method::AalenJohansen, s.target,
                                         *s.group, s.rule);
        const auto& bench = find_estimate(Scheme::AllEvents, Method::AalenJohansen, s.target,
                                          *s.group, s.rule);
        entry.comparator_value = comp.value;
        entry.benchmark_value = bench.value;
        entry.comparator_se = std::sqrt(comp.variance);
        entry.benchmark_se = std::sqrt(bench.variance);
        entry.moderators["tau_days"] = rule.tau(*s.group);
        break;
      }
      case Slot::Kind::Value:
        break;
    }
    entry.moderators["ae_frequency"] = entry.benchmark_value;
    entry.moderators["competing_fraction"] =
        is_composite(s.scheme) ? 0.0 : group_fraction(descriptives, Status::Competing, s.group);
    entry.moderators["censoring_fraction"] =
        group_fraction(descriptives, Status::Censored, s.group);
    result.log_ratios.push_back(std::move(entry));
  }
  return result;
}

}  // namespace

TrialResultTable compare_all(const TrialDataset& dataset, const AnalysisOptions& options) {
  TrialResultTable table;
  table.savvy_id = dataset.savvy_id();
  table.options = options;
  table.input_rows = dataset.input_rows();
  for (const auto& e : dataset.exclusion_log()) ++table.exclusions_by_reason[e.reason];
  const auto ids = dataset.ae_ids();
  if (ids.empty()) throw ValidationError("no valid records to analyze");
  for (int ae_id : ids) {
    if (dataset.group_size(ae_id, Group::A) == 0 || dataset.group_size(ae_id, Group::B) == 0) {
      throw ValidationError("AE " + std::to_string(ae_id) + " has an empty treatment group");
    }
  }
  for (int ae_id : ids) table.aes.push_back(analyze_ae(dataset, ae_id, options));
  return table;
}

}  // namespace savvy
