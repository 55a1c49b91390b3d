#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "savvy/estimators.hpp"
#include "savvy/trial_data.hpp"

namespace savvy::testing {

struct Obs {
  Group group;
  double time;
  EventType type;
};

inline TrialDataset make_trial(const std::vector<Obs>& obs, std::string savvy_id = "T",
                               int ae_id = 1) {
  std::vector<EventRecord> records;
  int n = 0;
  for (const auto& o : obs) {
    EventRecord r;
    r.ae_id = ae_id;
    r.patient_id = "P" + std::to_string(++n);
    r.group = o.group;
    r.group_label = o.group == Group::A ? "A" : "B";
    r.time = o.time;
    r.type = o.type;
    records.push_back(r);
  }
  return TrialDataset(std::move(savvy_id), std::move(records));
}

// {(1, AE), (2, competing), (3, censored), (4, AE)}
inline std::vector<AnalysisRecord> f4_records(Group group = Group::A) {
  return {{group, 1.0, Status::Event},
          {group, 2.0, Status::Competing},
          {group, 3.0, Status::Censored},
          {group, 4.0, Status::Event}};
}

inline std::vector<Obs> f4_obs(Group group = Group::A) {
  return {{group, 1.0, EventType::AE},
          {group, 2.0, EventType::HardCompeting},
          {group, 3.0, EventType::Censored},
          {group, 4.0, EventType::AE}};
}

struct FuzzShape {
  std::size_t max_n = 50;
  double p_censor = 0.3;
  double p_competing = 0.3;
  bool integer_times = true;  // ties are common
};

// Random one-group sample with at least one record.
inline std::vector<AnalysisRecord> fuzz_group(std::mt19937_64& rng, const FuzzShape& shape,
                                              Group group = Group::A) {
  std::uniform_int_distribution<std::size_t> size(1, shape.max_n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> day(1, 30);
  const std::size_t n = size(rng);
  std::vector<AnalysisRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = unit(rng);
    const Status s = u < shape.p_censor                       ? Status::Censored
                     : u < shape.p_censor + shape.p_competing ? Status::Competing
                                                              : Status::Event;
    const double t = shape.integer_times ? day(rng) : 0.01 + 30.0 * unit(rng);
    out.push_back({group, t, s});
  }
  return out;
}

// Direct per-time product-limit sums over raw records, used as an oracle.
struct NaiveCurves {
  double aj = 0.0;    // cumulative incidence of Event
  double km = 0.0;    // 1 - KM treating Competing as censored
  double surv = 1.0;  // all-cause survivor
};

inline NaiveCurves naive_curves(const std::vector<AnalysisRecord>& recs, double tau) {
  std::vector<double> times;
  for (const auto& r : recs) times.push_back(r.time);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  NaiveCurves c;
  double km_surv = 1.0;
  for (double t : times) {
    if (t > tau) break;
    double y = 0, d = 0, dc = 0;
    for (const auto& r : recs) {
      if (r.time >= t) ++y;
      if (r.time == t && r.status == Status::Event) ++d;
      if (r.time == t && r.status == Status::Competing) ++dc;
    }
    c.aj += c.surv * d / y;
    c.surv *= 1.0 - (d + dc) / y;
    km_surv *= 1.0 - d / y;
  }
  c.km = 1.0 - km_surv;
  return c;
}

// Log partial likelihood of the one-covariate Breslow Cox model, z = 1 for A.
inline double cox_log_pl(const std::vector<AnalysisRecord>& recs, double beta) {
  double ll = 0.0;
  std::vector<double> times;
  for (const auto& r : recs) {
    if (r.status == Status::Event) times.push_back(r.time);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  for (double t : times) {
    double d = 0, dz = 0, risk = 0;
    for (const auto& r : recs) {
      const double z = r.group == Group::A ? 1.0 : 0.0;
      if (r.time >= t) risk += std::exp(beta * z);
      if (r.time == t && r.status == Status::Event) {
        ++d;
        dz += z;
      }
    }
    ll += beta * dz - d * std::log(risk);
  }
  return ll;
}

}  // namespace savvy::testing
