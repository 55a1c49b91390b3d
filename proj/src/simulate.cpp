#include "savvy/simulate.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "savvy/followup.hpp"
#include "savvy/rng.hpp"

namespace savvy {

std::string_view to_string(CensoringKind kind) {
  switch (kind) {
    case CensoringKind::None:
      return "none";
    case CensoringKind::Administrative:
      return "administrative";
    case CensoringKind::Exponential:
      return "exponential";
    case CensoringKind::Mixed:
      return "mixed";
  }
  return "?";
}

CensoringKind parse_censoring_kind(std::string_view name) {
  for (auto k : {CensoringKind::None, CensoringKind::Administrative, CensoringKind::Exponential,
                 CensoringKind::Mixed}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown censoring kind '" + std::string(name) + "'");
}

void SimConfig::validate() const {
  for (const auto* g : {&group_a, &group_b}) {
    if (g->n < 1) throw std::invalid_argument("group size must be at least 1");
    if (!(g->alpha >= 0.0 && g->beta >= 0.0 && g->gamma >= 0.0)) {
      throw std::invalid_argument("hazards must be non-negative");
    }
    if (!(g->alpha + g->beta + g->gamma > 0.0) || !std::isfinite(g->alpha + g->beta + g->gamma)) {
      throw std::invalid_argument("total hazard must be positive and finite");
    }
  }
  if (ae_count < 1) throw std::invalid_argument("ae_count must be at least 1");
  const bool admin = censoring.kind == CensoringKind::Administrative ||
                     censoring.kind == CensoringKind::Mixed;
  const bool expo = censoring.kind == CensoringKind::Exponential ||
                    censoring.kind == CensoringKind::Mixed;
  if (admin && !(censoring.admin_time > 0.0)) {
    throw std::invalid_argument("administrative censoring time must be positive");
  }
  if (expo && !(censoring.rate >= 0.0 && std::isfinite(censoring.rate))) {
    throw std::invalid_argument("censoring rate must be non-negative");
  }
}

namespace {

double exponential(CounterStream& stream, double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(stream.uniform01()) / rate;
}

std::uint64_t patient_lane(int ae_id, Group group) {
  return (static_cast<std::uint64_t>(ae_id) << 1) | static_cast<std::uint64_t>(group);
}

}  // namespace

TrialDataset simulate_trial(const SimConfig& config) {
  config.validate();
  std::vector<EventRecord> records;
  for (int ae = 1; ae <= config.ae_count; ++ae) {
    for (Group group : {Group::A, Group::B}) {
      const auto& h = group == Group::A ? config.group_a : config.group_b;
      const double total = h.alpha + h.beta + h.gamma;
      for (std::size_t i = 0; i < h.n; ++i) {
        CounterStream stream(config.seed, i, patient_lane(ae, group));
        const double latent = exponential(stream, total);
        const double u = stream.uniform01() * total;
        const EventType kind = u < h.alpha           ? EventType::AE
                               : u < h.alpha + h.beta ? EventType::HardCompeting
                                                      : EventType::SoftCompeting;
        double censor = std::numeric_limits<double>::infinity();
        const auto& c = config.censoring;
        if (c.kind == CensoringKind::Exponential || c.kind == CensoringKind::Mixed) {
          censor = exponential(stream, c.rate);
        }
        if (c.kind == CensoringKind::Administrative || c.kind == CensoringKind::Mixed) {
          censor = std::min(censor, c.admin_time);
        }
        EventRecord r;
        r.ae_id = ae;
        char id[32];
        std::snprintf(id, sizeof id, "PAT-%c-%06zu", group == Group::A ? 'A' : 'B', i + 1);
        r.patient_id = id;
        r.group_label = group == Group::A ? "A" : "B";
        r.group = group;
        r.type = latent <= censor ? kind : EventType::Censored;
        r.time = std::min(latent, censor);
        if (config.integer_days) r.time = std::max(1.0, std::ceil(r.time));
        records.push_back(std::move(r));
      }
    }
  }
  return TrialDataset(config.savvy_id, std::move(records));
}

double true_cif(double alpha, double beta_total, double t) {
  if (alpha == 0.0) return 0.0;
  const double total = alpha + beta_total;
  return alpha / total * -std::expm1(-total * t);
}

double scheme_truth(const GroupHazards& h, Scheme scheme, double t) {
  switch (scheme) {
    case Scheme::AllEvents:
      return true_cif(h.alpha, h.beta + h.gamma, t);
    case Scheme::DeathOnly:
      return true_cif(h.alpha, h.beta, t);
    case Scheme::CompositeAllEvents:
      return true_cif(h.alpha + h.beta + h.gamma, 0.0, t);
    case Scheme::CompositeDeathOnly:
      return true_cif(h.alpha + h.beta, 0.0, t);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<BiasRow> bias_benchmark(const SimConfig& config, std::size_t replications,
                                    Scheme scheme, Execution execution, int threads) {
  config.validate();
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  constexpr std::size_t methods = std::size(kBiasMethods);
  const std::size_t rules = kRuleLabels.size();
  const std::size_t width = methods * 2 * rules;
  std::vector<double> biases(replications * width, std::numeric_limits<double>::quiet_NaN());

  auto run = [&](std::size_t r) {
    SimConfig c = config;
    c.ae_count = 1;
    c.seed = CounterStream(config.seed, r, 0xB1A5).next();
    try {
      const auto trial = simulate_trial(c);
      const auto data = apply_event_scheme(trial, 1, scheme);
      const auto grid = evaluation_times(data);
      const CountingProcessView va(data, Group::A);
      const CountingProcessView vb(data, Group::B);
      double* row = biases.data() + r * width;
      for (std::size_t m = 0; m < methods; ++m) {
        for (Group g : {Group::A, Group::B}) {
          const auto& view = g == Group::A ? va : vb;
          const auto& hz = g == Group::A ? c.group_a : c.group_b;
          for (std::size_t k = 0; k < rules; ++k) {
            const double tau = grid.rules[k].tau(g);
            const double value = estimate(kBiasMethods[m], view, tau).value;
            row[(m * 2 + static_cast<std::size_t>(g)) * rules + k] =
                value - scheme_truth(hz, scheme, tau);
          }
        }
      }
    } catch (const std::exception&) {
      // The row stays NaN and is left out of the averages.
    }
  };

  const auto count = static_cast<long long>(replications);
  if (execution == Execution::Serial) {
    for (long long r = 0; r < count; ++r) run(static_cast<std::size_t>(r));
  } else {
    const int n_threads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(n_threads)
    for (long long r = 0; r < count; ++r) run(static_cast<std::size_t>(r));
  }

  std::vector<BiasRow> table;
  for (std::size_t m = 0; m < methods; ++m) {
    for (Group g : {Group::A, Group::B}) {
      for (std::size_t k = 0; k < rules; ++k) {
        const std::size_t col = (m * 2 + static_cast<std::size_t>(g)) * rules + k;
        BiasRow row;
        row.method = kBiasMethods[m];
        row.group = g;
        row.tau_label = std::string(kRuleLabels[k]);
        double sum = 0.0;
        for (std::size_t r = 0; r < replications; ++r) {
          const double v = biases[r * width + col];
          if (std::isfinite(v)) {
            sum += v;
            ++row.n_valid;
          }
        }
        if (row.n_valid > 0) row.mean_bias = sum / static_cast<double>(row.n_valid);
        if (row.n_valid > 1) {
          double ss = 0.0;
          for (std::size_t r = 0; r < replications; ++r) {
            const double v = biases[r * width + col];
            if (std::isfinite(v)) ss += (v - row.mean_bias) * (v - row.mean_bias);
          }
          const auto nv = static_cast<double>(row.n_valid);
          row.mc_se = std::sqrt(ss / (nv - 1.0) / nv);
        }
        table.push_back(std::move(row));
      }
    }
  }
  return table;
}

}  // namespace savvy
