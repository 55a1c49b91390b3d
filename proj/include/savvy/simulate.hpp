#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "savvy/bootstrap.hpp"
#include "savvy/estimators.hpp"
#include "savvy/trial_data.hpp"

namespace savvy {

// Constant hazards per day for one treatment group.
struct GroupHazards {
  std::size_t n = 100;
  double alpha = 0.0;  // AE
  double beta = 0.0;   // hard competing
  double gamma = 0.0;  // soft competing
};

enum class CensoringKind { None, Administrative, Exponential, Mixed };

std::string_view to_string(CensoringKind kind);
CensoringKind parse_censoring_kind(std::string_view name);

struct Censoring {
  CensoringKind kind = CensoringKind::None;
  double admin_time = std::numeric_limits<double>::infinity();  // Administrative, Mixed
  double rate = 0.0;                                            // Exponential, Mixed
};

struct SimConfig {
  GroupHazards group_a;
  GroupHazards group_b;
  Censoring censoring;
  std::uint64_t seed = 1;
  int ae_count = 1;           // AEs 1..ae_count share the hazards, drawn independently
  bool integer_days = false;  // round observed times up to whole days
  std::string savvy_id = "SIM";

  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

// Latent time ~ Exp(alpha + beta + gamma), type drawn in proportion to the
// hazards, censored when the censoring time comes first. Groups are labelled
// "A" and "B".
TrialDataset simulate_trial(const SimConfig& config);

// Cumulative incidence of the AE at t under constant hazards.
double true_cif(double alpha, double beta_total, double t);

// True cumulative incidence of the scheme's target event in one group.
double scheme_truth(const GroupHazards& hazards, Scheme scheme, double t);

struct BiasRow {
  Method method = Method::IP;
  Group group = Group::A;
  std::string tau_label;
  double mean_bias = 0.0;
  double mc_se = 0.0;  // sd of the replicate biases / sqrt(n_valid)
  std::size_t n_valid = 0;
};

// Probability-scale estimators compared by bias_benchmark.
inline constexpr Method kBiasMethods[] = {Method::IP, Method::ID_prob, Method::OneMinusKM,
                                          Method::ID_prob_CR, Method::AalenJohansen};

// Mean of (estimate - truth) over R simulated trials for AE 1 under a scheme,
// for every probability estimator, group and follow-up rule. Replicate r
// simulates with a seed derived from (config.seed, r), so Serial and Parallel
// agree exactly.
std::vector<BiasRow> bias_benchmark(const SimConfig& config, std::size_t replications,
                                    Scheme scheme = Scheme::AllEvents,
                                    Execution execution = Execution::Parallel, int threads = 0);

}  // namespace savvy
