#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace savvy {

// Pre-registration sheet columns, one row per AE of a trial.
inline constexpr std::array<std::string_view, 15> kRegistryColumns{
    "unique_trial_id",      "indication",
    "type_of_comparison",   "end_of_trial",
    "max_followup_primary_endpoint", "ae_id",
    "max_followup_ae",      "seriousness",
    "severity",             "soc",
    "pt",                   "special_interest_ae",
    "hard_competing_events", "soft_competing_events",
    "savvy_id"};

struct RegistryAe {
  int ae_id = 0;
  std::string max_followup_ae;
  std::string seriousness;
  std::string severity;
  std::string soc;
  std::string pt;
  std::string special_interest_ae;
  std::string hard_competing_events;
  std::string soft_competing_events;
};

struct RegistryEntry {
  std::string unique_trial_id;
  std::string indication;
  std::string type_of_comparison;
  std::string end_of_trial;
  std::string max_followup_primary_endpoint;
  std::vector<RegistryAe> aes;
  std::string savvy_id;  // empty until registered
};

struct Registry {
  std::vector<RegistryEntry> trials;

  const RegistryEntry* find(std::string_view savvy_id) const;
};

// Rows of a trial must be contiguous with ae_id 1, 2, ... "NA" is accepted
// for every descriptive field. Throws ValidationError on a missing trial ID,
// a trial ID that reappears (duplicate registration), a gap in ae_id or a
// malformed or repeated savvy_id.
Registry parse_registry_csv(std::string_view content);

std::string serialize_registry_csv(const Registry& registry);

// Gives every trial without an ID the next SAVVY-xxxx number after the
// largest one in use. Returns how many were assigned.
std::size_t assign_savvy_ids(Registry& registry);

}  // namespace savvy
