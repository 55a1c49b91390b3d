#include "savvy/registry.hpp"

#include <charconv>
#include <cstdio>
#include <set>

#include "savvy/csv.hpp"
#include "savvy/errors.hpp"

namespace savvy {

namespace {

bool is_missing(std::string_view s) { return s.empty() || s == "NA"; }

// Number of a well-formed "SAVVY-dddd" ID, or -1.
int savvy_number(std::string_view id) {
  constexpr std::string_view prefix = "SAVVY-";
  if (!id.starts_with(prefix) || id.size() < prefix.size() + 4) return -1;
  const auto digits = id.substr(prefix.size());
  int value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return -1;
  return value;
}

}  // namespace

const RegistryEntry* Registry::find(std::string_view savvy_id) const {
  for (const auto& t : trials) {
    if (t.savvy_id == savvy_id) return &t;
  }
  return nullptr;
}

Registry parse_registry_csv(std::string_view content) {
  if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);
  const auto rows = csv::lines(content);
  if (rows.empty()) throw ValidationError("registry is empty");
  const auto header = csv::split_line(rows.front());
  if (header.size() != kRegistryColumns.size() ||
      !std::equal(header.begin(), header.end(), kRegistryColumns.begin(),
                  [](const std::string& a, std::string_view b) { return csv::trim(a) == b; })) {
    std::string expected;
    for (auto c : kRegistryColumns) expected += (expected.empty() ? "" : ",") + std::string(c);
    throw ValidationError("registry header must be: " + expected);
  }

  Registry registry;
  std::set<std::string> closed;  // trials whose block has ended
  std::set<std::string> ids;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (csv::trim(rows[i]).empty()) continue;
    auto f = csv::split_line(rows[i]);
    const std::string where = "registry row " + std::to_string(i);
    if (f.size() != kRegistryColumns.size()) {
      throw ValidationError(where + ": expected " + std::to_string(kRegistryColumns.size()) +
                            " fields, found " + std::to_string(f.size()));
    }
    for (auto& s : f) s = csv::trim(s);
    const std::string& trial_id = f[0];
    if (is_missing(trial_id)) throw ValidationError(where + ": missing unique_trial_id");

    int ae_id = 0;
    const auto [ptr, ec] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), ae_id);
    if (ec != std::errc() || ptr != f[5].data() + f[5].size() || ae_id < 1) {
      throw ValidationError(where + ": ae_id must be a positive integer");
    }

    const bool continues = !registry.trials.empty() &&
                           registry.trials.back().unique_trial_id == trial_id;
    if (!continues) {
      if (!registry.trials.empty()) closed.insert(registry.trials.back().unique_trial_id);
      if (closed.contains(trial_id)) {
        throw ValidationError(where + ": duplicate registration of trial " + trial_id);
      }
      RegistryEntry t;
      t.unique_trial_id = trial_id;
      t.indication = f[1];
      t.type_of_comparison = f[2];
      t.end_of_trial = f[3];
      t.max_followup_primary_endpoint = f[4];
      t.savvy_id = is_missing(f[14]) ? "" : f[14];
      if (!t.savvy_id.empty()) {
        if (savvy_number(t.savvy_id) < 0) {
          throw ValidationError(where + ": malformed savvy_id '" + t.savvy_id + "'");
        }
        if (!ids.insert(t.savvy_id).second) {
          throw ValidationError(where + ": savvy_id " + t.savvy_id + " already in use");
        }
      }
      registry.trials.push_back(std::move(t));
    }
    auto& trial = registry.trials.back();
    if (ae_id == static_cast<int>(trial.aes.size())) {
      throw ValidationError(where + ": duplicate registration of trial " + trial_id + " (ae_id " +
                            std::to_string(ae_id) + " repeated)");
    }
    if (ae_id != static_cast<int>(trial.aes.size()) + 1) {
      throw ValidationError(where + ": ae_id of trial " + trial_id + " must run 1, 2, ... (got " +
                            std::to_string(ae_id) + ")");
    }
    trial.aes.push_back({ae_id, f[6], f[7], f[8], f[9], f[10], f[11], f[12], f[13]});
  }
  return registry;
}

std::string serialize_registry_csv(const Registry& registry) {
  std::string out;
  for (std::size_t i = 0; i < kRegistryColumns.size(); ++i) {
    out += (i ? "," : "") + std::string(kRegistryColumns[i]);
  }
  out += '\n';
  for (const auto& t : registry.trials) {
    for (const auto& ae : t.aes) {
      const std::string fields[] = {t.unique_trial_id,
                                    t.indication,
                                    t.type_of_comparison,
                                    t.end_of_trial,
                                    t.max_followup_primary_endpoint,
                                    std::to_string(ae.ae_id),
                                    ae.max_followup_ae,
                                    ae.seriousness,
                                    ae.severity,
                                    ae.soc,
                                    ae.pt,
                                    ae.special_interest_ae,
                                    ae.hard_competing_events,
                                    ae.soft_competing_events,
                                    t.savvy_id.empty() ? "NA" : t.savvy_id};
      bool first = true;
      for (const auto& f : fields) {
        out += (first ? "" : ",") + csv::escape(f);
        first = false;
      }
      out += '\n';
    }
  }
  return out;
}

std::size_t assign_savvy_ids(Registry& registry) {
  int next = 0;
  for (const auto& t : registry.trials) next = std::max(next, savvy_number(t.savvy_id));
  std::size_t assigned = 0;
  for (auto& t : registry.trials) {
    if (!t.savvy_id.empty()) continue;
    char id[32];
    std::snprintf(id, sizeof id, "SAVVY-%04d", ++next);
    t.savvy_id = id;
    ++assigned;
  }
  return assigned;
}

}  // namespace savvy
