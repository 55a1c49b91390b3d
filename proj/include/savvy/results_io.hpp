#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "savvy/comparisons.hpp"
#include "savvy/meta.hpp"

namespace savvy {

inline constexpr int kFormatVersion = 1;

// Aggregated per-trial result document. Holds no patient-level rows.
// Undefined values (NaN, infinities) are written as null.
nlohmann::ordered_json results_to_json(const TrialResultTable& table);

// Pretty-printed document with a trailing newline; identical input gives
// identical bytes.
std::string write_results_json(const TrialResultTable& table);

struct ResultsFile {
  std::filesystem::path path;
  nlohmann::json document;
};

// Reads every *.json in a directory (sorted by file name), or the given files.
// Throws SchemaError listing all files that fail to parse or carry another
// format_version.
std::vector<ResultsFile> load_results(const std::filesystem::path& directory);
std::vector<ResultsFile> load_results(const std::vector<std::filesystem::path>& files);

struct MetaSelector {
  std::string pair = "OneMinusKM/AalenJohansen";
  Scheme scheme = Scheme::AllEvents;
  std::string tau_label = "tau";
  Target target = Target::Event;
  std::optional<Group> group = Group::A;  // ignored for hazard-ratio pairs
};

struct SelectedRatio {
  meta::MetaEntry entry;
  int ae_id = 0;
  double comparator_value = 0.0;
  double benchmark_value = 0.0;
  double comparator_se = 0.0;
  double benchmark_se = 0.0;
};

struct Selection {
  std::vector<SelectedRatio> rows;
  std::vector<std::string> skipped;  // "<label>: <reason>"

  meta::MetaInput entries() const;
};

// One row per AE whose log-ratio matches the selector. AEs with an undefined
// log-ratio, an unstable bootstrap variance or more than 10% degenerate
// replicates are listed in skipped instead.
Selection select_log_ratios(const std::vector<ResultsFile>& files, const MetaSelector& selector);

}  // namespace savvy
