#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "savvy/comparisons.hpp"
#include "savvy/meta.hpp"
#include "savvy/simulate.hpp"

namespace savvy::cli {

struct RegisterOptions {
  std::filesystem::path registry;
  std::filesystem::path out;  // empty: rewrite the registry in place
};

struct AnalyzeOptions {
  std::filesystem::path input;
  std::string savvy_id;
  std::filesystem::path registry;  // optional; when set the ID must be registered
  std::string experimental_label = "A";
  std::filesystem::path out_dir = ".";
  AnalysisOptions analysis;
};

struct MetaOptions {
  std::filesystem::path results;  // directory of <savvy_id>.json files
  std::vector<std::string> pairs{"OneMinusKM/AalenJohansen"};
  std::vector<std::string> schemes{"AllEvents"};
  std::vector<std::string> taus{"tau"};
  std::string target = "event";
  std::string group = "A";
  std::vector<std::string> moderators;
  meta::HeterogeneityMethod method = meta::HeterogeneityMethod::PauleMandel;
  double bias_threshold = 0.1;
  bool svg = false;
  std::filesystem::path out_dir = ".";
};

struct SimulateOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> savvy_id;
  std::filesystem::path out;        // empty: standard output
  std::size_t bias_replications = 0;  // > 0: write a bias table instead of a trial
  std::string scheme = "AllEvents";
  int threads = 0;
};

SimConfig read_sim_config(const std::filesystem::path& path);
SimConfig parse_sim_config(std::string_view json_text);

// Each returns the files it wrote. Errors propagate as ValidationError,
// SchemaError or NumericError.
std::vector<std::filesystem::path> run_register(const RegisterOptions& options, std::ostream& log);
std::vector<std::filesystem::path> run_analyze(const AnalyzeOptions& options, std::ostream& log);
std::vector<std::filesystem::path> run_meta(const MetaOptions& options, std::ostream& log);
std::vector<std::filesystem::path> run_simulate(const SimulateOptions& options, std::ostream& out,
                                                std::ostream& log);

// Process exit code for an exception escaping a command.
int exit_code_for(const std::exception& error);

}  // namespace savvy::cli
