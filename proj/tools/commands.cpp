#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "savvy/csv.hpp"
#include "savvy/errors.hpp"
#include "savvy/registry.hpp"
#include "savvy/results_io.hpp"

namespace savvy::cli {

namespace fs = std::filesystem;
using csv::format_double;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
}

std::string join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + csv::escape(fields[i]);
  return line + "\n";
}

// File-name fragment for a comparator/benchmark pair.
std::string file_stem(const std::string& pair, const std::string& scheme, const std::string& tau) {
  std::string p = pair;
  for (std::size_t at; (at = p.find('/')) != std::string::npos;) p.replace(at, 1, "_vs_");
  return p + "_" + scheme + "_" + tau;
}

void check_savvy_id(const std::string& id) {
  if (id.empty() || id.find_first_of("/\\") != std::string::npos || id == "." || id == "..") {
    throw ValidationError("invalid savvy_id '" + id + "'");
  }
}

}  // namespace

SimConfig parse_sim_config(std::string_view json_text) {
  const auto doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ValidationError("config is not a JSON object");
  SimConfig c;
  try {
    auto group = [](const nlohmann::json& g) {
      GroupHazards h;
      h.n = g.at("n").get<std::size_t>();
      h.alpha = g.value("alpha", 0.0);
      h.beta = g.value("beta", 0.0);
      h.gamma = g.value("gamma", 0.0);
      return h;
    };
    c.group_a = group(doc.at("group_a"));
    c.group_b = group(doc.at("group_b"));
    if (doc.contains("censoring")) {
      const auto& cj = doc.at("censoring");
      c.censoring.kind = parse_censoring_kind(cj.value("kind", std::string("none")));
      if (cj.contains("admin_time")) c.censoring.admin_time = cj.at("admin_time").get<double>();
      c.censoring.rate = cj.value("rate", 0.0);
    }
    c.seed = doc.value("seed", std::uint64_t{1});
    c.ae_count = doc.value("ae_count", 1);
    c.integer_days = doc.value("integer_days", false);
    c.savvy_id = doc.value("savvy_id", std::string("SIM"));
    c.validate();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

SimConfig read_sim_config(const fs::path& path) { return parse_sim_config(read_file(path)); }

std::vector<fs::path> run_register(const RegisterOptions& options, std::ostream& log) {
  auto registry = parse_registry_csv(read_file(options.registry));
  const std::size_t before = registry.trials.size();
  std::vector<bool> had_id;
  for (const auto& t : registry.trials) had_id.push_back(!t.savvy_id.empty());
  assign_savvy_ids(registry);
  for (std::size_t i = 0; i < before; ++i) {
    if (!had_id[i]) {
      log << "registered " << registry.trials[i].unique_trial_id << " as "
          << registry.trials[i].savvy_id << "\n";
    }
  }
  const fs::path out = options.out.empty() ? options.registry : options.out;
  write_file(out, serialize_registry_csv(registry));
  return {out};
}

std::vector<fs::path> run_analyze(const AnalyzeOptions& options, std::ostream& log) {
  check_savvy_id(options.savvy_id);
  if (!options.registry.empty()) {
    const auto registry = parse_registry_csv(read_file(options.registry));
    if (!registry.find(options.savvy_id)) {
      throw ValidationError(options.savvy_id + " is not in the registry");
    }
  }
  ParseOptions parse;
  parse.experimental_label = options.experimental_label;
  const auto dataset = parse_trial_csv(read_file(options.input), options.savvy_id, parse);
  log << options.savvy_id << ": " << dataset.records().size() << " records, "
      << dataset.exclusion_log().size() << " excluded\n";
  const auto table = compare_all(dataset, options.analysis);
  const fs::path json_path = options.out_dir / (options.savvy_id + ".json");
  const fs::path excl_path = options.out_dir / (options.savvy_id + "_exclusions.csv");
  write_file(json_path, write_results_json(table));
  write_file(excl_path, serialize_exclusions_csv(dataset));
  return {json_path, excl_path};
}

std::vector<fs::path> run_meta(const MetaOptions& options, std::ostream& log) {
  const auto files = load_results(options.results);
  if (files.size() < 2) {
    throw ValidationError("K < 2: meta-analysis needs at least two result files, found " +
                          std::to_string(files.size()));
  }
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    const fs::path path = options.out_dir / name;
    write_file(path, content);
    written.push_back(path);
  };

  for (const auto& pair : options.pairs) {
    for (const auto& scheme_name : options.schemes) {
      for (const auto& tau : options.taus) {
        MetaSelector selector;
        selector.pair = pair;
        try {
          selector.scheme = parse_scheme(scheme_name);
          selector.target = parse_target(options.target);
        } catch (const std::invalid_argument& e) {
          throw ValidationError(e.what());
        }
        selector.tau_label = tau;
        if (options.group == "A" || options.group == "B") {
          selector.group = options.group == "A" ? Group::A : Group::B;
        } else {
          throw ValidationError("group must be A or B");
        }
        const auto selection = select_log_ratios(files, selector);
        const std::string stem = file_stem(pair, scheme_name, tau);
        for (const auto& s : selection.skipped) log << stem << ": skipped " << s << "\n";
        const auto entries = selection.entries();
        if (entries.size() < 2) {
          throw ValidationError("K < 2: " + std::to_string(entries.size()) +
                                " usable log-ratios for " + stem);
        }

        const auto pooled = meta::random_effects(entries, options.method);
        std::string out = join({"pair", "scheme", "tau_label", "target", "group", "k_used",
                                "k_skipped", "theta", "se_theta", "ci_low", "ci_high", "rho2",
                                "method"});
        out += join({pair, scheme_name, tau, options.target, options.group,
                     std::to_string(pooled.k_used), std::to_string(selection.skipped.size()),
                     format_double(pooled.theta), format_double(pooled.se_theta),
                     format_double(pooled.ci_low), format_double(pooled.ci_high),
                     format_double(pooled.rho2), pooled.method_tag});
        emit("meta_" + stem + ".csv", out);

        out = join({"label", "trial_id", "ae_id", "theta", "sigma2", "comparator_value",
                    "benchmark_value"});
        for (const auto& r : selection.rows) {
          out += join({r.entry.label, r.entry.trial_id, std::to_string(r.ae_id),
                       format_double(r.entry.theta), format_double(r.entry.sigma2),
                       format_double(r.comparator_value), format_double(r.benchmark_value)});
        }
        emit("entries_" + stem + ".csv", out);

        std::vector<double> bench, comp;
        for (const auto& r : selection.rows) {
          bench.push_back(r.benchmark_value);
          comp.push_back(r.comparator_value);
        }
        const auto ba = meta::bland_altman_table(bench, comp);
        out = join({"label", "benchmark", "difference"});
        for (std::size_t i = 0; i < ba.rows.size(); ++i) {
          out += join({selection.rows[i].entry.label, format_double(ba.rows[i].x),
                       format_double(ba.rows[i].y)});
        }
        emit("blandaltman_" + stem + ".csv", out);
        out = join({"n", "mean_difference", "sd_difference", "lower_limit", "upper_limit"});
        out += join({std::to_string(ba.rows.size()), format_double(ba.mean_difference),
                     format_double(ba.sd_difference), format_double(ba.lower_limit),
                     format_double(ba.upper_limit)});
        emit("blandaltman_limits_" + stem + ".csv", out);
        if (options.svg) {
          emit("blandaltman_" + stem + ".svg", meta::render_bland_altman_svg(ba, pair));
        }

        if (!pair.ends_with("/Cox")) {
          std::vector<meta::FrequencyCategory> cb, cc;
          for (const auto& r : selection.rows) {
            cb.push_back(meta::frequency_category(r.benchmark_value));
            cc.push_back(meta::frequency_category(r.comparator_value));
          }
          const auto shift = meta::category_shift_table(cb, cc);
          std::vector<std::string> header{"benchmark_category"};
          for (std::size_t j = 0; j < meta::kCategoryCount; ++j) {
            header.emplace_back(to_string(static_cast<meta::FrequencyCategory>(j)));
          }
          out = join(header);
          for (std::size_t i = 0; i < meta::kCategoryCount; ++i) {
            std::vector<std::string> row{
                std::string(to_string(static_cast<meta::FrequencyCategory>(i)))};
            for (std::size_t j = 0; j < meta::kCategoryCount; ++j) {
              row.push_back(std::to_string(shift[i][j]));
            }
            out += join(row);
          }
          emit("categories_" + stem + ".csv", out);
        }

        std::vector<meta::PrecisionPair> pairs;
        for (const auto& r : selection.rows) {
          pairs.push_back({r.benchmark_se, r.comparator_se, r.benchmark_value,
                           r.comparator_value});
        }
        const auto precision = meta::precision_ratio_table(pairs, options.bias_threshold);
        out = join({"label", "benchmark_se", "comparator_se", "ratio", "status"});
        for (const auto& row : precision.rows) {
          const auto& r = selection.rows[row.index];
          out += join({r.entry.label, format_double(r.benchmark_se),
                       format_double(r.comparator_se),
                       row.ratio ? format_double(*row.ratio) : "NA", row.status});
        }
        emit("precision_" + stem + ".csv", out);

        if (!options.moderators.empty()) {
          meta::RegressionResult reg;
          try {
            reg = meta::meta_regression(entries, options.moderators, options.method);
          } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("meta-regression: ") + e.what());
          }
          out = join({"term", "coefficient", "se", "rho2", "k_used", "method"});
          for (std::size_t i = 0; i < reg.terms.size(); ++i) {
            out += join({reg.terms[i], format_double(reg.coefficients[i]),
                         format_double(reg.standard_errors[i]), format_double(reg.rho2),
                         std::to_string(reg.k_used), reg.method_tag});
          }
          emit("metareg_" + stem + ".csv", out);
        }
        log << stem << ": K=" << pooled.k_used << " theta=" << format_double(pooled.theta)
            << " rho2=" << format_double(pooled.rho2) << "\n";
      }
    }
  }
  return written;
}

std::vector<fs::path> run_simulate(const SimulateOptions& options, std::ostream& out,
                                   std::ostream& log) {
  SimConfig config = read_sim_config(options.config);
  if (options.seed) config.seed = *options.seed;
  if (options.savvy_id) config.savvy_id = *options.savvy_id;
  std::string content;
  if (options.bias_replications > 0) {
    Scheme scheme;
    try {
      scheme = parse_scheme(options.scheme);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
    const auto table = bias_benchmark(config, options.bias_replications, scheme,
                                      Execution::Parallel, options.threads);
    content = join({"method", "group", "tau_label", "mean_bias", "mc_se", "n_valid"});
    for (const auto& r : table) {
      content += join({std::string(to_string(r.method)), std::string(to_string(r.group)),
                       r.tau_label, format_double(r.mean_bias), format_double(r.mc_se),
                       std::to_string(r.n_valid)});
    }
  } else {
    content = serialize_trial_csv(simulate_trial(config));
  }
  if (options.out.empty()) {
    out << content;
    return {};
  }
  write_file(options.out, content);
  log << "wrote " << options.out.string() << "\n";
  return {options.out};
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ValidationError*>(&error)) return 2;
  if (dynamic_cast<const SchemaError*>(&error)) return 3;
  if (dynamic_cast<const NumericError*>(&error)) return 4;
  if (dynamic_cast<const std::invalid_argument*>(&error)) return 2;
  return 1;
}

}  // namespace savvy::cli
