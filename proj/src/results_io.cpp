#include "savvy/results_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "savvy/errors.hpp"

namespace savvy {

namespace {

using ojson = nlohmann::ordered_json;

ojson number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ojson number(const std::optional<double>& v) { return v ? number(*v) : ojson(nullptr); }

std::string status_label(const std::optional<Status>& s) {
  return s ? std::string(to_string(*s)) : "all";
}

std::string group_label(const std::optional<Group>& g) {
  return g ? std::string(to_string(*g)) : "overall";
}

ojson followup_json(const FollowUpGrid& grid) {
  ojson f;
  f["tau_A"] = grid.tau_A;
  f["tau_B"] = grid.tau_B;
  f["tau"] = grid.tau_min;
  for (const auto& q : grid.quantiles) {
    const auto key = "tau_p" + std::to_string(static_cast<int>(std::lround(q.p * 100)));
    f[key] = {{"p", q.p}, {"tau_A", q.tau_A}, {"tau_B", q.tau_B}, {"tau", q.tau}};
  }
  ojson rules = ojson::array();
  for (const auto& r : grid.rules) {
    rules.push_back({{"label", r.label}, {"tau_A", r.tau_A}, {"tau_B", r.tau_B}});
  }
  f["rules"] = rules;
  return f;
}

ojson descriptives_json(const DescriptiveSummary& d) {
  ojson cells = ojson::array();
  for (const auto& c : d.cells) {
    cells.push_back({{"status", status_label(c.status)},
                     {"group", group_label(c.group)},
                     {"count", c.count},
                     {"mean", number(c.mean)},
                     {"median", number(c.median)},
                     {"min", number(c.min)},
                     {"max", number(c.max)}});
  }
  return cells;
}

ojson estimate_json(const Estimate& e) {
  return {{"method", to_string(e.method)},
          {"scheme", to_string(e.scheme)},
          {"target", to_string(e.target)},
          {"group", to_string(e.group)},
          {"tau_label", e.tau_label},
          {"tau_days", number(e.tau)},
          {"value", number(e.value)},
          {"variance", number(e.variance)},
          {"variance_source", to_string(e.variance_source)},
          {"degenerate", e.degenerate}};
}

ojson comparison_json(const ComparisonResult& c) {
  return {{"measure", to_string(c.measure)},
          {"method", to_string(c.method)},
          {"target", to_string(c.target)},
          {"tau_label", c.tau_label},
          {"estimate", number(c.estimate)},
          {"variance", number(c.variance)},
          {"ci_low", number(c.ci_low)},
          {"ci_high", number(c.ci_high)},
          {"degenerate", c.degenerate}};
}

ojson hazard_json(const HazardRatioResult& h) {
  ojson j = {{"kind", to_string(h.kind)},
             {"target", to_string(h.target)},
             {"scheme", to_string(h.scheme)},
             {"tau_label", h.tau_label.empty() ? ojson(nullptr) : ojson(h.tau_label)},
             {"tau_days", number(h.tau)},
             {"log_hr", number(h.log_hr)},
             {"var_log_hr", number(h.var_log_hr)},
             {"ci_low", number(h.ci_low)},
             {"ci_high", number(h.ci_high)},
             {"converged", h.converged},
             {"degenerate", h.degenerate}};
  if (!h.diagnostic.empty()) j["diagnostic"] = h.diagnostic;
  return j;
}

ojson bootstrap_json(const BootstrapResult& b) {
  return {{"statistic_id", b.statistic_id},
          {"variance", b.unstable() ? ojson(nullptr) : number(b.variance)},
          {"n_valid", b.n_valid},
          {"n_degenerate", b.n_degenerate},
          {"B", b.replicates},
          {"seed", b.seed},
          {"unstable", b.unstable()}};
}

ojson log_ratio_json(const LogRatioEntry& e) {
  ojson mods = ojson::object();
  for (const auto& [k, v] : e.moderators) mods[k] = number(v);
  return {{"pair", e.pair},
          {"statistic_id", e.statistic_id},
          {"scheme", to_string(e.scheme)},
          {"target", to_string(e.target)},
          {"group", e.group ? ojson(std::string(to_string(*e.group))) : ojson(nullptr)},
          {"tau_label", e.tau_label},
          {"theta", number(e.theta)},
          {"sigma2", e.bootstrap.unstable() ? ojson(nullptr) : number(e.bootstrap.variance)},
          {"n_valid", e.bootstrap.n_valid},
          {"n_degenerate", e.bootstrap.n_degenerate},
          {"B", e.bootstrap.replicates},
          {"unstable", e.bootstrap.unstable()},
          {"comparator_value", number(e.comparator_value)},
          {"benchmark_value", number(e.benchmark_value)},
          {"comparator_se", number(e.comparator_se)},
          {"benchmark_se", number(e.benchmark_se)},
          {"moderators", mods}};
}

}  // namespace

nlohmann::ordered_json results_to_json(const TrialResultTable& table) {
  ojson doc;
  doc["format_version"] = kFormatVersion;
  doc["savvy_id"] = table.savvy_id;
  doc["z_975"] = kZ975;
  ojson rules = ojson::array();
  for (auto label : kRuleLabels) rules.push_back(std::string(label));
  doc["settings"] = {{"bootstrap_replicates", table.options.bootstrap.replicates},
                     {"seed", table.options.bootstrap.master_seed},
                     {"stratified", table.options.bootstrap.stratified},
                     {"frozen_tau", table.options.bootstrap.frozen_tau},
                     {"continuity_correction", table.options.hazard.continuity_correction},
                     {"cox_horizon", "tau"},
                     {"cox_ties", "breslow"},
                     {"quantile_rule", "smallest observed time t with F(t) >= p"},
                     {"follow_up_rules", rules}};
  doc["input_rows"] = table.input_rows;
  ojson exclusions = ojson::object();
  for (const auto& [reason, count] : table.exclusions_by_reason) exclusions[reason] = count;
  doc["exclusions"] = exclusions;

  ojson aes = ojson::array();
  for (const auto& ae : table.aes) {
    ojson a;
    a["ae_id"] = ae.ae_id;
    a["n_A"] = ae.n_A;
    a["n_B"] = ae.n_B;
    ojson schemes = ojson::array();
    for (const auto& s : ae.schemes) {
      ojson sj;
      sj["scheme"] = to_string(s.scheme);
      sj["followup"] = followup_json(s.followup);
      sj["descriptives"] = descriptives_json(s.descriptives);
      ojson est = ojson::array();
      for (const auto& e : s.estimates) est.push_back(estimate_json(e));
      sj["estimates"] = est;
      ojson cmp = ojson::array();
      for (const auto& c : s.comparisons) cmp.push_back(comparison_json(c));
      sj["comparisons"] = cmp;
      ojson hz = ojson::array();
      for (const auto& h : s.hazard_ratios) hz.push_back(hazard_json(h));
      sj["hazard_ratios"] = hz;
      schemes.push_back(std::move(sj));
    }
    a["schemes"] = schemes;
    ojson boot = ojson::array();
    for (const auto& b : ae.bootstrap) boot.push_back(bootstrap_json(b));
    a["bootstrap"] = boot;
    ojson ratios = ojson::array();
    for (const auto& r : ae.log_ratios) ratios.push_back(log_ratio_json(r));
    a["log_ratios"] = ratios;
    aes.push_back(std::move(a));
  }
  doc["aes"] = aes;
  return doc;
}

std::string write_results_json(const TrialResultTable& table) {
  return results_to_json(table).dump(2) + "\n";
}

std::vector<ResultsFile> load_results(const std::vector<std::filesystem::path>& files) {
  std::vector<ResultsFile> out;
  std::vector<std::string> offending;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      offending.push_back(path.string() + " (unreadable)");
      continue;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto doc = nlohmann::json::parse(buffer.str(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      offending.push_back(path.string() + " (not a JSON object)");
      continue;
    }
    const auto version = doc.find("format_version");
    if (version == doc.end() || !version->is_number_integer() ||
        version->get<int>() != kFormatVersion) {
      offending.push_back(path.string() + " (format_version " +
                          (version == doc.end() ? std::string("missing") : version->dump()) +
                          ", expected " + std::to_string(kFormatVersion) + ")");
      continue;
    }
    out.push_back({path, std::move(doc)});
  }
  if (!offending.empty()) {
    std::string message = "incompatible result files:";
    for (const auto& o : offending) message += "\n  " + o;
    throw SchemaError(message);
  }
  return out;
}

std::vector<ResultsFile> load_results(const std::filesystem::path& directory) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return load_results(files);
}

meta::MetaInput Selection::entries() const {
  meta::MetaInput input;
  for (const auto& r : rows) input.push_back(r.entry);
  return input;
}

namespace {

double read_number(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) return std::numeric_limits<double>::quiet_NaN();
  return it->get<double>();
}

}  // namespace

Selection select_log_ratios(const std::vector<ResultsFile>& files, const MetaSelector& selector) {
  Selection selection;
  const bool hazard_pair = selector.pair.ends_with("/Cox");
  const std::string scheme(to_string(selector.scheme));
  const std::string target(to_string(selector.target));
  for (const auto& file : files) {
    const auto& doc = file.document;
    const auto savvy_id = doc.value("savvy_id", std::string());
    for (const auto& ae : doc.at("aes")) {
      const int ae_id = ae.at("ae_id").get<int>();
      for (const auto& r : ae.at("log_ratios")) {
        if (r.at("pair") != selector.pair || r.at("scheme") != scheme ||
            r.at("tau_label") != selector.tau_label || r.at("target") != target) {
          continue;
        }
        if (!hazard_pair && selector.group &&
            (r.at("group").is_null() || r.at("group") != to_string(*selector.group))) {
          continue;
        }
        const std::string label = savvy_id + ":AE" + std::to_string(ae_id);
        const double theta = read_number(r, "theta");
        const double sigma2 = read_number(r, "sigma2");
        if (!std::isfinite(theta)) {
          selection.skipped.push_back(label + ": undefined log-ratio");
          continue;
        }
        if (!std::isfinite(sigma2) || r.value("unstable", false)) {
          selection.skipped.push_back(label + ": unstable bootstrap variance");
          continue;
        }
        const auto degenerate = r.value("n_degenerate", std::size_t{0});
        const auto replicates = r.value("B", std::size_t{0});
        if (10 * degenerate > replicates) {
          selection.skipped.push_back(label + ": " + std::to_string(degenerate) + " of " +
                                      std::to_string(replicates) +
                                      " bootstrap replicates degenerate");
          continue;
        }
        SelectedRatio row;
        row.entry.theta = theta;
        row.entry.sigma2 = sigma2;
        row.entry.trial_id = savvy_id;
        row.entry.label = label;
        for (const auto& [k, v] : r.at("moderators").items()) {
          row.entry.moderators[k] =
              v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN();
        }
        row.ae_id = ae_id;
        row.comparator_value = read_number(r, "comparator_value");
        row.benchmark_value = read_number(r, "benchmark_value");
        row.comparator_se = read_number(r, "comparator_se");
        row.benchmark_se = read_number(r, "benchmark_se");
        selection.rows.push_back(std::move(row));
      }
    }
  }
  return selection;
}

}  // namespace savvy
