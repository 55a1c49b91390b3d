#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "savvy/errors.hpp"
#include "support/fixtures.hpp"

using namespace savvy;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("savvy_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string sim_config(double beta, double gamma, int n) {
  return "{\"group_a\": {\"n\": " + std::to_string(n) + ", \"alpha\": 0.2, \"beta\": " +
         std::to_string(beta) + ", \"gamma\": " + std::to_string(gamma) +
         "}, \"group_b\": {\"n\": " + std::to_string(n) + ", \"alpha\": 0.1, \"beta\": " +
         std::to_string(beta) + ", \"gamma\": " + std::to_string(gamma) +
         "}, \"censoring\": {\"kind\": \"mixed\", \"admin_time\": 6, \"rate\": 0.05},"
         " \"ae_count\": 2}";
}

// Simulates k trials and analyzes each into dir/results.
fs::path analyzed_trials(const fs::path& dir, const std::string& config, int k) {
  spit(dir / "config.json", config);
  const auto results = dir / "results";
  fs::create_directories(results);
  std::ostringstream sink;
  for (int i = 1; i <= k; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "SAVVY-%04d", i);
    cli::SimulateOptions s;
    s.config = dir / "config.json";
    s.seed = 100 + i;
    s.savvy_id = id;
    s.out = dir / (std::string(id) + ".csv");
    cli::run_simulate(s, sink, sink);
    cli::AnalyzeOptions a;
    a.input = s.out;
    a.savvy_id = id;
    a.out_dir = results;
    a.analysis.bootstrap.replicates = 50;
    cli::run_analyze(a, sink);
  }
  return results;
}

}  // namespace

TEST_CASE("analyze writes an aggregated result document") {
  const auto dir = fresh_dir("analyze");
  auto obs = testing::f4_obs(Group::A);
  for (const auto& o : testing::f4_obs(Group::B)) obs.push_back(o);
  const auto csv = serialize_trial_csv(testing::make_trial(obs)) + "1,P99,A,-3,1\n";
  spit(dir / "f4.csv", csv);

  cli::AnalyzeOptions options;
  options.input = dir / "f4.csv";
  options.savvy_id = "SAVVY-0001";
  options.out_dir = dir;
  options.analysis.bootstrap.replicates = 30;
  std::ostringstream log;
  const auto written = cli::run_analyze(options, log);
  REQUIRE(written.size() == 2);
  CHECK(written[0] == dir / "SAVVY-0001.json");
  CHECK(written[1] == dir / "SAVVY-0001_exclusions.csv");
  const auto first = slurp(written[0]);
  CHECK(first.find("P1") == std::string::npos);
  CHECK(first.find("P99") == std::string::npos);
  CHECK(slurp(written[1]).find("negative event time") != std::string::npos);

  const auto doc = json::parse(first);
  CHECK(doc["exclusions"]["negative event time"] == 1);
  const auto& all_events = doc["aes"][0]["schemes"][0];
  CHECK(all_events["scheme"] == "AllEvents");
  bool found_aj = false;
  for (const auto& e : all_events["estimates"]) {
    if (e["method"] == "AalenJohansen" && e["target"] == "event" && e["group"] == "A" &&
        e["tau_label"] == "tau") {
      CHECK(e["value"].get<double>() == doctest::Approx(0.75).epsilon(1e-12));
      found_aj = true;
    }
  }
  CHECK(found_aj);
  std::map<std::string, std::size_t> counts;
  for (const auto& c : all_events["descriptives"]) {
    if (c["group"] == "A") counts[c["status"].get<std::string>()] = c["count"];
  }
  CHECK(counts["event"] == 2);
  CHECK(counts["competing"] == 1);
  CHECK(counts["censored"] == 1);

  cli::run_analyze(options, log);
  CHECK(slurp(written[0]) == first);
  fs::remove_all(dir);
}

TEST_CASE("analyze checks the registry") {
  const auto dir = fresh_dir("registry");
  spit(dir / "reg.csv",
       "unique_trial_id,indication,type_of_comparison,end_of_trial,"
       "max_followup_primary_endpoint,ae_id,max_followup_ae,seriousness,severity,soc,pt,"
       "special_interest_ae,hard_competing_events,soft_competing_events,savvy_id\n"
       "NCT01,x,y,z,1,1,1,a,b,c,d,e,f,g,NA\n");
  cli::RegisterOptions r;
  r.registry = dir / "reg.csv";
  std::ostringstream log;
  cli::run_register(r, log);
  CHECK(slurp(dir / "reg.csv").find("SAVVY-0001") != std::string::npos);

  spit(dir / "t.csv", serialize_trial_csv(testing::make_trial(
                          {{Group::A, 1, EventType::AE}, {Group::B, 2, EventType::Censored}})));
  cli::AnalyzeOptions a;
  a.input = dir / "t.csv";
  a.registry = dir / "reg.csv";
  a.savvy_id = "SAVVY-0002";
  a.out_dir = dir;
  a.analysis.bootstrap.replicates = 10;
  CHECK_THROWS_AS(cli::run_analyze(a, log), ValidationError);
  a.savvy_id = "../evil";
  CHECK_THROWS_AS(cli::run_analyze(a, log), ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("meta needs at least two trials") {
  const auto dir = fresh_dir("meta_k1");
  const auto results = analyzed_trials(dir, sim_config(0.1, 0.0, 40), 1);
  cli::MetaOptions m;
  m.results = results;
  m.out_dir = dir;
  std::ostringstream log;
  CHECK_THROWS_WITH_AS(cli::run_meta(m, log), doctest::Contains("K < 2"), ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("meta writes every table and reruns byte for byte") {
  const auto dir = fresh_dir("meta");
  const auto results = analyzed_trials(dir, sim_config(0.15, 0.0, 60), 3);
  cli::MetaOptions m;
  m.results = results;
  m.out_dir = dir / "meta";
  fs::create_directories(m.out_dir);
  m.moderators = {"ae_frequency"};
  m.svg = true;
  std::ostringstream log;
  const auto written = cli::run_meta(m, log);
  std::map<fs::path, std::string> first;
  for (const auto& p : written) first[p] = slurp(p);
  const std::string stem = "OneMinusKM_vs_AalenJohansen_AllEvents_tau";
  for (const auto& name : {"meta_", "entries_", "blandaltman_", "blandaltman_limits_",
                           "categories_", "precision_", "metareg_"}) {
    CHECK(fs::exists(m.out_dir / (name + stem + ".csv")));
  }
  CHECK(fs::exists(m.out_dir / ("blandaltman_" + stem + ".svg")));

  // No soft competing events: the two schemes coincide, so every log-ratio is
  // exactly zero with zero bootstrap variance.
  cli::MetaOptions same = m;
  same.pairs = {"AalenJohansen[DeathOnly]/AalenJohansen[AllEvents]"};
  same.moderators = {};
  cli::run_meta(same, log);
  const auto identity =
      slurp(m.out_dir / "meta_AalenJohansen[DeathOnly]_vs_AalenJohansen[AllEvents]_AllEvents_tau.csv");
  const auto row = identity.substr(identity.find('\n') + 1);
  CHECK(row.find(",0,0,0,0,0,") != std::string::npos);

  cli::run_meta(m, log);
  for (const auto& [p, text] : first) CHECK(slurp(p) == text);
  for (const auto& p : written) {
    CHECK(slurp(p).find("PAT-") == std::string::npos);
  }

  m.moderators = {"no_such_moderator"};
  CHECK_THROWS_AS(cli::run_meta(m, log), ValidationError);
  m.moderators = {};
  m.group = "C";
  CHECK_THROWS_AS(cli::run_meta(m, log), ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("simulate config parsing") {
  const auto c = cli::parse_sim_config(sim_config(0.1, 0.05, 30));
  CHECK(c.group_a.n == 30);
  CHECK(c.group_a.alpha == 0.2);
  CHECK(c.group_b.gamma == 0.05);
  CHECK(c.censoring.kind == CensoringKind::Mixed);
  CHECK(c.censoring.admin_time == 6);
  CHECK(c.ae_count == 2);
  CHECK_THROWS_AS(cli::parse_sim_config("[1,2]"), ValidationError);
  CHECK_THROWS_AS(cli::parse_sim_config("{\"group_a\": {\"n\": 3, \"alpha\": -1}}"),
                  ValidationError);
}

TEST_CASE("exit codes") {
  CHECK(cli::exit_code_for(ValidationError("x")) == 2);
  CHECK(cli::exit_code_for(SchemaError("x")) == 3);
  CHECK(cli::exit_code_for(NumericError("x")) == 4);
  CHECK(cli::exit_code_for(std::invalid_argument("x")) == 2);
  CHECK(cli::exit_code_for(std::runtime_error("x")) == 1);
}
