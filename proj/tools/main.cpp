#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace savvy::cli;
  CLI::App app{"Adverse-event analyses under varying follow-up and competing events"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::size_t boot = 1000;
  int threads = 0;
  std::string out;
  app.add_option("--seed", seed, "Master seed for bootstrap or simulation");
  app.add_option("--boot", boot, "Bootstrap replicates")->check(CLI::Range(2, 10000000));
  app.add_option("--threads", threads, "Worker threads (0: OpenMP default)");
  app.add_option("--out", out, "Output directory (analyze, meta) or file (register, simulate)");

  RegisterOptions reg;
  auto* register_cmd = app.add_subcommand("register", "Assign SAVVY IDs in a registry sheet");
  register_cmd->fallthrough();
  register_cmd->add_option("--registry", reg.registry, "Registry CSV")->required();

  AnalyzeOptions analyze;
  bool frozen_tau = false, unstratified = false, continuity = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze one trial");
  analyze_cmd->fallthrough();
  analyze_cmd->add_option("--input", analyze.input, "Trial CSV")->required();
  analyze_cmd->add_option("--savvy-id", analyze.savvy_id, "SAVVY trial ID")->required();
  analyze_cmd->add_option("--experimental", analyze.experimental_label,
                          "Group label of the experimental arm")
      ->required();
  analyze_cmd->add_option("--registry", analyze.registry, "Registry CSV to check the ID against");
  analyze_cmd->add_flag("--frozen-tau", frozen_tau, "Keep the original follow-up grid in replicates");
  analyze_cmd->add_flag("--unstratified", unstratified, "Resample both arms together");
  analyze_cmd->add_flag("--continuity-correction", continuity,
                        "Add half an event when an arm has none (incidence density ratio)");

  MetaOptions meta;
  std::string method = "PM";
  auto* meta_cmd = app.add_subcommand("meta", "Meta-analyze aggregated result files");
  meta_cmd->fallthrough();
  meta_cmd->add_option("--results", meta.results, "Directory of result files")->required();
  meta_cmd->add_option("--pair", meta.pairs, "comparator/benchmark, e.g. IP/AalenJohansen");
  meta_cmd->add_option("--scheme", meta.schemes, "Competing-event scheme");
  meta_cmd->add_option("--tau", meta.taus, "Follow-up rule label");
  meta_cmd->add_option("--target", meta.target, "event or competing");
  meta_cmd->add_option("--group", meta.group, "Treatment arm A or B");
  meta_cmd->add_option("--moderators", meta.moderators, "Meta-regression moderators")
      ->delimiter(',');
  meta_cmd->add_option("--heterogeneity", method, "PM or DL")->check(CLI::IsMember({"PM", "DL"}));
  meta_cmd->add_option("--bias-threshold", meta.bias_threshold,
                       "Relative bias above which precision ratios are skipped");
  meta_cmd->add_flag("--svg", meta.svg, "Also write Bland-Altman SVG plots");

  SimulateOptions sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a trial from a config");
  simulate_cmd->fallthrough();
  simulate_cmd->add_option("--config", sim.config, "Simulation config JSON")->required();
  simulate_cmd->add_option("--savvy-id", sim.savvy_id, "Trial ID written into the dataset");
  simulate_cmd->add_option("--bias", sim.bias_replications,
                           "Write a bias table over this many simulated trials");
  simulate_cmd->add_option("--scheme", sim.scheme, "Scheme for the bias table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (register_cmd->parsed()) {
      reg.out = out;
      run_register(reg, std::cerr);
    } else if (analyze_cmd->parsed()) {
      analyze.out_dir = out.empty() ? "." : out;
      auto& b = analyze.analysis.bootstrap;
      b.replicates = boot;
      b.master_seed = seed;
      b.threads = threads;
      b.frozen_tau = frozen_tau;
      b.stratified = !unstratified;
      analyze.analysis.hazard.continuity_correction = continuity;
      run_analyze(analyze, std::cerr);
    } else if (meta_cmd->parsed()) {
      meta.out_dir = out.empty() ? "." : out;
      meta.method = method == "DL" ? savvy::meta::HeterogeneityMethod::DerSimonianLaird
                                   : savvy::meta::HeterogeneityMethod::PauleMandel;
      run_meta(meta, std::cerr);
    } else if (simulate_cmd->parsed()) {
      if (app.count("--seed") > 0) sim.seed = seed;
      sim.out = out;
      sim.threads = threads;
      run_simulate(sim, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
