#include <CLI11.hpp>
#include <omp.h>

#include <iostream>
#include <string>

#include "ecoevo/acceptance.hpp"
#include "ecoevo/experiment.hpp"
#include "ecoevo/scenario.hpp"

int main(int argc, char** argv) {
  using namespace ecoevo;
  CLI::App app{"Trait-distribution simulator for the infinitesimal model"};
  app.require_subcommand(1);

  CommandOptions opt;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* c = cmd->add_option("--config", opt.config, "scenario file or bundled scenario name");
    if (needs_config) c->required();
    cmd->add_option("--out", opt.out, "output directory");
    cmd->add_flag("--force", opt.force, "run even if the hypothesis audit fails");
    cmd->add_option("--threads", opt.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", seed, "override the scenario seed");
  };

  auto* run = app.add_subcommand("run", "simulate one scenario and write CSV, plot script and manifest");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "run a scenario over its epsilon list and fit log-log slopes");
  add_common(sweep, true);
  auto* audit = app.add_subcommand("audit", "check model hypotheses without simulating");
  add_common(audit, true);
  auto* acceptance = app.add_subcommand("acceptance", "run the acceptance suite");
  bool list = false;
  std::vector<int> only;
  acceptance->add_flag("--list", list, "print the criteria without running them");
  acceptance->add_option("--seed", seed, "random seed for generated test densities");
  acceptance->add_option("--only", only, "run only these criterion ids");
  acceptance->add_option("--threads", opt.threads, "OpenMP threads")->check(CLI::NonNegativeNumber);
  auto* list_cmd = app.add_subcommand("list-scenarios", "list bundled scenario files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (auto* sub : {run, sweep, audit, acceptance}) {
    if (sub->parsed() && sub->count("--seed") > 0) opt.seed = seed;
  }

  if (run->parsed()) return cmd_run(opt);
  if (sweep->parsed()) return cmd_sweep(opt);
  if (audit->parsed()) return cmd_audit(opt);
  if (list_cmd->parsed()) {
    for (const auto& name : list_scenarios()) std::cout << name << '\n';
    return kExitOk;
  }
  if (list) {
    for (const auto& c : list_criteria()) {
      std::cout << c.id << '\t' << c.name << "\t(limit " << c.time_limit << " s)\n";
    }
    return kExitOk;
  }
  AcceptanceOptions ao;
  if (opt.seed) ao.seed = *opt.seed;
  ao.only = only;
  if (opt.threads > 0) omp_set_num_threads(opt.threads);
  const auto results = run_acceptance(ao);
  std::cout << format_results(results);
  for (const auto& r : results) {
    if (!r.passed) return kExitAcceptance;
  }
  return kExitOk;
}
