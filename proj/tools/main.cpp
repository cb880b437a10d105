#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ptcure/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bayesian promotion time cure model for current status data"};
  app.require_subcommand(1);

  ptcure::CliOptions opts;
  std::size_t chains = 0, workers = 0;
  std::uint64_t seed = 0;

  for (const char* name : {"fit", "simulate", "study", "diagnose"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "JSON run configuration")->required();
    sub->add_option("--out", opts.out_dir, "output directory")->default_val("out");
    sub->add_option("--chains", chains, "number of chains (overrides sampler.chains)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "base seed (overrides sampler.seed and scenario.seed)");
    sub->add_option("--workers", workers, "threads for chains or replicates")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : ptcure::kExitValidation;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->count("--chains")) opts.overrides.chains = chains;
  if (sub->count("--seed")) opts.overrides.seed = seed;
  if (sub->count("--workers")) opts.overrides.workers = workers;
  return ptcure::run_command(sub->get_name(), opts, std::cout, std::cerr);
}
