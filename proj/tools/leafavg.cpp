#include <CLI11.hpp>

#include <iostream>

#include "leafavg/runner.hpp"
#include "leafavg/selftest.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Leaf averaging on sphere foliations: averages, basic generators, separation certificates"};
  app.require_subcommand(1, 1);

  leafavg::RunOptions opts;
  std::string config, out_dir = ".", generators;
  std::uint64_t seed = 0;
  double tol_rank = 0.0;

  for (const char* task : {"avg", "generators", "verify", "separate", "export"}) {
    auto* sub = app.add_subcommand(task);
    sub->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed, overrides the config");
    sub->add_option("--generators", generators, "generators.json from a previous run")->check(CLI::ExistingFile);
    sub->add_option("--tol-rank", tol_rank, "rank tolerance for floating pipelines");
  }
  auto* self = app.add_subcommand("selftest", "property suite over the bundled configs");
  std::string config_dir = LEAFAVG_CONFIG_DIR;
  self->add_option("--config", config_dir, "directory of configs");
  self->add_option("--tol-rank", tol_rank, "rank tolerance for the floating rank checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  auto* sub = app.get_subcommands().front();
  const std::string task = sub->get_name();

  if (task == "selftest") {
    leafavg::SelftestOptions so;
    so.config_dir = config_dir;
    if (sub->count("--tol-rank")) so.tol_rank = tol_rank;
    return static_cast<int>(leafavg::selftest(so));
  }
  opts.task = task;
  opts.config = config;
  opts.out_dir = out_dir;
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--generators")) opts.generators = generators;
  if (sub->count("--tol-rank")) opts.tol_rank = tol_rank;
  return static_cast<int>(leafavg::run(opts));
}
