#include <CLI11.hpp>

#include "commands.hpp"
#include "gvs/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Strain-based simulation and POD reduction of soft and hybrid robots"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  gvs::app::RunOptions opts;
  opts.jobs = gvs::default_jobs();

  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
  auto* out_opt = app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--config", config, "scenario config file (JSON)");
  app.add_option("--jobs", opts.jobs, "maximum worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", opts.quiet, "suppress progress messages");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "run the configured statics sweep or dynamic simulation"},
      {"reduce", "POD of snapshot files (default: <out>/snapshots.gvssnap)"},
      {"compare", "ROM vs HOM tip error for each n (default: <out>/modes.gvsmodes)"},
      {"estimate", "marker-based shape estimation (default: <out>/markers.csv)"},
      {"bench", "median HOM and ROM solve times"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("inputs", opts.inputs, "input files");
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) opts.seed = seed;
  if (*out_opt) opts.out = out;
  return gvs::app::run(app.get_subcommands().front()->get_name(), config, opts);
}
