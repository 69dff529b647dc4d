#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "macgame/cli.hpp"

int main(int argc, char** argv) {
  using namespace macgame;
  CLI::App app{"Equilibrium analysis and simulation of 802.11 MAC contention games"};
  app.require_subcommand(1);

  cli::Options opts;
  std::string file;
  std::uint64_t seed = 0;
  std::string out_dir;

  auto common = [&](CLI::App* sub) {
    sub->add_option("file", file, "scenario file (JSON)")->required();
    sub->add_option("--seed", seed, "override the scenario seed");
    sub->add_option("--out", out_dir, "output directory");
  };

  auto* analyze = app.add_subcommand("analyze", "payoff matrix, equilibria and their classification");
  common(analyze);
  auto* simulate = app.add_subcommand("simulate", "run the CSMA/CA simulator");
  common(simulate);
  auto* sweep = app.add_subcommand("sweep", "evaluate the scenario over a parameter grid");
  common(sweep);
  std::vector<std::string> params;
  std::vector<double> from, to;
  std::vector<int> steps;
  std::string mode;
  sweep->add_option("--param", params, "dotted path of a numeric field; '*' matches every array element");
  sweep->add_option("--from", from, "first grid value, one per --param");
  sweep->add_option("--to", to, "last grid value, one per --param");
  sweep->add_option("--steps", steps, "grid points, one per --param");
  sweep->add_option("--mode", mode, "analyze, simulate or solo")
      ->check(CLI::IsMember({"analyze", "simulate", "solo"}));
  sweep->add_option("--threads", opts.threads, "worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kOk : cli::kValidationFailure;
  }

  for (auto* sub : {analyze, simulate, sweep}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--out")) opts.out_dir = out_dir;
  }

  if (sweep->parsed()) {
    if (from.size() != params.size() || to.size() != params.size() || steps.size() != params.size()) {
      std::cerr << "error: each --param needs one --from, --to and --steps\n";
      return cli::kValidationFailure;
    }
    for (std::size_t k = 0; k < params.size(); ++k)
      opts.axes.push_back({params[k], from[k], to[k], steps[k]});
    if (!mode.empty()) opts.sweep_mode = mode;
    return cli::cmd_sweep(file, opts, std::cout, std::cerr);
  }
  if (analyze->parsed()) return cli::cmd_analyze(file, opts, std::cout, std::cerr);
  return cli::cmd_simulate(file, opts, std::cout, std::cerr);
}
