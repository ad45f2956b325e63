// fedar: run experiments, sweeps and print the built-in twelve-robot config.
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "fedar/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Trust-based federated learning simulator"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string vary;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", config, "Experiment config (YAML or JSON)")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out-dir", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("config", config, "Experiment config (YAML or JSON)")->required();
  sweep->add_option("--vary", vary, "batch_epochs or stragglers")
      ->required()
      ->check(CLI::IsMember({"batch_epochs", "stragglers"}));
  sweep->add_option("--seed", seed, "Override the config seed");
  sweep->add_option("--out-dir", out_dir, "Output directory");

  app.add_subcommand("table2", "Print the twelve-robot federation config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fedar::cli::kExitUsage;
  }

  if (run->parsed()) return fedar::cli::cmd_run(config, seed, out_dir, std::cerr);
  if (sweep->parsed()) {
    return fedar::cli::cmd_sweep(config, vary, seed, out_dir, std::cerr);
  }
  return fedar::cli::cmd_table2(std::cout);
}
