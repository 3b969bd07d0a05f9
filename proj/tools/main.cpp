#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ergolab/error.hpp"
#include "runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ergolab: experiments on multiple ergodic averages"};
  app.require_subcommand(1);

  std::string run_config, validate_config;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  bool no_svg = false;

  auto* run = app.add_subcommand("run", "run an experiment and write its artifacts");
  run->add_option("config", run_config, "config file (JSON)")->required();
  run->add_option("--out", out, "output directory");
  run->add_option("--workers", workers, "worker threads (ERGOLAB_WORKERS overrides)");
  run->add_flag("--no-svg", no_svg, "skip SVG charts");

  auto* validate = app.add_subcommand("validate", "check a config and report derived sizes");
  validate->add_option("config", validate_config, "config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ergolab::cli::kInvalid;
  }

  if (validate->parsed()) return ergolab::cli::validate_command(validate_config, std::cout);

  ergolab::cli::RunOptions options;
  options.out = out;
  options.svg = !no_svg;
  try {
    options.workers = ergolab::cli::resolve_workers(workers);
  } catch (const ergolab::Error& e) {
    std::cerr << "ergolab: " << e.what() << "\n";
    return ergolab::cli::kInvalid;
  }
  return ergolab::cli::run_command(run_config, options, std::cout, std::cerr);
}
