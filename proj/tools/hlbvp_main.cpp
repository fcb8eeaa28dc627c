#include <iostream>

#include <CLI11.hpp>

#include "hlbvp/cli.hpp"

int main(int argc, char** argv) {
  using namespace hlbvp;

  CLI::App app{"hlbvp: shifted-kernel analysis and solver for multi-point "
               "boundary value problems on the half-line"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_path = "solution.csv";
  std::string mode_str;
  bool quiet = false;
  double perturb_k = 0.0;

  app.add_flag("--quiet", quiet, "suppress the human-readable report");
  app.add_option("--mode", mode_str, "override kernel mode: as_printed | derived");

  auto* analyze = app.add_subcommand("analyze", "kernel constants and diagnostics");
  analyze->fallthrough();
  analyze->add_option("--config", config_path, "problem config file")->required();

  auto* check = app.add_subcommand("check-existence", "radius inequality and hypothesis checks");
  check->fallthrough();
  check->add_option("--config", config_path, "problem config file")->required();

  auto* solve = app.add_subcommand("solve", "fixed-point iteration; writes a CSV solution");
  solve->fallthrough();
  solve->add_option("--config", config_path, "problem config file")->required();
  solve->add_option("--output", output_path, "CSV output path");

  auto* repro = app.add_subcommand("reproduce-example",
                                   "rerun the built-in worked example against its reference values");
  repro->fallthrough();
  repro->add_option("--perturb-k", perturb_k, "debug: offset added to the built-in k")
      ->group("");  // hidden

  CLI11_PARSE(app, argc, argv);

  cli::CommonFlags flags;
  flags.quiet = quiet;
  if (!mode_str.empty()) {
    if (mode_str == "as_printed")
      flags.mode_override = kernel::KernelMode::as_printed;
    else if (mode_str == "derived")
      flags.mode_override = kernel::KernelMode::derived;
    else {
      std::cerr << "error: --mode must be as_printed or derived\n";
      return cli::kExitConfig;
    }
  }

  return cli::run_guarded(
      [&]() -> int {
        if (repro->parsed()) return cli::cmd_reproduce_example(flags, std::cout, perturb_k);
        const auto setup = config::make_setup(config::load_config_file(config_path));
        if (analyze->parsed()) return cli::cmd_analyze(setup, flags, std::cout);
        if (check->parsed()) return cli::cmd_check_existence(setup, flags, std::cout);
        return cli::cmd_solve(setup, output_path, flags, std::cout);
      },
      std::cerr);
}
