#include <string>

#include "CLI11.hpp"
#include "murraynet/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "murraynet: energy-optimal transport networks, batch solvers and "
      "checkers"};
  murraynet::RunConfig cfg;
  app.add_option("command", cfg.command,
                 "one of: solve | optimize | check-murray | solve-continuum | "
                 "check-continuum-murray | solve-phenom | check-phenom-murray "
                 "| selftest")
      ->required();
  app.add_option("--config", cfg.config_path, "TOML run configuration");
  app.add_option("--out", cfg.out_dir, "output directory")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "seed for randomized self-tests");
  app.add_flag("--quiet", cfg.quiet, "suppress informational stdout");
  CLI11_PARSE(app, argc, argv);
  return murraynet::run(cfg);
}
