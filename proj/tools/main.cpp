#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bonusproj/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Market valuation of with-profit bonus payments"};
  std::string config, mode;
  int scenarios = 0;
  double step = 0.0;
  std::uint64_t seed = 0;
  bonusproj::RunFlags flags;

  app.add_option("--config", config, "run configuration file")->required();
  app.add_option("--mode", mode, "general, state-independent or both")
      ->check(CLI::IsMember({"general", "state-independent", "both"}));
  app.add_option("--scenarios", scenarios, "number of financial scenarios");
  app.add_option("--step", step, "projection step size in years");
  app.add_option("--seed", seed, "scenario seed");
  app.add_flag("--export-paths", flags.export_paths, "write per-scenario CSVs for scenario 0");
  app.add_flag("--oracle", flags.run_oracle, "run the jump-path oracle on scenario 0");
  app.add_flag("--validate-only", flags.validate_only, "check the config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (app.count("--mode")) flags.mode = mode;
  if (app.count("--scenarios")) flags.scenarios = scenarios;
  if (app.count("--step")) flags.step = step;
  if (app.count("--seed")) flags.seed = seed;

  return bonusproj::run_cli(config, flags, std::cout, std::cerr);
}
