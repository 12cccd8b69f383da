#ifndef BONUSPROJ_RUNNER_HPP
#define BONUSPROJ_RUNNER_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "bonusproj/config.hpp"
#include "bonusproj/valuation.hpp"

namespace bonusproj {

struct RunFlags {
  std::optional<std::string> mode;
  std::optional<int> scenarios;
  std::optional<double> step;
  std::optional<std::uint64_t> seed;
  bool export_paths = false;
  bool run_oracle = false;
  bool validate_only = false;
};

struct RunOutcome {
  double premium = 0.0;
  bool premium_equivalence = false;
  double v_predetermined = 0.0;
  bool ran_general = false, ran_stateindep = false;
  McResult general, stateindep;
  std::shared_ptr<const Precomputed> pre;
};

// Precomputation, premium resolution and the scenario loop for a validated
// config; throws ConfigError / NumericError.
RunOutcome compute_run(const RunConfig& cfg);

// Full batch run: parse, validate, compute, write artifacts.
// Exit status: 0 success, 1 validation error, 2 numerical error.
int run_cli(const std::string& config_path, const RunFlags& flags, std::ostream& out,
            std::ostream& err);

}  // namespace bonusproj

#endif
