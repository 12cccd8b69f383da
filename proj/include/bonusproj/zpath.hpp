#ifndef BONUSPROJ_ZPATH_HPP
#define BONUSPROJ_ZPATH_HPP

#include <cstdint>

#include "bonusproj/projection.hpp"

namespace bonusproj {

// Frozen per-step source coefficients, one row per state, one column per step.
struct ControlSet {
  std::vector<std::vector<double>> cp, cr, f;
};

ControlSet controls_from_projection(const ProjectionResult& res);

struct OracleEstimate {
  double mean = 0.0;
  double se = 0.0;
};

struct OracleOptions {
  int paths = 200000;
  std::uint64_t seed = 777;
  int workers = 0;
  int block = 1024;  // paths per reduction block; fixed blocks keep results
                     // independent of the worker count
};

struct OracleResult {
  std::vector<double> years;                    // integer-year recording times
  std::vector<std::vector<OracleEstimate>> pq;  // [state][year index]
  OracleEstimate vb;                            // discounted bonus payments
  OracleEstimate predetermined;                 // discounted predetermined payments
  std::vector<OracleEstimate> guaranteed_buckets;      // undiscounted, per year
  std::vector<OracleEstimate> predetermined_buckets;   // undiscounted, per year
};

// Brute-force jump-path check of one scenario: simulates Z with per-step
// competing-risks draws, carries the conversion factor rho(tau) and the
// pathwise dividend account Q under the frozen controls, and accumulates the
// payments the model prices in aggregate.
OracleResult z_path_oracle(const Precomputed& pre, const Scenario& sc, const ControlSet& ctrl,
                           const OracleOptions& opt);

}  // namespace bonusproj

#endif
