#ifndef BONUSPROJ_VALUATION_HPP
#define BONUSPROJ_VALUATION_HPP

#include <cstdint>

#include "bonusproj/projection.hpp"

namespace bonusproj {

// Value of the predetermined payments at time zero, off the initial bond curve.
double value_predetermined(const Precomputed& pre);

struct MonteCarloStats {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n)
  int n = 0;
};

MonteCarloStats mc_stats(const std::vector<double>& samples);

struct ScenarioEstimate {
  double vb_main = 0.0;
  double vb_rm2 = 0.0;
  double final_DU = 0.0;
  double max_agg_err = 0.0;
  double min_pq = 0.0;
};

struct McOptions {
  int scenarios = 1000;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 picks the hardware count
};

struct McResult {
  std::vector<ScenarioEstimate> per_scenario;  // indexed by scenario, all workers agree
  MonteCarloStats vb;
  MonteCarloStats vb_rm2;
  MonteCarloStats balance;  // D(n) U(n)
  double max_agg_err = 0.0;
  double min_pq = 0.0;
};

McResult value_bonus_general(const Precomputed& pre, const GeneralStrategy& strategy,
                             const McOptions& opt);
McResult value_bonus_stateindep(const Precomputed& pre, const StateIndepStrategy& strategy,
                                const McOptions& opt);

struct DiscountCheckRow {
  double horizon = 0.0;
  double mean = 0.0;
  double se = 0.0;
  double analytic = 0.0;  // model bond price P(0, horizon)
};

// Sample mean of the simulated discount factor against the closed-form bond
// price, one row per requested horizon.
std::vector<DiscountCheckRow> discount_factor_check(const VasicekParams& esg, const TimeGrid& fine,
                                                    const std::vector<double>& horizons,
                                                    const McOptions& opt);

}  // namespace bonusproj

#endif
