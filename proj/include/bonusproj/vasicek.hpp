#ifndef BONUSPROJ_VASICEK_HPP
#define BONUSPROJ_VASICEK_HPP

#include <cstdint>
#include <vector>

#include "bonusproj/grids.hpp"

namespace bonusproj {

// Short rate dr = (beta - alpha r) dt + sigma dW under the pricing measure.
struct VasicekParams {
  double beta = 0.0;
  double alpha = 0.0;
  double sigma = 0.0;
  double r0 = 0.0;
  double theta() const { return beta / alpha; }
};

// (1 - exp(-alpha x)) / alpha, the bond-price lag slope.
double vasicek_B(const VasicekParams& par, double lag);
// log P(t, t + lag; r) = vasicek_logA(lag) - vasicek_B(lag) * r.
double vasicek_logA(const VasicekParams& par, double lag);
double bond_price(const VasicekParams& par, double lag, double r);
double forward_rate(const VasicekParams& par, double lag, double r);

uint64_t splitmix64(uint64_t& state);
uint64_t scenario_seed(uint64_t seed, uint64_t index);

// One simulated scenario on the fine grid: short rate (Euler), bank-account
// discount D(t) = exp(-int_0^t r) by trapezoid, and the horizon bond account
// S1(t) = P(t, horizon; r(t)).
struct Scenario {
  TimeGrid grid;
  uint64_t index = 0;
  std::vector<double> r;
  std::vector<double> D;
  std::vector<double> S1;
};

Scenario simulate_scenario(const VasicekParams& par, const TimeGrid& grid, uint64_t seed,
                           uint64_t index);

}  // namespace bonusproj

#endif
