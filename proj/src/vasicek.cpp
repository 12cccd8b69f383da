#include "bonusproj/vasicek.hpp"

#include <cmath>
#include <random>

namespace bonusproj {

double vasicek_B(const VasicekParams& par, double lag) {
  if (par.alpha < 1e-12) return lag;
  return -std::expm1(-par.alpha * lag) / par.alpha;
}

double vasicek_logA(const VasicekParams& par, double lag) {
  const double B = vasicek_B(par, lag);
  const double a = par.alpha, s2 = par.sigma * par.sigma;
  return (par.theta() - s2 / (2.0 * a * a)) * (B - lag) - s2 * B * B / (4.0 * a);
}

double bond_price(const VasicekParams& par, double lag, double r) {
  return std::exp(vasicek_logA(par, lag) - vasicek_B(par, lag) * r);
}

double forward_rate(const VasicekParams& par, double lag, double r) {
  const double B = vasicek_B(par, lag);
  const double th = par.theta();
  return th + (r - th) * std::exp(-par.alpha * lag) - 0.5 * par.sigma * par.sigma * B * B;
}

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t scenario_seed(uint64_t seed, uint64_t index) {
  uint64_t s = seed ^ (0x2545f4914f6cdd1dULL * (index + 1));
  const uint64_t a = splitmix64(s);
  const uint64_t b = splitmix64(s);
  return a ^ (b >> 17);
}

Scenario simulate_scenario(const VasicekParams& par, const TimeGrid& grid, uint64_t seed,
                           uint64_t index) {
  Scenario sc;
  sc.grid = grid;
  sc.index = index;
  sc.r.resize(grid.steps + 1);
  sc.D.resize(grid.steps + 1);
  sc.S1.resize(grid.steps + 1);

  std::mt19937_64 eng(scenario_seed(seed, index));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double h = grid.h;
  const double vol = par.sigma * std::sqrt(h);

  sc.r[0] = par.r0;
  sc.D[0] = 1.0;
  double integral = 0.0;
  for (int m = 0; m < grid.steps; ++m) {
    const double r = sc.r[m];
    sc.r[m + 1] = r + (par.beta - par.alpha * r) * h + vol * gauss(eng);
    integral += 0.5 * h * (r + sc.r[m + 1]);
    sc.D[m + 1] = std::exp(-integral);
  }
  for (int m = 0; m <= grid.steps; ++m)
    sc.S1[m] = bond_price(par, grid.horizon - grid.node(m), sc.r[m]);
  return sc;
}

}  // namespace bonusproj
