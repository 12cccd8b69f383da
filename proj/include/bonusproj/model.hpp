#ifndef BONUSPROJ_MODEL_HPP
#define BONUSPROJ_MODEL_HPP

#include <map>
#include <utility>
#include <vector>

#include "bonusproj/grids.hpp"

namespace bonusproj {

// State space with J+1 premium-paying states 0..J (J = surrender) and a
// free-policy copy J+1..2J+1 of each (2J+1 = surrender as free policy).
// The copy of premium state j is J+1+j.
struct StateModel {
  int J = 3;

  int states() const { return 2 * J + 2; }
  int surrender() const { return J; }
  int fp_start() const { return J + 1; }
  int fp_surrender() const { return 2 * J + 1; }
  int fp(int j) const { return J + 1 + j; }       // free-policy copy of premium state j
  int base(int k) const { return k - (J + 1); }   // premium counterpart of free state k
  bool premium_state(int k) const { return k >= 0 && k <= J; }
  bool free_state(int k) const { return k > J && k <= fp_surrender(); }
};

// Dense set of transition intensities; an empty TimeFn means the transition
// is structurally absent.
class TransitionRateSet {
 public:
  TransitionRateSet() = default;
  explicit TransitionRateSet(int dim) : dim_(dim), mu_(dim * dim) {}

  int dim() const { return dim_; }
  void set(int from, int to, TimeFn mu) { mu_[from * dim_ + to] = std::move(mu); }
  const TimeFn& at(int from, int to) const { return mu_[from * dim_ + to]; }
  bool has(int from, int to) const { return !mu_[from * dim_ + to].empty(); }

  double rate(int from, int to, double t) const { return at(from, to)(t); }
  double rate(int from, int to, double t, double ref) const { return at(from, to)(t, ref); }

  std::vector<std::pair<int, int>> support() const;

  // Full generator at t: out[j*dim+k] = mu_jk, diagonal = -sum of exits.
  void generator(double t, double ref, double* out) const;

 private:
  int dim_ = 0;
  std::vector<TimeFn> mu_;
};

// Per-step stage samples of the generator on a uniform grid: entry m holds
// the matrix at t_m, t_m + h/2 and t_{m+1}, each evaluated with the branch of
// the step interior, so RK4 stages landing on a payment or rate cutoff see
// consistent one-sided values.
struct GeneratorTable {
  int dim = 0;
  double h = 0.0;
  std::vector<std::vector<double>> left, mid, right;  // [step][dim*dim]
};

GeneratorTable tabulate_generator(const TransitionRateSet& rates, const TimeGrid& g);

struct TechnicalBasis {
  TimeFn interest;          // r*(t)
  TransitionRateSet rates;  // mirrored across the free-policy copy, no surrender
                            // and no free-policy conversion
};

// Payment functions of the product.  Sojourn and unit-bonus sojourn rates are
// stored for premium states (the surrender state pays nothing while occupied);
// the free-policy copy reuses them with positive parts and, for the
// predetermined stream, the rho(tau) scale carried by the modified occupation
// probabilities.  The surrender lumps are wired to the solved technical
// reserves after the Thiele pass.
struct PaymentSpec {
  int J = 3;
  std::vector<TimeFn> sojourn;        // b_j, j = 0..J-1
  std::vector<TimeFn> bonus_sojourn;  // unit-bonus b_j, j = 0..J-1
  std::map<std::pair<int, int>, TimeFn> lump;        // b_jk within premium states, no surrender
  std::map<std::pair<int, int>, TimeFn> bonus_lump;  // unit-bonus b_jk, same support
  TimeFn surrender_lump;        // payment on 0 -> J, set to the technical reserve
  TimeFn bonus_surrender_lump;  // payment on 0 -> J for the unit-bonus stream

  const TimeFn& sojourn_at(int j) const;
  const TimeFn& bonus_sojourn_at(int j) const;
};

}  // namespace bonusproj

#endif
