#ifndef BONUSPROJ_CURVETABLES_HPP
#define BONUSPROJ_CURVETABLES_HPP

#include <atomic>

#include "bonusproj/cashflows.hpp"
#include "bonusproj/vasicek.hpp"

namespace bonusproj {

// Chebyshev-Gauss interpolation basis on a short-rate interval.
struct ChebBasis {
  int n = 16;
  double lo = 0.0;
  double hi = 0.0;

  std::vector<double> nodes() const;
  // Coefficients a_k with f(x) ~ sum a_k T_k(x); a_0 already halved.
  std::vector<double> to_coeffs(const std::vector<double>& values) const;
  double eval(const double* coeffs, double r) const;
};

ChebBasis short_rate_basis(const VasicekParams& par, int n = 16);

// Bond-discounted values of the payment densities as functions of the current
// short rate: for every fine node t the predetermined curve, and for every
// anchor the per-state unit-bonus curves, each with a duration-weighted
// variant for the hedge ratio.  The bond-price kernel depends on the lag s - t
// only, so one lag table serves every node; values are stored as Chebyshev
// coefficients and read back with Clenshaw sums, linearly interpolated between
// anchors.  Short rates outside the basis range are clamped and counted.
class CurveTables {
 public:
  CurveTables(const VasicekParams& par, const TimeGrid& fine, const std::vector<double>& predet,
              const UnitBonusGrid& bonus, int cheb_n = 16);

  int states() const { return dim_; }
  double predet_value(int fine_node, double r) const;
  double predet_psi(int fine_node, double r) const;
  void bonus_values(double t, double r, double* out) const;  // out[state]
  void bonus_psi(double t, double r, double* out) const;
  double bonus_value_at_anchor(int anchor, int state, double r) const;

  const ChebBasis& basis() const { return basis_; }
  long clamp_events() const { return clamps_.load(); }

 private:
  ChebBasis basis_;
  TimeGrid fine_;
  int dim_ = 0;
  int stride_ = 1;
  int n_anchors_ = 0;
  std::vector<double> predet_c_, predet_psi_c_;  // [node][coeff]
  std::vector<double> bonus_c_, bonus_psi_c_;    // [anchor][state][coeff]
  mutable std::atomic<long> clamps_{0};

  double clamped(double r) const;
  void eval_anchor_lerp(const std::vector<double>& table, double t, double r, double* out) const;
};

}  // namespace bonusproj

#endif
