#ifndef BONUSPROJ_RESERVES_HPP
#define BONUSPROJ_RESERVES_HPP

#include <functional>

#include "bonusproj/model.hpp"

namespace bonusproj {

// State-wise technical reserves for the premium states 0..J-1, solved on a
// refinement of the projection grid so that downstream solvers find exact
// nodes at their RK4 stage times.
struct ReserveGrid {
  TimeGrid grid;
  std::vector<std::vector<double>> v;  // [state][node]

  double at(int j, double t) const { return lerp_nodes(v[j], grid, t); }
  double at_node(int j, int m) const { return v[j][m]; }
};

struct ThieleOptions {
  bool benefits_only = false;     // use positive parts of all payments
  int refine = 4;                 // sub-steps per projection step
  const std::vector<double>* terminal = nullptr;  // reserve at the horizon, default 0
};

// Backward Thiele sweep over the premium states excluding surrender.  The
// technical basis carries no surrender or free-policy transitions, so the
// system closes on states 0..J-1.
ReserveGrid solve_thiele(const StateModel& sm, const TechnicalBasis& basis,
                         const PaymentSpec& pay, const TimeGrid& fine,
                         const ThieleOptions& opt = {});

// Scalar premium rate that zeroes the state-0 reserve at time 0, found by
// bisection.  payments_at builds the payment set for a candidate rate.
double calibrate_premium(const StateModel& sm, const TechnicalBasis& basis,
                         const std::function<PaymentSpec(double)>& payments_at,
                         const TimeGrid& fine, int refine = 4, double tol = 1e-8);

// rho(t) = V_0(t) / V_0^+(t) on (0, n], with rho(0) = 1 by convention (the
// value only scales payments of contracts that start as free policies).
std::vector<double> free_policy_factor(const ReserveGrid& full, const ReserveGrid& benefit);

// Technical unit reserves extended from the solved premium states to the full
// state space: surrender states carry 0, free-policy states mirror their
// premium counterpart (benefits only for the predetermined stream, identical
// for the unit-bonus stream).
struct UnitReserves {
  StateModel model;
  ReserveGrid full;     // predetermined payments
  ReserveGrid benefit;  // benefits only
  ReserveGrid bonus;    // unit-bonus payments
  std::vector<double> rho;  // on full.grid nodes

  double rho_at(double t) const { return lerp_nodes(rho, full.grid, t); }

  // Predetermined-stream reserve; rho_tau scales free states when the caller
  // tracks a concrete conversion time (pass NaN to leave the weighting to the
  // modified occupation probabilities).
  double v_circ(int state, double t, double rho_tau) const;
  // Unit-bonus reserve, identical across the free-policy mirror.
  double v_dagger(int state, double t) const;
};

UnitReserves build_unit_reserves(const StateModel& sm, const TechnicalBasis& basis,
                                 const PaymentSpec& pay, const TimeGrid& fine, int refine = 4);

// Wires the surrender lumps (technical reserve of the respective stream in
// state 0) into the payment set.
void wire_surrender_payments(PaymentSpec& pay, const UnitReserves& ur, double horizon);

}  // namespace bonusproj

#endif
