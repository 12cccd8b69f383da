#ifndef BONUSPROJ_PROBABILITIES_HPP
#define BONUSPROJ_PROBABILITIES_HPP

#include <functional>

#include "bonusproj/model.hpp"

namespace bonusproj {

// Plain and rho-modified occupation probabilities from (0, z0), stored on a
// half-step grid so projection-level RK4 stages find exact nodes.  The
// rho-modified probabilities damp inflow into the free-policy states by the
// free policy factor at conversion; they coincide with the plain ones on the
// premium states, and for a contract that starts as a free policy.
struct OccupationGrid {
  TimeGrid half;  // step h/2
  int z0 = 0;
  std::vector<std::vector<double>> p;      // [state][half-node]
  std::vector<std::vector<double>> p_rho;  // [state][half-node]
  long clip_events = 0;
  double worst_undershoot = 0.0;

  double at(int state, int fine_node) const { return p[state][2 * fine_node]; }
  double rho_at(int state, int fine_node) const { return p_rho[state][2 * fine_node]; }
};

OccupationGrid occupation_probabilities(const StateModel& sm, const TransitionRateSet& market,
                                        int z0, const std::function<double(double)>& rho,
                                        const TimeGrid& fine);

// Forward transition matrix rows from a grid anchor, advanced one projection
// step at a time against tabulated stage generators.  Used by the unit-bonus
// cash-flow grid and kept separate so tests can drive it directly.
class ForwardMatrix {
 public:
  ForwardMatrix(int dim, int anchor_node);
  void step(const GeneratorTable& tab);  // advance over [node, node+1]
  int node() const { return node_; }
  const std::vector<double>& rows() const { return p_; }  // dim*dim, row = start state
  long clip_events = 0;
  double worst_undershoot = 0.0;

 private:
  int dim_;
  int node_;
  std::vector<double> p_, k1_, k2_, k3_, k4_, tmp_;
  void deriv(const std::vector<double>& p, const std::vector<double>& gen, std::vector<double>& out) const;
};

}  // namespace bonusproj

#endif
