#ifndef BONUSPROJ_CASHFLOWS_HPP
#define BONUSPROJ_CASHFLOWS_HPP

#include <functional>

#include "bonusproj/model.hpp"
#include "bonusproj/probabilities.hpp"
#include "bonusproj/reserves.hpp"

namespace bonusproj {

// Expected predetermined payment density on the fine nodes, averaged across
// one-sided limits at payment and rate breakpoints.  Premium states weight the
// contractual payments with the plain occupation probabilities, free-policy
// states weight the benefit parts with the rho-modified ones; surrender lumps
// pay the technical reserve of the respective stream.
std::vector<double> predetermined_density(const StateModel& sm, const TransitionRateSet& market,
                                          const PaymentSpec& pay, const UnitReserves& ur,
                                          const OccupationGrid& occ, const TimeGrid& fine);

// Unit-bonus payment intensity per state on the fine nodes: bonus sojourn
// payments plus rate-weighted bonus lumps, mirrored unscaled onto the
// free-policy states.
std::vector<std::vector<double>> bonus_payment_intensity(const StateModel& sm,
                                                         const TransitionRateSet& market,
                                                         const PaymentSpec& pay,
                                                         const TimeGrid& fine);

// Expected unit-bonus payment densities s -> a_j(t_a, s) for a unit allocated
// at anchor time t_a to a policy then in state j, tabulated for every anchor
// (a fixed stride of fine steps) by advancing forward transition matrices
// against the tabulated stage generators.
class UnitBonusGrid {
 public:
  UnitBonusGrid(const StateModel& sm, const GeneratorTable& gens,
                const std::vector<std::vector<double>>& intensity, const TimeGrid& fine,
                int anchor_stride, size_t max_bytes);

  int anchors() const { return static_cast<int>(blocks_.size()); }
  int anchor_stride() const { return stride_; }
  int anchor_node(int a) const { return a * stride_; }
  int block_len(int a) const { return fine_.steps + 1 - anchor_node(a); }
  // Density at fine node m >= anchor_node(a) for start state j.
  double density(int a, int state, int fine_node) const {
    return blocks_[a][state * block_len(a) + (fine_node - anchor_node(a))];
  }
  const std::vector<double>& block(int a) const { return blocks_[a]; }
  size_t bytes() const { return bytes_; }
  const TimeGrid& grid() const { return fine_; }
  long clip_events = 0;

 private:
  TimeGrid fine_;
  int dim_ = 0;
  int stride_ = 1;
  size_t bytes_ = 0;
  std::vector<std::vector<double>> blocks_;
};

// Trapezoid value of discount(t) times a node density, from a given node on.
double discounted_value(const std::vector<double>& density, const TimeGrid& g,
                        const std::function<double(double)>& discount, int from_node = 0);

}  // namespace bonusproj

#endif
