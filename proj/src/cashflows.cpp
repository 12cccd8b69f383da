#include "bonusproj/cashflows.hpp"

#include <string>

namespace bonusproj {

namespace {

// One-sided evaluation references around a node, so products of functions
// jumping at the same cutoff average the limits of the product, not the
// product of averaged limits.
struct NodeRefs {
  double t, left, right;
  NodeRefs(const TimeGrid& g, int m) {
    t = g.node(m);
    const double off = 0.25 * g.h;
    left = m > 0 ? t - off : t + off;
    right = m < g.steps ? t + off : t - off;
  }
};

}  // namespace

std::vector<double> predetermined_density(const StateModel& sm, const TransitionRateSet& market,
                                          const PaymentSpec& pay, const UnitReserves& ur,
                                          const OccupationGrid& occ, const TimeGrid& fine) {
  std::vector<TimeFn> pos_sojourn(sm.J);
  for (int j = 0; j < sm.J; ++j) pos_sojourn[j] = pay.sojourn_at(j).positive_part();
  std::vector<std::pair<std::pair<int, int>, TimeFn>> pos_lump;
  for (const auto& [key, fn] : pay.lump) pos_lump.emplace_back(key, fn.positive_part());

  std::vector<double> a(fine.steps + 1, 0.0);
  for (int m = 0; m <= fine.steps; ++m) {
    const NodeRefs nr(fine, m);
    auto one_sided = [&](double ref) {
      double acc = 0.0;
      for (int j = 0; j < sm.J; ++j) {
        acc += occ.at(j, m) * pay.sojourn_at(j)(nr.t, ref);
        acc += occ.rho_at(sm.fp(j), m) * pos_sojourn[j](nr.t, ref);
      }
      for (const auto& [key, fn] : pay.lump)
        acc += occ.at(key.first, m) * market.rate(key.first, key.second, nr.t, ref) * fn(nr.t, ref);
      for (const auto& [key, fn] : pos_lump)
        acc += occ.rho_at(sm.fp(key.first), m) *
               market.rate(sm.fp(key.first), sm.fp(key.second), nr.t, ref) * fn(nr.t, ref);
      acc += occ.at(0, m) * market.rate(0, sm.surrender(), nr.t, ref) *
             pay.surrender_lump(nr.t, ref);
      acc += occ.rho_at(sm.fp_start(), m) *
             market.rate(sm.fp_start(), sm.fp_surrender(), nr.t, ref) * ur.benefit.at(0, nr.t);
      return acc;
    };
    a[m] = 0.5 * (one_sided(nr.left) + one_sided(nr.right));
  }
  return a;
}

std::vector<std::vector<double>> bonus_payment_intensity(const StateModel& sm,
                                                         const TransitionRateSet& market,
                                                         const PaymentSpec& pay,
                                                         const TimeGrid& fine) {
  const int dim = sm.states();
  std::vector<std::vector<double>> g(dim, std::vector<double>(fine.steps + 1, 0.0));
  for (int m = 0; m <= fine.steps; ++m) {
    const NodeRefs nr(fine, m);
    auto one_sided = [&](int state, double ref) {
      const bool prem = sm.premium_state(state);
      const int j = prem ? state : sm.base(state);
      if (j == sm.surrender()) return 0.0;
      double acc = pay.bonus_sojourn_at(j)(nr.t, ref);
      for (const auto& [key, fn] : pay.bonus_lump) {
        if (key.first != j) continue;
        const int from = prem ? key.first : sm.fp(key.first);
        const int to = prem ? key.second : sm.fp(key.second);
        acc += market.rate(from, to, nr.t, ref) * fn(nr.t, ref);
      }
      if (j == 0) {
        const int from = prem ? 0 : sm.fp_start();
        const int to = prem ? sm.surrender() : sm.fp_surrender();
        acc += market.rate(from, to, nr.t, ref) * pay.bonus_surrender_lump(nr.t, ref);
      }
      return acc;
    };
    for (int k = 0; k < dim; ++k)
      g[k][m] = 0.5 * (one_sided(k, nr.left) + one_sided(k, nr.right));
  }
  return g;
}

UnitBonusGrid::UnitBonusGrid(const StateModel& sm, const GeneratorTable& gens,
                             const std::vector<std::vector<double>>& intensity,
                             const TimeGrid& fine, int anchor_stride, size_t max_bytes)
    : fine_(fine), dim_(sm.states()), stride_(anchor_stride) {
  if (stride_ < 1 || fine.steps % stride_ != 0)
    throw ConfigError("anchor stride must divide the number of projection steps");
  const int n_anchors = fine.steps / stride_ + 1;
  size_t need = 0;
  for (int a = 0; a < n_anchors; ++a)
    need += sizeof(double) * static_cast<size_t>(dim_) * (fine.steps + 1 - a * stride_);
  if (need > max_bytes)
    throw ConfigError("unit-bonus grid needs " + std::to_string(need) +
                      " bytes, over the budget of " + std::to_string(max_bytes) +
                      "; increase anchor_step or max_grid_bytes");

  blocks_.resize(n_anchors);
  for (int a = 0; a < n_anchors; ++a) {
    const int node0 = anchor_node(a);
    const int len = block_len(a);
    auto& blk = blocks_[a];
    blk.assign(static_cast<size_t>(dim_) * len, 0.0);
    ForwardMatrix fm(dim_, node0);
    for (int j = 0; j < dim_; ++j) blk[j * len] = intensity[j][node0];
    for (int i = 1; i < len; ++i) {
      fm.step(gens);
      const auto& rows = fm.rows();
      for (int j = 0; j < dim_; ++j) {
        double acc = 0.0;
        for (int k = 0; k < dim_; ++k) acc += rows[j * dim_ + k] * intensity[k][node0 + i];
        blk[j * len + i] = acc;
      }
    }
    clip_events += fm.clip_events;
    bytes_ += sizeof(double) * blk.size();
  }
}

double discounted_value(const std::vector<double>& density, const TimeGrid& g,
                        const std::function<double(double)>& discount, int from_node) {
  std::vector<double> vals(g.steps + 1 - from_node);
  for (int m = from_node; m <= g.steps; ++m) vals[m - from_node] = discount(g.node(m)) * density[m];
  return trapezoid(vals, g.h);
}

}  // namespace bonusproj
