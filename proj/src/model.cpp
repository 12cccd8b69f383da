#include "bonusproj/model.hpp"

namespace bonusproj {

std::vector<std::pair<int, int>> TransitionRateSet::support() const {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < dim_; ++j)
    for (int k = 0; k < dim_; ++k)
      if (j != k && has(j, k)) out.emplace_back(j, k);
  return out;
}

void TransitionRateSet::generator(double t, double ref, double* out) const {
  for (int j = 0; j < dim_; ++j) {
    double exits = 0.0;
    for (int k = 0; k < dim_; ++k) {
      double v = 0.0;
      if (j != k && has(j, k)) {
        v = at(j, k)(t, ref);
        exits += v;
      }
      out[j * dim_ + k] = v;
    }
    out[j * dim_ + j] = -exits;
  }
}

GeneratorTable tabulate_generator(const TransitionRateSet& rates, const TimeGrid& g) {
  GeneratorTable tab;
  tab.dim = rates.dim();
  tab.h = g.h;
  tab.left.resize(g.steps);
  tab.mid.resize(g.steps);
  tab.right.resize(g.steps);
  const int nn = tab.dim * tab.dim;
  for (int m = 0; m < g.steps; ++m) {
    double a = g.node(m), b = g.node(m + 1), ref = 0.5 * (a + b);
    tab.left[m].resize(nn);
    tab.mid[m].resize(nn);
    tab.right[m].resize(nn);
    rates.generator(a, ref, tab.left[m].data());
    rates.generator(ref, ref, tab.mid[m].data());
    rates.generator(b, ref, tab.right[m].data());
  }
  return tab;
}

static const TimeFn kEmptyFn{};

const TimeFn& PaymentSpec::sojourn_at(int j) const {
  if (j < 0 || j >= static_cast<int>(sojourn.size())) return kEmptyFn;
  return sojourn[j];
}

const TimeFn& PaymentSpec::bonus_sojourn_at(int j) const {
  if (j < 0 || j >= static_cast<int>(bonus_sojourn.size())) return kEmptyFn;
  return bonus_sojourn[j];
}

}  // namespace bonusproj
