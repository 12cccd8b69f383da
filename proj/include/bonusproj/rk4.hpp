#ifndef BONUSPROJ_RK4_HPP
#define BONUSPROJ_RK4_HPP

#include <vector>

namespace bonusproj {

// Classical fixed-step RK4 on a flat double vector.  h may be negative for
// backward integration.  The derivative callback receives the stage time; the
// caller is expected to resolve any piecewise branch against the step interior
// itself (see TimeFn::operator()(t, ref)).
class Rk4 {
 public:
  explicit Rk4(std::size_t dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

  template <class Deriv>
  void step(Deriv&& d, double t, double h, std::vector<double>& x) {
    const std::size_t n = x.size();
    d(t, x, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
    d(t + 0.5 * h, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k2_[i];
    d(t + 0.5 * h, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * k3_[i];
    d(t + h, tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i)
      x[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

 private:
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace bonusproj

#endif
