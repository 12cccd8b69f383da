#include "bonusproj/curvetables.hpp"

#include <cmath>

namespace bonusproj {

namespace {
const double kPi = std::acos(-1.0);
}

std::vector<double> ChebBasis::nodes() const {
  std::vector<double> r(n);
  const double c = 0.5 * (lo + hi), s = 0.5 * (hi - lo);
  for (int i = 0; i < n; ++i) r[i] = c + s * std::cos(kPi * (i + 0.5) / n);
  return r;
}

std::vector<double> ChebBasis::to_coeffs(const std::vector<double>& values) const {
  std::vector<double> c(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += values[i] * std::cos(kPi * k * (i + 0.5) / n);
    c[k] = 2.0 / n * acc;
  }
  c[0] *= 0.5;
  return c;
}

double ChebBasis::eval(const double* a, double r) const {
  const double x = (2.0 * r - lo - hi) / (hi - lo);
  double b1 = 0.0, b2 = 0.0;
  for (int k = n - 1; k >= 1; --k) {
    const double b = 2.0 * x * b1 - b2 + a[k];
    b2 = b1;
    b1 = b;
  }
  return x * b1 - b2 + a[0];
}

ChebBasis short_rate_basis(const VasicekParams& par, int n) {
  const double sd = par.sigma / std::sqrt(2.0 * par.alpha);
  const double half = 8.0 * sd + 0.02;
  const double lo = std::min(par.theta(), par.r0) - half;
  const double hi = std::max(par.theta(), par.r0) + half;
  return ChebBasis{n, lo, hi};
}

CurveTables::CurveTables(const VasicekParams& par, const TimeGrid& fine,
                         const std::vector<double>& predet, const UnitBonusGrid& bonus,
                         int cheb_n)
    : basis_(short_rate_basis(par, cheb_n)),
      fine_(fine),
      dim_(bonus.anchors() > 0 ? static_cast<int>(bonus.block(0).size()) / bonus.block_len(0) : 0),
      stride_(bonus.anchor_stride()),
      n_anchors_(bonus.anchors()) {
  if (bonus.grid().steps != fine.steps) throw ConfigError("bonus grid does not match the time grid");
  const int M = fine.steps, N = basis_.n;
  const auto rs = basis_.nodes();

  // kernel[lag][i] = P(t, t + lag*h; r_i), psi-weighted alongside
  std::vector<double> ker(static_cast<size_t>(M + 1) * N), kerB(ker.size());
  for (int l = 0; l <= M; ++l) {
    const double x = l * fine.h;
    const double logA = vasicek_logA(par, x), B = vasicek_B(par, x);
    for (int i = 0; i < N; ++i) {
      ker[static_cast<size_t>(l) * N + i] = std::exp(logA - B * rs[i]);
      kerB[static_cast<size_t>(l) * N + i] = B * ker[static_cast<size_t>(l) * N + i];
    }
  }

  std::vector<double> acc(N), accB(N);
  auto integrate = [&](const double* dens, int len, double* out_c, double* out_psi_c) {
    std::fill(acc.begin(), acc.end(), 0.0);
    std::fill(accB.begin(), accB.end(), 0.0);
    if (len > 1) {
      for (int q = 0; q < len; ++q) {
        const double w = dens[q] * fine.h * (q == 0 || q == len - 1 ? 0.5 : 1.0);
        const double* kq = ker.data() + static_cast<size_t>(q) * N;
        const double* kbq = kerB.data() + static_cast<size_t>(q) * N;
        for (int i = 0; i < N; ++i) {
          acc[i] += kq[i] * w;
          accB[i] += kbq[i] * w;
        }
      }
    }
    auto c = basis_.to_coeffs(acc);
    std::copy(c.begin(), c.end(), out_c);
    c = basis_.to_coeffs(accB);
    std::copy(c.begin(), c.end(), out_psi_c);
  };

  predet_c_.resize(static_cast<size_t>(M + 1) * N);
  predet_psi_c_.resize(predet_c_.size());
  for (int m = 0; m <= M; ++m)
    integrate(predet.data() + m, M + 1 - m, predet_c_.data() + static_cast<size_t>(m) * N,
              predet_psi_c_.data() + static_cast<size_t>(m) * N);

  bonus_c_.resize(static_cast<size_t>(n_anchors_) * dim_ * N);
  bonus_psi_c_.resize(bonus_c_.size());
  for (int a = 0; a < n_anchors_; ++a) {
    const int len = bonus.block_len(a);
    for (int j = 0; j < dim_; ++j) {
      const size_t off = (static_cast<size_t>(a) * dim_ + j) * N;
      integrate(bonus.block(a).data() + static_cast<size_t>(j) * len, len, bonus_c_.data() + off,
                bonus_psi_c_.data() + off);
    }
  }
}

double CurveTables::clamped(double r) const {
  if (r < basis_.lo) {
    clamps_.fetch_add(1, std::memory_order_relaxed);
    return basis_.lo;
  }
  if (r > basis_.hi) {
    clamps_.fetch_add(1, std::memory_order_relaxed);
    return basis_.hi;
  }
  return r;
}

double CurveTables::predet_value(int m, double r) const {
  return basis_.eval(predet_c_.data() + static_cast<size_t>(m) * basis_.n, clamped(r));
}

double CurveTables::predet_psi(int m, double r) const {
  return basis_.eval(predet_psi_c_.data() + static_cast<size_t>(m) * basis_.n, clamped(r));
}

void CurveTables::eval_anchor_lerp(const std::vector<double>& table, double t, double r,
                                   double* out) const {
  const double pos = t / (stride_ * fine_.h);
  int a = static_cast<int>(pos);
  double w = pos - a;
  if (a >= n_anchors_ - 1) {
    a = n_anchors_ - 1;
    w = 0.0;
  }
  const double rc = clamped(r);
  const int N = basis_.n;
  std::vector<double> mix(N);
  for (int j = 0; j < dim_; ++j) {
    const double* c0 = table.data() + (static_cast<size_t>(a) * dim_ + j) * N;
    if (w == 0.0) {
      out[j] = basis_.eval(c0, rc);
      continue;
    }
    const double* c1 = c0 + static_cast<size_t>(dim_) * N;
    for (int k = 0; k < N; ++k) mix[k] = (1.0 - w) * c0[k] + w * c1[k];
    out[j] = basis_.eval(mix.data(), rc);
  }
}

void CurveTables::bonus_values(double t, double r, double* out) const {
  eval_anchor_lerp(bonus_c_, t, r, out);
}

void CurveTables::bonus_psi(double t, double r, double* out) const {
  eval_anchor_lerp(bonus_psi_c_, t, r, out);
}

double CurveTables::bonus_value_at_anchor(int a, int j, double r) const {
  return basis_.eval(bonus_c_.data() + (static_cast<size_t>(a) * dim_ + j) * basis_.n, clamped(r));
}

}  // namespace bonusproj
