#include "bonusproj/reserves.hpp"

#include <cmath>
#include <memory>

#include "bonusproj/rk4.hpp"

namespace bonusproj {

// ===== Thiele =====

namespace {

struct ThieleSystem {
  int J;  // solved states 0..J-1
  TimeFn interest;
  std::vector<TimeFn> sojourn;                              // per solved state
  std::vector<std::vector<std::pair<int, TimeFn>>> moves;   // [j] -> (k, mu*)
  std::vector<std::vector<std::pair<int, TimeFn>>> lumps;   // [j] -> (k, b_jk)

  void deriv(double t, double ref, const std::vector<double>& v, std::vector<double>& dv) const {
    double r = interest(t, ref);
    for (int j = 0; j < J; ++j) {
      double d = r * v[j] - sojourn[j](t, ref);
      for (const auto& [k, mu] : moves[j]) {
        double lump = 0.0;
        for (const auto& [kk, b] : lumps[j])
          if (kk == k) lump = b(t, ref);
        d -= (lump + v[k] - v[j]) * mu(t, ref);
      }
      dv[j] = d;
    }
  }
};

ThieleSystem make_system(const StateModel& sm, const TechnicalBasis& basis,
                         const PaymentSpec& pay, bool benefits_only) {
  ThieleSystem sys;
  sys.J = sm.J;
  sys.interest = basis.interest;
  sys.sojourn.resize(sm.J);
  sys.moves.resize(sm.J);
  sys.lumps.resize(sm.J);
  for (int j = 0; j < sm.J; ++j) {
    TimeFn b = pay.sojourn_at(j);
    sys.sojourn[j] = benefits_only ? b.positive_part() : b;
    for (int k = 0; k < sm.J; ++k) {
      if (k == j) continue;
      if (basis.rates.has(j, k)) sys.moves[j].emplace_back(k, basis.rates.at(j, k));
      auto it = pay.lump.find({j, k});
      if (it != pay.lump.end())
        sys.lumps[j].emplace_back(k, benefits_only ? it->second.positive_part() : it->second);
    }
  }
  return sys;
}

}  // namespace

ReserveGrid solve_thiele(const StateModel& sm, const TechnicalBasis& basis,
                         const PaymentSpec& pay, const TimeGrid& fine,
                         const ThieleOptions& opt) {
  ThieleSystem sys = make_system(sm, basis, pay, opt.benefits_only);
  TimeGrid g = fine.refined(opt.refine);

  ReserveGrid out;
  out.grid = g;
  out.v.assign(sm.J, std::vector<double>(g.nodes(), 0.0));

  std::vector<double> x(sm.J, 0.0);
  if (opt.terminal) x = *opt.terminal;
  for (int j = 0; j < sm.J; ++j) out.v[j][g.steps] = x[j];

  Rk4 rk(sm.J);
  for (int m = g.steps; m >= 1; --m) {
    double b = g.node(m);
    double ref = b - 0.5 * g.h;
    rk.step([&](double t, const std::vector<double>& v, std::vector<double>& dv) {
      sys.deriv(t, ref, v, dv);
    }, b, -g.h, x);
    for (int j = 0; j < sm.J; ++j) out.v[j][m - 1] = x[j];
  }
  return out;
}

double calibrate_premium(const StateModel& sm, const TechnicalBasis& basis,
                         const std::function<PaymentSpec(double)>& payments_at,
                         const TimeGrid& fine, int refine, double tol) {
  ThieleOptions opt;
  opt.refine = refine;
  auto value_at = [&](double premium) {
    ReserveGrid rg = solve_thiele(sm, basis, payments_at(premium), fine, opt);
    return rg.v[0][0];
  };
  double lo = 0.0, hi = 1e5;
  double f_lo = value_at(lo);
  if (f_lo < 0.0) throw NumericError("premium calibration: benefits have negative value");
  double f_hi = value_at(hi);
  while (f_hi > 0.0) {
    hi *= 10.0;
    if (hi > 1e12) throw NumericError("premium calibration: no sign change found");
    f_hi = value_at(hi);
  }
  double mid = hi;
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    mid = 0.5 * (lo + hi);
    double f = value_at(mid);
    if (std::fabs(f) <= tol) return mid;
    if (f > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ===== free policy factor =====

std::vector<double> free_policy_factor(const ReserveGrid& full, const ReserveGrid& benefit) {
  const auto& g = full.grid;
  std::vector<double> rho(g.nodes(), 1.0);
  double scale = 1.0;
  for (double v : benefit.v[0]) scale = std::max(scale, std::fabs(v));
  for (int m = 1; m < g.nodes(); ++m) {
    double num = full.v[0][m];
    double den = benefit.v[0][m];
    if (den <= 1e-12 * scale) {
      if (std::fabs(num) <= 1e-12 * scale) {
        rho[m] = 1.0;  // both streams exhausted, keep the trailing limit
        continue;
      }
      throw NumericError("free policy factor: benefits-only reserve vanishes before the horizon");
    }
    double r = num / den;
    if (r < -1e-9 || r > 1.0 + 1e-9)
      throw NumericError("free policy factor: ratio escapes [0,1], product is degenerate");
    rho[m] = std::min(1.0, std::max(0.0, r));
  }
  return rho;
}

// ===== unit reserves =====

double UnitReserves::v_circ(int state, double t, double rho_tau) const {
  if (state == model.surrender() || state == model.fp_surrender()) return 0.0;
  if (model.premium_state(state)) return full.at(state, t);
  double scale = std::isnan(rho_tau) ? 1.0 : rho_tau;
  return scale * benefit.at(model.base(state), t);
}

double UnitReserves::v_dagger(int state, double t) const {
  if (state == model.surrender() || state == model.fp_surrender()) return 0.0;
  int j = model.premium_state(state) ? state : model.base(state);
  return bonus.at(j, t);
}

UnitReserves build_unit_reserves(const StateModel& sm, const TechnicalBasis& basis,
                                 const PaymentSpec& pay, const TimeGrid& fine, int refine) {
  UnitReserves ur;
  ur.model = sm;
  ThieleOptions opt;
  opt.refine = refine;
  ur.full = solve_thiele(sm, basis, pay, fine, opt);
  opt.benefits_only = true;
  ur.benefit = solve_thiele(sm, basis, pay, fine, opt);

  PaymentSpec bonus_pay;
  bonus_pay.J = pay.J;
  bonus_pay.sojourn = pay.bonus_sojourn;
  bonus_pay.lump = pay.bonus_lump;
  opt.benefits_only = false;
  ur.bonus = solve_thiele(sm, basis, bonus_pay, fine, opt);

  ur.rho = free_policy_factor(ur.full, ur.benefit);
  return ur;
}

void wire_surrender_payments(PaymentSpec& pay, const UnitReserves& ur, double horizon) {
  auto full = std::make_shared<ReserveGrid>(ur.full);
  auto bonus = std::make_shared<ReserveGrid>(ur.bonus);
  pay.surrender_lump =
      TimeFn::analytic([full](double t) { return full->at(0, t); }, 0.0, horizon);
  pay.bonus_surrender_lump =
      TimeFn::analytic([bonus](double t) { return bonus->at(0, t); }, 0.0, horizon);
}

}  // namespace bonusproj
