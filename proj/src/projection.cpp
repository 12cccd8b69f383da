#include "bonusproj/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bonusproj {

namespace {

constexpr double kEpsReserve = 1e-12;

double source_ratio(double num, double den, int state, double t) {
  if (den > kEpsReserve) return num / den;
  if (std::fabs(num) <= 1e-9) return 0.0;
  throw NumericError("unit bonus reserve degenerate in state " + std::to_string(state) +
                     " at t=" + std::to_string(t) + " with nonzero dividend");
}

}  // namespace

Precomputed precompute(const StateModel& sm, const TechnicalBasis& technical,
                       const TransitionRateSet& market, PaymentSpec pay,
                       const VasicekParams& esg, const TimeGrid& fine,
                       const ProjectionConfig& cfg) {
  Precomputed pre;
  pre.model = sm;
  pre.fine = fine;
  pre.esg = esg;
  pre.cfg = cfg;

  pre.reserves = build_unit_reserves(sm, technical, pay, fine, cfg.reserve_refine);
  wire_surrender_payments(pay, pre.reserves, fine.horizon);
  pre.pay = std::move(pay);

  const UnitReserves& ur = pre.reserves;
  pre.occ = occupation_probabilities(
      sm, market, cfg.z0, [&ur](double t) { return ur.rho_at(t); }, fine);
  pre.market_gens = tabulate_generator(market, fine);
  pre.a_predet = predetermined_density(sm, market, pre.pay, ur, pre.occ, fine);
  pre.g_dagger = bonus_payment_intensity(sm, market, pre.pay, fine);
  pre.bonus = std::make_shared<UnitBonusGrid>(sm, pre.market_gens, pre.g_dagger, fine,
                                              cfg.anchor_stride, cfg.max_grid_bytes);
  pre.tables = std::make_shared<CurveTables>(esg, fine, pre.a_predet, *pre.bonus, cfg.cheb_points);

  const int dim = sm.states(), M = fine.steps;
  pre.rstar.resize(M + 1);
  for (int m = 0; m <= M; ++m) pre.rstar[m] = technical.interest(fine.node(m));

  pre.v_dagger_nodes.assign(dim, std::vector<double>(M + 1));
  pre.ratio_circ.assign(dim, std::vector<double>(M + 1, 0.0));
  pre.vbar_circ.assign(M + 1, 0.0);
  pre.vbar_dagger_p.assign(M + 1, 0.0);
  pre.gsum_p.assign(M + 1, 0.0);
  for (int m = 0; m <= M; ++m) {
    const double t = fine.node(m);
    for (int k = 0; k < dim; ++k) {
      const double vd = ur.v_dagger(k, t);
      pre.v_dagger_nodes[k][m] = vd;
      pre.vbar_dagger_p[m] += pre.occ.at(k, m) * vd;
      pre.gsum_p[m] += pre.occ.at(k, m) * pre.g_dagger[k][m];
      if (k == sm.surrender() || k == sm.fp_surrender()) continue;
      const double num = sm.premium_state(k) ? ur.full.at(k, t) : ur.benefit.at(sm.base(k), t);
      // NaN marks a vanished unit reserve against a live source; only a
      // strategy that actually credits a dividend there may fault on it
      pre.ratio_circ[k][m] =
          vd > kEpsReserve ? num / vd
                           : (std::fabs(num) <= 1e-9 ? 0.0
                                                     : std::numeric_limits<double>::quiet_NaN());
      pre.vbar_circ[m] +=
          (sm.premium_state(k) ? pre.occ.at(k, m) : pre.occ.rho_at(k, m)) * num;
    }
  }
  return pre;
}

double second_order_rate(double rstar, double kappa, double U, double vstar, double vg) {
  if (vstar <= kEpsReserve) return rstar;
  const double excess = U - std::max(vstar, vg);
  return excess > 0.0 ? rstar + kappa * excess / vstar : rstar;
}

void ReserveSecondOrderGeneral::coefficients(const ShapeView& s, const Scenario&,
                                             const Precomputed& pre, std::vector<double>& cp,
                                             std::vector<double>& cr,
                                             std::vector<double>& f) const {
  const double xi = second_order_rate(s.rstar, kappa_, s.U, s.vbar_star, s.vbar_g) - s.rstar;
  const StateModel& sm = pre.model;
  for (int k = 0; k < sm.states(); ++k) cp[k] = cr[k] = f[k] = 0.0;
  if (xi == 0.0) return;
  for (int k = 0; k < sm.states(); ++k) {
    if (k == sm.surrender() || k == sm.fp_surrender()) continue;
    const double ratio = pre.ratio_circ[k][s.node];
    if (!std::isfinite(ratio))
      throw NumericError("unit bonus reserve degenerate in state " + std::to_string(k) +
                         " at t=" + std::to_string(s.t) + " with nonzero dividend");
    f[k] = xi;
    if (sm.premium_state(k))
      cp[k] = xi * ratio;
    else
      cr[k] = xi * ratio;
  }
}

void PortfolioSecondOrderStateIndep::coefficients(const ShapeView& s, const Scenario&,
                                                  const Precomputed& pre, double& d0,
                                                  double& d2) const {
  const double xi = second_order_rate(s.rstar, kappa_, s.U, s.vbar_star, s.vbar_g) - s.rstar;
  d2 = xi;
  d0 = xi == 0.0 ? 0.0
                 : xi * source_ratio(pre.vbar_circ[s.node], pre.vbar_dagger_p[s.node], -1, s.t);
}

void LiftedStateIndep::coefficients(const ShapeView& s, const Scenario& sc, const Precomputed& pre,
                                    std::vector<double>& cp, std::vector<double>& cr,
                                    std::vector<double>& f) const {
  double d0 = 0.0, d2 = 0.0;
  inner_->coefficients(s, sc, pre, d0, d2);
  // the unit price cancels out of the purchase rate in every state, so the
  // scalar coefficients apply uniformly and p^Q stays Q times p
  for (int k = 0; k < pre.model.states(); ++k) {
    cr[k] = 0.0;
    cp[k] = d0;
    f[k] = d2;
  }
}

namespace {

struct PathRecorder {
  ProjectionResult* res;
  bool keep;
  void init(ProjectionResult& r, bool keep_paths, int dim, int M, bool general) {
    res = &r;
    keep = keep_paths;
    if (!keep) return;
    const size_t n = M + 1;
    r.U_path.assign(n, 0.0);
    r.vbar_star_path.assign(n, 0.0);
    r.vbar_g_path.assign(n, 0.0);
    r.rdelta_path.assign(n, 0.0);
    r.eta_path.assign(n, 0.0);
    r.ab_path.assign(n, 0.0);
    r.rm2_path.assign(n, 0.0);
    r.q_path.assign(n, 0.0);
    if (general) r.pq_path.assign(dim, std::vector<double>(n, 0.0));
  }
};

void check_finite(double U, double total, const Scenario& sc, double t) {
  if (std::isfinite(U) && std::isfinite(total)) return;
  throw NumericError("projection diverged in scenario " + std::to_string(sc.index) +
                     " at t=" + std::to_string(t));
}

}  // namespace

ProjectionResult project_general(const Precomputed& pre, const Scenario& sc,
                                 const GeneralStrategy& strategy, const ProjectionOptions& opt) {
  const TimeGrid& g = pre.fine;
  const int M = g.steps, dim = pre.model.states();
  if (sc.grid.steps != M) throw ConfigError("scenario grid does not match the projection grid");
  const double h = g.h;

  ProjectionResult res;
  PathRecorder rec;
  rec.init(res, opt.keep_paths, dim, M, true);
  if (opt.keep_controls) {
    res.ctrl_cp.assign(dim, std::vector<double>(M, 0.0));
    res.ctrl_cr.assign(dim, std::vector<double>(M, 0.0));
    res.ctrl_f.assign(dim, std::vector<double>(M, 0.0));
  }

  std::vector<double> pq(dim, 0.0);
  pq[pre.cfg.z0] = pre.cfg.q0;
  double U = pre.cfg.u0;

  std::vector<double> phiD(dim), psiD(dim), cp(dim), cr(dim), f(dim);
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

  auto ab_at = [&](int m, const std::vector<double>& q) {
    double acc = 0.0;
    for (int k = 0; k < dim; ++k) acc += q[k] * pre.g_dagger[k][m];
    return acc;
  };

  // stage derivative with frozen source coefficients; returns the source sum
  // for the aggregation identity
  auto stage = [&](int half_node, const std::vector<double>& gen, const std::vector<double>& y,
                   std::vector<double>& dy) {
    double src_sum = 0.0;
    for (int k = 0; k < dim; ++k) {
      double s = cp[k] * pre.occ.p[k][half_node] + cr[k] * pre.occ.p_rho[k][half_node] +
                 f[k] * y[k];
      double mk = 0.0;
      for (int l = 0; l < dim; ++l) mk += y[l] * gen[l * dim + k];
      dy[k] = s + mk;
      src_sum += s;
    }
    return src_sum;
  };

  double ab_m = ab_at(0, pq);
  double vb_main = 0.0, vb_rm2 = 0.0;
  for (int m = 0; m < M; ++m) {
    const double t = g.node(m), r = sc.r[m], S1 = sc.S1[m], D = sc.D[m];

    pre.tables->bonus_values(t, r, phiD.data());
    double vstar = pre.vbar_circ[m], vg = pre.tables->predet_value(m, r);
    for (int k = 0; k < dim; ++k) {
      vstar += pq[k] * pre.v_dagger_nodes[k][m];
      vg += pq[k] * phiD[k];
    }

    ShapeView shape{t, m, U, vstar, vg, pre.rstar[m]};
    strategy.coefficients(shape, sc, pre, cp, cr, f);

    double rm2_m = 0.0;
    for (int k = 0; k < dim; ++k)
      rm2_m += (cp[k] * pre.occ.at(k, m) + cr[k] * pre.occ.rho_at(k, m) + f[k] * pq[k]) * phiD[k];

    pre.tables->bonus_psi(t, r, psiD.data());
    double psi_num = pre.tables->predet_psi(m, r);
    for (int k = 0; k < dim; ++k) psi_num += pq[k] * psiD[k];
    const double psi_den = vasicek_B(pre.esg, g.horizon - t) * S1;
    const double eta = std::fabs(psi_den) < 1e-14 ? 0.0 : psi_num / psi_den;

    if (rec.keep) {
      res.U_path[m] = U;
      res.vbar_star_path[m] = vstar;
      res.vbar_g_path[m] = vg;
      res.rdelta_path[m] = pre.rstar[m] + f[0];
      res.eta_path[m] = eta;
      res.ab_path[m] = ab_m;
      res.rm2_path[m] = rm2_m;
      double total = 0.0;
      for (int k = 0; k < dim; ++k) {
        res.pq_path[k][m] = pq[k];
        total += pq[k];
      }
      res.q_path[m] = total;
    }
    if (opt.keep_controls)
      for (int k = 0; k < dim; ++k) {
        res.ctrl_cp[k][m] = cp[k];
        res.ctrl_cr[k][m] = cr[k];
        res.ctrl_f[k][m] = f[k];
      }

    vb_main += (m == 0 ? 0.5 : 1.0) * h * D * ab_m;
    vb_rm2 += (m == 0 ? 0.5 : 1.0) * h * D * rm2_m;

    // RK4 over [t, t+h] with p and p^rho read off the half grid
    double total_before = 0.0;
    for (int k = 0; k < dim; ++k) total_before += pq[k];
    const double s1 = stage(2 * m, pre.market_gens.left[m], pq, k1);
    for (int k = 0; k < dim; ++k) tmp[k] = pq[k] + 0.5 * h * k1[k];
    const double s2 = stage(2 * m + 1, pre.market_gens.mid[m], tmp, k2);
    for (int k = 0; k < dim; ++k) tmp[k] = pq[k] + 0.5 * h * k2[k];
    const double s3 = stage(2 * m + 1, pre.market_gens.mid[m], tmp, k3);
    for (int k = 0; k < dim; ++k) tmp[k] = pq[k] + h * k3[k];
    const double s4 = stage(2 * m + 2, pre.market_gens.right[m], tmp, k4);
    double total_after = 0.0;
    for (int k = 0; k < dim; ++k) {
      pq[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
      total_after += pq[k];
      res.min_pq = std::min(res.min_pq, pq[k]);
    }
    const double agg =
        std::fabs(total_after - total_before - h / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4));
    res.max_agg_err = std::max(res.max_agg_err, agg);

    const double ab_next = ab_at(m + 1, pq);
    U += h * r * (U - eta * S1) + eta * (sc.S1[m + 1] - S1) -
         0.5 * h * (pre.a_predet[m] + pre.a_predet[m + 1]) - 0.5 * h * (ab_m + ab_next);
    ab_m = ab_next;
    check_finite(U, total_after, sc, t + h);
  }
  vb_main += 0.5 * h * sc.D[M] * ab_m;
  if (rec.keep) {
    res.U_path[M] = U;
    res.ab_path[M] = ab_m;
    double total = 0.0;
    for (int k = 0; k < dim; ++k) {
      res.pq_path[k][M] = pq[k];
      total += pq[k];
    }
    res.q_path[M] = total;
    res.vbar_star_path[M] = pre.vbar_circ[M];
    res.vbar_g_path[M] = 0.0;
    res.rdelta_path[M] = pre.rstar[M];
  }

  res.vb_main = vb_main;
  res.vb_rm2 = vb_rm2;
  res.final_U = U;
  res.final_DU = sc.D[M] * U;
  res.pq_final = std::move(pq);
  return res;
}

ProjectionResult project_stateindep(const Precomputed& pre, const Scenario& sc,
                                    const StateIndepStrategy& strategy,
                                    const ProjectionOptions& opt) {
  const TimeGrid& g = pre.fine;
  const int M = g.steps, dim = pre.model.states();
  if (sc.grid.steps != M) throw ConfigError("scenario grid does not match the projection grid");
  const double h = g.h;

  ProjectionResult res;
  PathRecorder rec;
  rec.init(res, opt.keep_paths, dim, M, false);

  double Q = pre.cfg.q0;
  double U = pre.cfg.u0;
  double qmin = std::min(0.0, Q);
  std::vector<double> phiD(dim), psiD(dim);

  double vb_main = 0.0, vb_rm2 = 0.0;
  double ab_m = Q * pre.gsum_p[0];
  for (int m = 0; m < M; ++m) {
    const double t = g.node(m), r = sc.r[m], S1 = sc.S1[m], D = sc.D[m];

    pre.tables->bonus_values(t, r, phiD.data());
    double bsum = 0.0;
    for (int k = 0; k < dim; ++k) bsum += pre.occ.at(k, m) * phiD[k];
    const double vstar = pre.vbar_circ[m] + Q * pre.vbar_dagger_p[m];
    const double vg = pre.tables->predet_value(m, r) + Q * bsum;

    ShapeView shape{t, m, U, vstar, vg, pre.rstar[m]};
    double d0 = 0.0, d2 = 0.0;
    strategy.coefficients(shape, sc, pre, d0, d2);

    const double rm2_m = (d0 + d2 * Q) * bsum;

    pre.tables->bonus_psi(t, r, psiD.data());
    double psi_num = pre.tables->predet_psi(m, r);
    for (int k = 0; k < dim; ++k) psi_num += Q * pre.occ.at(k, m) * psiD[k];
    const double psi_den = vasicek_B(pre.esg, g.horizon - t) * S1;
    const double eta = std::fabs(psi_den) < 1e-14 ? 0.0 : psi_num / psi_den;

    if (rec.keep) {
      res.U_path[m] = U;
      res.vbar_star_path[m] = vstar;
      res.vbar_g_path[m] = vg;
      res.rdelta_path[m] = pre.rstar[m] + d2;
      res.eta_path[m] = eta;
      res.ab_path[m] = ab_m;
      res.rm2_path[m] = rm2_m;
      res.q_path[m] = Q;
    }

    vb_main += (m == 0 ? 0.5 : 1.0) * h * D * ab_m;
    vb_rm2 += (m == 0 ? 0.5 : 1.0) * h * D * rm2_m;

    const double q1 = d0 + d2 * Q;
    const double q2 = d0 + d2 * (Q + 0.5 * h * q1);
    const double q3 = d0 + d2 * (Q + 0.5 * h * q2);
    const double q4 = d0 + d2 * (Q + h * q3);
    Q += h / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
    qmin = std::min(qmin, Q);

    const double ab_next = Q * pre.gsum_p[m + 1];
    U += h * r * (U - eta * S1) + eta * (sc.S1[m + 1] - S1) -
         0.5 * h * (pre.a_predet[m] + pre.a_predet[m + 1]) - 0.5 * h * (ab_m + ab_next);
    ab_m = ab_next;
    check_finite(U, Q, sc, t + h);
  }
  vb_main += 0.5 * h * sc.D[M] * ab_m;
  if (rec.keep) {
    res.U_path[M] = U;
    res.ab_path[M] = ab_m;
    res.q_path[M] = Q;
    res.vbar_star_path[M] = pre.vbar_circ[M] + Q * pre.vbar_dagger_p[M];
    res.vbar_g_path[M] = 0.0;
    res.rdelta_path[M] = pre.rstar[M];
  }

  res.vb_main = vb_main;
  res.vb_rm2 = vb_rm2;
  res.final_U = U;
  res.final_DU = sc.D[M] * U;
  res.pq_final.assign(dim, 0.0);
  for (int k = 0; k < dim; ++k) res.pq_final[k] = Q * pre.occ.at(k, M);
  res.min_pq = qmin;
  return res;
}

}  // namespace bonusproj
