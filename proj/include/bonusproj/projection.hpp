#ifndef BONUSPROJ_PROJECTION_HPP
#define BONUSPROJ_PROJECTION_HPP

#include <memory>

#include "bonusproj/curvetables.hpp"

namespace bonusproj {

struct ProjectionConfig {
  int z0 = 0;
  double kappa = 0.2;
  double u0 = 0.0;
  double q0 = 0.0;
  int anchor_stride = 10;  // fine steps between unit-bonus anchors
  size_t max_grid_bytes = size_t(2) << 30;
  int reserve_refine = 4;
  int cheb_points = 16;
};

// Everything scenario-independent, built once and shared read-only by the
// scenario workers.
struct Precomputed {
  StateModel model;
  TimeGrid fine;
  VasicekParams esg;
  ProjectionConfig cfg;
  PaymentSpec pay;  // surrender lumps wired to the technical reserves
  UnitReserves reserves;
  OccupationGrid occ;
  GeneratorTable market_gens;
  std::vector<double> rstar;                        // r*(t_m)
  std::vector<double> a_predet;                     // predetermined density at t_m
  std::vector<std::vector<double>> g_dagger;        // unit-bonus intensity [state][t_m]
  std::vector<std::vector<double>> v_dagger_nodes;  // technical unit reserve [state][t_m]
  std::vector<std::vector<double>> ratio_circ;      // dividend source ratio [state][t_m]
  std::vector<double> vbar_circ;                    // portfolio predetermined reserve
  std::vector<double> vbar_dagger_p;                // sum_k p_k V-dagger_k
  std::vector<double> gsum_p;                       // sum_k p_k g-dagger_k
  std::shared_ptr<UnitBonusGrid> bonus;
  std::shared_ptr<CurveTables> tables;
};

Precomputed precompute(const StateModel& sm, const TechnicalBasis& technical,
                       const TransitionRateSet& market, PaymentSpec pay,
                       const VasicekParams& esg, const TimeGrid& fine,
                       const ProjectionConfig& cfg);

// Shape of the business at a step's left endpoint, as seen by the strategy.
struct ShapeView {
  double t = 0.0;
  int node = 0;
  double U = 0.0;
  double vbar_star = 0.0;
  double vbar_g = 0.0;
  double rstar = 0.0;
};

// r_delta = rstar + kappa (U - max(vstar, vg))^+ / vstar, with an empty
// reserve crediting no excess.
double second_order_rate(double rstar, double kappa, double U, double vstar, double vg);

// Strategies produce the frozen per-step source coefficients of the p^Q
// system: dp^Q_k = cp_k p_k + cr_k p^rho_k + f_k p^Q_k + Markov terms.
class GeneralStrategy {
 public:
  virtual ~GeneralStrategy() = default;
  virtual void coefficients(const ShapeView& shape, const Scenario& sc, const Precomputed& pre,
                            std::vector<double>& cp, std::vector<double>& cr,
                            std::vector<double>& f) const = 0;
};

class StateIndepStrategy {
 public:
  virtual ~StateIndepStrategy() = default;
  // dQ = d0 + d2 Q over the step
  virtual void coefficients(const ShapeView& shape, const Scenario& sc, const Precomputed& pre,
                            double& d0, double& d2) const = 0;
};

// Second order interest rate credited on the policy's own technical reserves.
class ReserveSecondOrderGeneral : public GeneralStrategy {
 public:
  explicit ReserveSecondOrderGeneral(double kappa) : kappa_(kappa) {}
  void coefficients(const ShapeView& shape, const Scenario& sc, const Precomputed& pre,
                    std::vector<double>& cp, std::vector<double>& cr,
                    std::vector<double>& f) const override;

 private:
  double kappa_;
};

// Second order interest rate credited on the portfolio-wide mean reserve.
class PortfolioSecondOrderStateIndep : public StateIndepStrategy {
 public:
  explicit PortfolioSecondOrderStateIndep(double kappa) : kappa_(kappa) {}
  void coefficients(const ShapeView& shape, const Scenario& sc, const Precomputed& pre, double& d0,
                    double& d2) const override;

 private:
  double kappa_;
};

// State-independent strategy expressed through the general machinery:
// cp_k = d0 and f_k = d2 in every state.
class LiftedStateIndep : public GeneralStrategy {
 public:
  explicit LiftedStateIndep(const StateIndepStrategy& inner) : inner_(&inner) {}
  void coefficients(const ShapeView& shape, const Scenario& sc, const Precomputed& pre,
                    std::vector<double>& cp, std::vector<double>& cr,
                    std::vector<double>& f) const override;

 private:
  const StateIndepStrategy* inner_;
};

struct ProjectionOptions {
  bool keep_paths = false;
  bool keep_controls = false;
};

struct ProjectionResult {
  double vb_main = 0.0;   // int D(t) a^b(0,t) dt
  double vb_rm2 = 0.0;    // dividend value at allocation, Remark-style estimator
  double final_U = 0.0;
  double final_DU = 0.0;  // D(n) U(n)
  double max_agg_err = 0.0;
  double min_pq = 0.0;
  std::vector<double> pq_final;

  // filled when keep_paths
  std::vector<double> U_path, vbar_star_path, vbar_g_path, rdelta_path, eta_path, ab_path,
      rm2_path, q_path;
  std::vector<std::vector<double>> pq_path;  // [state][node]

  // filled when keep_controls: frozen coefficients per step
  std::vector<std::vector<double>> ctrl_cp, ctrl_cr, ctrl_f;  // [state][step]
};

ProjectionResult project_general(const Precomputed& pre, const Scenario& sc,
                                 const GeneralStrategy& strategy, const ProjectionOptions& opt = {});

ProjectionResult project_stateindep(const Precomputed& pre, const Scenario& sc,
                                    const StateIndepStrategy& strategy,
                                    const ProjectionOptions& opt = {});

}  // namespace bonusproj

#endif
