#ifndef BONUSPROJ_TESTS_HELPERS_HPP
#define BONUSPROJ_TESTS_HELPERS_HPP

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "bonusproj/config.hpp"
#include "bonusproj/runner.hpp"
#include "bonusproj/valuation.hpp"
#include "bonusproj/zpath.hpp"

namespace bonusproj::testing {

inline std::string repo_path(const std::string& rel) {
  return std::string(BONUSPROJ_REPO_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline const RunConfig& disability_config() {
  static const RunConfig cfg = parse_config_file(repo_path("configs/disability.ini"));
  return cfg;
}

// Shipped disability product with everything precomputed, cached per step so
// each test binary pays the setup once.
struct DisabilitySetup {
  RunConfig cfg;
  ModelInputs in;
  double premium = 0.0;
  std::shared_ptr<const Precomputed> pre;
};

inline const DisabilitySetup& disability_setup(double step) {
  static std::map<long, DisabilitySetup> cache;
  const long key = std::lround(step * 1e6);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  DisabilitySetup s;
  s.cfg = disability_config();
  s.cfg.step = step;
  s.in = build_inputs(s.cfg);
  s.premium = s.in.premium_value;
  PaymentSpec pay = build_payments(s.cfg, s.premium);
  s.pre = std::make_shared<const Precomputed>(precompute(
      s.in.model, s.in.technical, s.in.market, std::move(pay), s.in.esg, s.in.fine,
      s.in.projection));
  return cache.emplace(key, std::move(s)).first->second;
}

// Minimal two-state engine fixture: one premium state that can only surrender,
// flat rates everywhere, deterministic short rate unless sigma is set.
struct ToyOptions {
  double horizon = 10.0;
  double step = 0.01;
  double mu_surrender = 0.3;      // 0 -> surrender, constant; 0 disables it
  double sojourn = 5.0;           // predetermined benefit rate in state 0
  double bonus_sojourn = 1.0;     // unit-bonus benefit rate in state 0
  double rstar = 0.02;
  double sigma = 0.0;
  double r0 = 0.02;
  double kappa = 0.0;
  double u0 = 0.0;
  int z0 = 0;
  int anchor_stride = 10;
};

struct ToySetup {
  StateModel sm;
  TechnicalBasis tech;
  TransitionRateSet market;
  VasicekParams esg;
  TimeGrid fine;
  ProjectionConfig cfg;
  std::shared_ptr<const Precomputed> pre;
};

inline ToySetup make_toy(const ToyOptions& opt) {
  ToySetup s;
  s.sm = StateModel{1};
  s.tech.interest = TimeFn::constant(opt.rstar);
  s.tech.rates = TransitionRateSet(s.sm.states());
  s.market = TransitionRateSet(s.sm.states());
  if (opt.mu_surrender > 0.0)
    s.market.set(0, s.sm.surrender(), TimeFn::constant(opt.mu_surrender));
  s.esg = VasicekParams{opt.rstar * 0.5, 0.5, opt.sigma, opt.r0};
  s.esg.beta = s.esg.alpha * opt.r0;  // theta = r0, flat deterministic path at sigma 0
  s.fine = TimeGrid::make(opt.horizon, opt.step);
  s.cfg = ProjectionConfig{};
  s.cfg.z0 = opt.z0;
  s.cfg.kappa = opt.kappa;
  s.cfg.u0 = opt.u0;
  s.cfg.anchor_stride = opt.anchor_stride;

  PaymentSpec pay;
  pay.J = 1;
  pay.sojourn = {TimeFn::constant(opt.sojourn)};
  pay.bonus_sojourn = {TimeFn::constant(opt.bonus_sojourn)};
  s.pre = std::make_shared<const Precomputed>(
      precompute(s.sm, s.tech, s.market, std::move(pay), s.esg, s.fine, s.cfg));
  return s;
}

// Frozen source coefficients: cp = c on the premium state, everything else 0.
class ConstantSourceGeneral : public GeneralStrategy {
 public:
  explicit ConstantSourceGeneral(double c) : c_(c) {}
  void coefficients(const ShapeView&, const Scenario&, const Precomputed& pre,
                    std::vector<double>& cp, std::vector<double>& cr,
                    std::vector<double>& f) const override {
    for (int k = 0; k < pre.model.states(); ++k) cp[k] = cr[k] = f[k] = 0.0;
    cp[0] = c_;
  }

 private:
  double c_;
};

class ConstantStateIndep : public StateIndepStrategy {
 public:
  ConstantStateIndep(double d0, double d2) : d0_(d0), d2_(d2) {}
  void coefficients(const ShapeView&, const Scenario&, const Precomputed&, double& d0,
                    double& d2) const override {
    d0 = d0_;
    d2 = d2_;
  }

 private:
  double d0_, d2_;
};

}  // namespace bonusproj::testing

#endif
