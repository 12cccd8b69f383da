#ifndef BONUSPROJ_CONFIG_HPP
#define BONUSPROJ_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bonusproj/projection.hpp"

namespace bonusproj {

// Parsed key-value document.  Rate and payment entries stay as expression
// text until build time so the premium placeholder can be resolved late.
struct RunConfig {
  // [product]
  double age0 = 40.0;
  double horizon = 70.0;
  std::string premium = "0";  // number, or "equivalence" to solve for it
  std::map<int, std::string> sojourn;
  std::map<int, std::string> bonus_sojourn;
  std::map<std::pair<int, int>, std::string> lump;
  std::map<std::pair<int, int>, std::string> bonus_lump;

  // [technical_basis]
  std::string technical_interest = "0";
  std::map<std::pair<int, int>, std::string> technical_rates;

  // [market_basis]
  std::map<std::pair<int, int>, std::string> market_rates;

  // [esg]
  double beta = 0.0, alpha = 0.0, sigma = 0.0, r0 = 0.0;

  // [strategy]
  double kappa = 0.2;

  // [run]
  int scenarios = 1000;
  double step = 0.01;
  std::uint64_t seed = 1;
  std::string mode = "both";  // general | state-independent | both
  double u0 = 0.0, q0 = 0.0;
  int workers = 0;
  double anchor_step = 0.1;
  std::size_t max_grid_bytes = std::size_t(2) << 30;
  std::string output_dir = ".";
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// All problems found, empty when the config is runnable.
std::vector<std::string> validate_config(const RunConfig& cfg);

// Parses one rate/payment expression into a TimeFn on [0, horizon].
// Grammar:  expr  := piece ('until' NUM ('then' expr)? | 'from' NUM)?
//           piece := ['-'] (NUM '*' atom | atom)
//           atom  := gm(a,b,c) | expdecay(a,b) | linear(a,b) | premium | NUM
// gm and expdecay act on age0 + t, linear and constants on contract time t.
TimeFn parse_rate_expr(const std::string& text, double age0, double horizon,
                       double premium_value);

struct ModelInputs {
  StateModel model;
  TechnicalBasis technical;
  TransitionRateSet market;
  VasicekParams esg;
  TimeGrid fine;
  ProjectionConfig projection;
  bool premium_equivalence = false;
  double premium_value = 0.0;  // resolved number when not equivalence
};

// Builds everything except the payment set, which depends on the premium.
ModelInputs build_inputs(const RunConfig& cfg);

PaymentSpec build_payments(const RunConfig& cfg, double premium_value);

}  // namespace bonusproj

#endif
