#include <doctest.h>

#include <cmath>
#include <string>

#include "helpers.hpp"

using namespace bonusproj;
using namespace bonusproj::testing;

namespace {

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  for (const auto& p : problems)
    if (p.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("rate expression atoms") {
  const double age0 = 40.0, horizon = 70.0;
  const auto gm = parse_rate_expr("gm(0.0004, 4.54, 0.06)", age0, horizon, 0.0);
  CHECK(gm(10.0) == doctest::Approx(0.0004 + std::pow(10.0, 4.54 + 0.06 * 50.0 - 10.0)));

  const auto decay = parse_rate_expr("expdecay(2.0058, 0.117)", age0, horizon, 0.0);
  CHECK(decay(10.0) == doctest::Approx(2.0058 * std::exp(-0.117 * 50.0)));

  const auto lin = parse_rate_expr("linear(0.06, -0.002)", age0, horizon, 0.0);
  CHECK(lin(10.0) == doctest::Approx(0.04));  // contract time, not age

  const auto scaled = parse_rate_expr("2 * gm(0.0005, 5.88, 0.038)", age0, horizon, 0.0);
  CHECK(scaled(5.0) == doctest::Approx(2.0 * (0.0005 + std::pow(10.0, 5.88 + 0.038 * 45.0 - 10.0))));

  const auto neg = parse_rate_expr("-2 * linear(1, 0)", age0, horizon, 0.0);
  CHECK(neg(3.0) == doctest::Approx(-2.0));

  const auto flat = parse_rate_expr("0.05", age0, horizon, 0.0);
  CHECK(flat(69.0) == doctest::Approx(0.05));
}

TEST_CASE("rate expression windows and the premium placeholder") {
  const auto pay = parse_rate_expr("-premium until 25 then 100000", 40.0, 70.0, 500.0);
  CHECK(pay(10.0) == doctest::Approx(-500.0));
  CHECK(pay(30.0) == doctest::Approx(100000.0));
  CHECK(pay(25.0) == doctest::Approx(0.5 * (-500.0 + 100000.0)));
  CHECK(pay(25.0, 24.9) == doctest::Approx(-500.0));
  CHECK(pay(25.0, 25.1) == doctest::Approx(100000.0));

  const auto late = parse_rate_expr("100000 from 25", 40.0, 70.0, 0.0);
  CHECK(late(10.0) == 0.0);
  CHECK(late(30.0) == doctest::Approx(100000.0));

  const auto cut = parse_rate_expr("0.05 until 25", 40.0, 70.0, 0.0);
  CHECK(cut(10.0) == doctest::Approx(0.05));
  CHECK(cut(30.0) == 0.0);
}

TEST_CASE("rate expression errors") {
  CHECK_THROWS_WITH_AS(parse_rate_expr("0.05 until 80", 40.0, 70.0, 0.0),
                       doctest::Contains("cutoff outside the horizon"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_rate_expr("bogus(1)", 40.0, 70.0, 0.0),
                       doctest::Contains("unknown function"), ConfigError);
  CHECK_THROWS_AS(parse_rate_expr("gm(1, 2)", 40.0, 70.0, 0.0), ConfigError);
  CHECK_THROWS_AS(parse_rate_expr("0.05 what", 40.0, 70.0, 0.0), ConfigError);
  CHECK_THROWS_AS(parse_rate_expr("", 40.0, 70.0, 0.0), ConfigError);
  CHECK_THROWS_WITH_AS(parse_rate_expr("100000 from 75", 40.0, 70.0, 0.0),
                       doctest::Contains("start outside the horizon"), ConfigError);
}

TEST_CASE("config text parsing keeps the last value and reopened sections") {
  const RunConfig cfg = parse_config_text(
      "[product]\nage0 = 30\n[run]\nseed = 3\nseed = 9\n[product]\nhorizon = 50\n");
  CHECK(cfg.age0 == 30.0);
  CHECK(cfg.seed == 9);
  CHECK(cfg.horizon == 50.0);
  CHECK(cfg.mode == "both");
}

TEST_CASE("config text errors carry locations") {
  CHECK_THROWS_WITH_AS(parse_config_text("[product]\nbogus = 1\n"),
                       doctest::Contains("unknown key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[nowhere]\nkey = 1\n"),
                       doctest::Contains("unknown section [nowhere]"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("just words\n"),
                       doctest::Contains("expected key = value"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[esg]\nbeta = abc\n"),
                       doctest::Contains("not a number"), ConfigError);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/nothing.ini"), ConfigError);
}

TEST_CASE("the shipped product validates clean") {
  CHECK(validate_config(disability_config()).empty());
}

TEST_CASE("validation rejects broken run settings") {
  RunConfig cfg = disability_config();
  cfg.sigma = -0.1;
  cfg.alpha = 0.0;
  cfg.mode = "sideways";
  cfg.step = 0.03;
  cfg.scenarios = 0;
  const auto problems = validate_config(cfg);
  CHECK(mentions(problems, "esg.sigma must be nonnegative"));
  CHECK(mentions(problems, "esg.alpha must be positive"));
  CHECK(mentions(problems, "run.mode must be general, state-independent or both"));
  CHECK(mentions(problems, "run.step does not divide the horizon"));
  CHECK(mentions(problems, "run.scenarios must be at least 1"));

  RunConfig anchor = disability_config();
  anchor.anchor_step = 0.05;  // not a multiple of step 0.02
  CHECK(mentions(validate_config(anchor), "run.anchor_step must be a positive multiple"));
}

TEST_CASE("validation pins the transition topology") {
  RunConfig surr = disability_config();
  surr.technical_rates[{0, 3}] = "0.01";
  CHECK(mentions(validate_config(surr), "free-policy states mirror the premium states"));

  RunConfig dead = disability_config();
  dead.technical_rates[{2, 0}] = "0.01";
  CHECK(mentions(validate_config(dead), "the dead state is absorbing"));

  RunConfig hop = disability_config();
  hop.market_rates[{1, 3}] = "0.01";
  CHECK(mentions(validate_config(hop), "transition not in the model topology"));

  RunConfig free_rate = disability_config();
  free_rate.market_rates[{4, 7}] = "linear(0.05, 0)";
  CHECK(mentions(validate_config(free_rate), "does not mirror"));

  RunConfig literal_mirror = disability_config();
  literal_mirror.market_rates[{4, 5}] = literal_mirror.market_rates[{0, 1}];
  CHECK(validate_config(literal_mirror).empty());
}

TEST_CASE("inputs mirror the market rates onto the free states") {
  const auto& s = disability_setup(0.02);
  const ModelInputs& in = s.in;
  CHECK(in.model.J == 3);
  CHECK(in.model.states() == 8);
  CHECK(in.fine.steps == 3500);
  CHECK(in.premium_equivalence == false);
  CHECK(in.premium_value == doctest::Approx(46409.96));

  for (double t : {5.0, 20.0, 40.0}) {
    CHECK(in.market.rate(4, 5, t) == doctest::Approx(in.market.rate(0, 1, t)));
    CHECK(in.market.rate(5, 4, t) == doctest::Approx(in.market.rate(1, 0, t)));
    CHECK(in.market.rate(4, 6, t) == doctest::Approx(in.market.rate(0, 2, t)));
    CHECK(in.market.rate(4, 7, t) == doctest::Approx(in.market.rate(0, 3, t)));
  }
  CHECK_FALSE(in.technical.rates.has(0, 3));
  CHECK_FALSE(in.technical.rates.has(0, 4));
  CHECK_FALSE(in.market.has(4, 0));  // conversion is not mirrored

  RunConfig eq = disability_config();
  eq.premium = "equivalence";
  CHECK(build_inputs(eq).premium_equivalence);
}

TEST_CASE("payments resolve the premium and the retirement switch") {
  const PaymentSpec pay = build_payments(disability_config(), 500.0);
  CHECK(pay.J == 3);
  CHECK(pay.sojourn_at(0)(10.0) == doctest::Approx(-500.0));
  CHECK(pay.sojourn_at(0)(30.0) == doctest::Approx(100000.0));
  CHECK(pay.sojourn_at(1)(30.0) == doctest::Approx(100000.0));
  CHECK(pay.bonus_sojourn_at(0)(10.0) == 0.0);
  CHECK(pay.bonus_sojourn_at(0)(30.0) == doctest::Approx(100000.0));
  CHECK(pay.sojourn_at(2).empty());
}
