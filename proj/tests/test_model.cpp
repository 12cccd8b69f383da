#include <doctest.h>

#include <cmath>

#include "bonusproj/model.hpp"

using namespace bonusproj;

TEST_CASE("state space indexing for the eight-state default") {
  StateModel sm;
  CHECK(sm.J == 3);
  CHECK(sm.states() == 8);
  CHECK(sm.surrender() == 3);
  CHECK(sm.fp_start() == 4);
  CHECK(sm.fp_surrender() == 7);
  CHECK(sm.fp(0) == 4);
  CHECK(sm.fp(2) == 6);
  CHECK(sm.base(4) == 0);
  CHECK(sm.base(7) == 3);
  CHECK(sm.premium_state(0));
  CHECK(sm.premium_state(3));
  CHECK(!sm.premium_state(4));
  CHECK(sm.free_state(4));
  CHECK(sm.free_state(7));
  CHECK(!sm.free_state(2));
}

TEST_CASE("transition rate set support and generator") {
  StateModel sm{1};
  TransitionRateSet rates(sm.states());
  rates.set(0, 1, TimeFn::constant(0.3));
  rates.set(0, 2, TimeFn::constant(0.1));

  auto sup = rates.support();
  REQUIRE(sup.size() == 2);
  CHECK(sup[0] == std::pair<int, int>{0, 1});
  CHECK(sup[1] == std::pair<int, int>{0, 2});
  CHECK(rates.has(0, 1));
  CHECK(!rates.has(1, 0));
  CHECK(rates.rate(0, 1, 5.0) == 0.3);

  std::vector<double> gen(16);
  rates.generator(2.0, 2.0, gen.data());
  CHECK(gen[0 * 4 + 0] == doctest::Approx(-0.4));
  CHECK(gen[0 * 4 + 1] == doctest::Approx(0.3));
  CHECK(gen[0 * 4 + 2] == doctest::Approx(0.1));
  for (int j = 0; j < 4; ++j) {
    double row = 0.0;
    for (int k = 0; k < 4; ++k) row += gen[j * 4 + k];
    CHECK(std::fabs(row) < 1e-15);
  }
}

TEST_CASE("tabulated generators pick the branch of the step interior") {
  StateModel sm{1};
  TransitionRateSet rates(sm.states());
  TimeFn mu;
  mu.append(0.0, 1.0, [](double) { return 0.2; });
  mu.append(1.0, 2.0, [](double) { return 0.6; });
  rates.set(0, 1, mu);

  TimeGrid g = TimeGrid::make(2.0, 0.5);
  GeneratorTable tab = tabulate_generator(rates, g);
  CHECK(tab.dim == 4);
  CHECK(int(tab.left.size()) == g.steps);
  const int dim = tab.dim;
  // step [0.5, 1.0]: right stage sits on the jump but still sees the left branch
  CHECK(tab.right[1][0 * dim + 1] == doctest::Approx(0.2));
  // step [1.0, 1.5]: left stage sits on the jump and sees the right branch
  CHECK(tab.left[2][0 * dim + 1] == doctest::Approx(0.6));
  CHECK(tab.mid[2][0 * dim + 1] == doctest::Approx(0.6));
}

TEST_CASE("payment lookup outside the stored states is empty") {
  PaymentSpec pay;
  pay.J = 1;
  pay.sojourn = {TimeFn::constant(5.0)};
  pay.bonus_sojourn = {TimeFn()};
  CHECK(pay.sojourn_at(0)(1.0) == 5.0);
  CHECK(pay.sojourn_at(1)(1.0) == 0.0);
  CHECK(pay.bonus_sojourn_at(0).empty());
  CHECK(pay.bonus_sojourn_at(-1).empty());
}
