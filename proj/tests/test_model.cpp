#include "ncpoa/model.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace ncpoa;
using doctest::Approx;

TEST_CASE("validate_scenario accepts a plain two-user instance") {
  CHECK(validate_scenario(oracle::linear({1, 1}, 1.0, 0.5)).empty());
}

TEST_CASE("validate_scenario names the offending field") {
  auto s = oracle::linear({1, 1});
  s.a = 0.0;
  auto v = validate_scenario(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "a must be > 0");

  s = oracle::linear({1, 1}, 1.0, 1.5);
  v = validate_scenario(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "beta must lie in (0,1]");

  s = oracle::with_side(oracle::linear({1, 1}), 0.0, 1.0);
  v = validate_scenario(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "a1 must be > 0");

  s = oracle::linear({1});
  CHECK(validate_scenario(s).front() == "n_users must be >= 2");

  s = oracle::linear({1, -2});
  CHECK(validate_scenario(s).front() == "utilities[1]: gamma must be > 0");

  s.utilities[1] = UtilityFunction::alpha_fair(1.0);
  CHECK(validate_scenario(s).front() == "utilities[1]: alpha must lie in (0,1)");
  CHECK_THROWS_AS(require_valid(s), std::invalid_argument);
}

TEST_CASE("alpha-fair evaluation") {
  const auto u = UtilityFunction::alpha_fair(0.5);
  CHECK(u.marginal(4.0) == Approx(0.5));
  const auto inv = u.inverse_marginal(2.0);
  REQUIRE(inv.is_finite());
  CHECK(inv.rate == Approx(0.25));
  CHECK(u.value(0.0) == 0.0);
  CHECK(std::isinf(u.marginal(0.0)));
  CHECK_THROWS_AS(u.value(-1.0), std::domain_error);
}

TEST_CASE("linear evaluation and the three-way inverse") {
  const auto u = UtilityFunction::linear(3.0);
  CHECK(u.value(2.0) == 6.0);
  CHECK(u.marginal(0.0) == 3.0);
  CHECK(u.marginal(17.0) == 3.0);
  CHECK(u.inverse_marginal(2.0).kind == MarginalInverse::Kind::Unbounded);
  CHECK(u.inverse_marginal(4.0).kind == MarginalInverse::Kind::Finite);
  CHECK(u.inverse_marginal(4.0).rate == 0.0);
  CHECK(u.inverse_marginal(3.0).kind == MarginalInverse::Kind::Indeterminate);
  CHECK_THROWS_AS(u.inverse_marginal(0.0), std::domain_error);
  CHECK_THROWS_AS(UtilityFunction::alpha_fair(0.5).gamma(), std::logic_error);
}

TEST_CASE("link price and cost") {
  CHECK(link_price(2.0, 3.0) == 6.0);
  CHECK(link_cost(2.0, 3.0) == 9.0);
  CHECK(link_price(1.0, 0.0) == 0.0);
  CHECK(link_cost(1.0, 0.0) == 0.0);
  CHECK(link_cost(1.0, 1.0) == 0.5);
  CHECK_THROWS_AS(link_cost(1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(link_price(1.0, -1.0), std::domain_error);
}

TEST_CASE("Game 2 payoffs with split coded charge") {
  const auto s = oracle::linear({1, 1}, 1.0, 0.5);
  RateVector x(2);
  x << 2, 1;
  CHECK(payoff(Game::Coding, s, 0, x) == Approx(-1.0));
  CHECK(payoff(Game::Coding, s, 1, x) == Approx(0.0));
  x << 1, 1;
  CHECK(payoff(Game::Coding, s, 0, x) == Approx(0.5));
}

TEST_CASE("zero profile pays nothing and earns nothing") {
  auto s = oracle::linear({1, 2, 3}, 1.0, 0.5);
  const RateVector zero = RateVector::Zero(3);
  for (int n = 0; n < 3; ++n) {
    CHECK(payoff(Game::Routing, s, n, zero) == 0.0);
    CHECK(payoff(Game::Coding, s, n, zero) == 0.0);
  }
  s = oracle::with_side(s, 1.0, 1.0);
  for (int n = 0; n < 3; ++n) CHECK(payoff(s, n, FlowAllocation::zeros(3)) == 0.0);
  CHECK(surplus(s, FlowAllocation::zeros(3)) == 0.0);
}

TEST_CASE("surplus examples") {
  const auto s = oracle::linear({1, 1});
  RateVector x(2);
  x << 2, 2;
  CHECK(surplus(Game::Coding, s, x) == Approx(2.0));
  x << 1, 1;
  CHECK(surplus(Game::Coding, s, x) == Approx(1.5));
}

TEST_CASE("payoff and surplus argument errors") {
  const auto s = oracle::linear({1, 1});
  const RateVector x = RateVector::Zero(2);
  CHECK_THROWS_AS(payoff(Game::Routing, s, 2, x), std::out_of_range);
  CHECK_THROWS_AS(payoff(Game::Routing, s, -1, x), std::out_of_range);
  CHECK_THROWS_AS(payoff(Game::CostlySide, s, 0, Profile{x}), std::invalid_argument);
  CHECK_THROWS_AS(payoff(Game::Coding, s, 0, Profile{FlowAllocation::zeros(2)}), std::invalid_argument);
  CHECK_THROWS_AS(payoff(s, 0, FlowAllocation::zeros(2)), std::invalid_argument);  // no side links
  CHECK_THROWS_AS(surplus(Game::Routing, s, RateVector(RateVector::Zero(3))), std::invalid_argument);
}

TEST_CASE("Game 3 payoff decodes only what the peer remedies") {
  const auto s = oracle::with_side(oracle::linear({2, 1}, 1.0, 0.5), 0.5, 0.5);
  auto f = FlowAllocation::zeros(2);
  f.y << 1, 0;
  f.z1 = 1.0;  // coded, but user N sends no remedy
  // decoded 1; sent 1 + 1 - 0.5 * min(1, 0) = 2; load 1 + 1 = 2.
  CHECK(payoff(s, 0, f) == Approx(2.0 - 2.0 * 2.0));
  f.vN = 1.0;
  CHECK(payoff(s, 0, f) == Approx(4.0 - 2.0 * 2.0));
  // User N pays the remedy at its own slope: 1 * 0.5 * 1.
  CHECK(payoff(s, 1, f) == Approx(0.0 - 0.5));
}

TEST_CASE("utilities are increasing and concave on random grids") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto u = trial % 2 ? UtilityFunction::linear(oracle::uniform(rng, 0.1, 5))
                             : UtilityFunction::alpha_fair(oracle::uniform(rng, 0.01, 0.99),
                                                           oracle::uniform(rng, 0.1, 10));
    double x = oracle::uniform(rng, 0.0, 10.0);
    double y = x + oracle::uniform(rng, 1e-3, 10.0);
    CHECK(u.value(x) < u.value(y));
    if (x > 0) CHECK(u.marginal(x) >= u.marginal(y));
  }
}

TEST_CASE("inverse marginal undoes the marginal") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto u = UtilityFunction::alpha_fair(oracle::uniform(rng, 0.05, 0.95), oracle::uniform(rng, 0.1, 10));
    const double x = std::exp(oracle::uniform(rng, -6.0, 6.0));
    const auto inv = u.inverse_marginal(u.marginal(x));
    REQUIRE(inv.is_finite());
    CHECK(std::fabs(inv.rate - x) <= 1e-10 * x);
  }
}

TEST_CASE("coding users split the coded charge at beta = 1/2") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 4;
    std::vector<double> g(n);
    for (auto& v : g) v = oracle::uniform(rng, 0.1, 3);
    const auto s = oracle::linear(g, oracle::uniform(rng, 0.5, 3), 0.5);
    RateVector x(n);
    for (int i = 0; i < n; ++i) x(i) = oracle::uniform(rng, 0, 2);
    x(n - 1) = x(0);
    const double mu = link_price(s.a, coded_load(s, x));
    // Together the coders pay for one copy of the coded flow.
    CHECK(coded_payments(s, x) == Approx(coded_load(s, x) * mu));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += payoff(Game::Coding, s, i, x);
    CHECK(surplus(Game::Coding, s, x) == Approx(sum + coded_payments(s, x) - link_cost(s.a, coded_load(s, x))));
  }
}

TEST_CASE("coder payoff is concave in its own rate") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 3;
    Scenario s;
    s.a = oracle::uniform(rng, 0.1, 10);
    s.beta = trial % 2 ? 0.5 : oracle::uniform(rng, 0.05, 1.0);
    for (int i = 0; i < n; ++i) {
      if (trial % 3 == 0) s.utilities.push_back(UtilityFunction::linear(oracle::uniform(rng, 0.1, 5)));
      else s.utilities.push_back(UtilityFunction::alpha_fair(oracle::uniform(rng, 0.05, 0.95)));
    }
    RateVector x(n);
    for (int i = 0; i < n; ++i) x(i) = oracle::uniform(rng, 0, 3);
    const double lo = oracle::uniform(rng, 0, 3);
    const double hi = oracle::uniform(rng, 0, 3);
    const double theta = oracle::uniform(rng, 0, 1);
    auto q = [&](double r) {
      RateVector y = x;
      y(0) = r;
      return payoff(Game::Coding, s, 0, y);
    };
    CHECK(q(theta * hi + (1 - theta) * lo) >= theta * q(hi) + (1 - theta) * q(lo) - 1e-9);
  }
}

TEST_CASE("rate_bound puts every marginal below beta*a*x/2") {
  Scenario s;
  s.utilities = {UtilityFunction::alpha_fair(0.5, 3.0), UtilityFunction::linear(4.0)};
  s.a = 0.5;
  s.beta = 0.5;
  const double x = rate_bound(s);
  for (const auto& u : s.utilities) CHECK(u.marginal(x) < 0.5 * s.beta * s.a * x);
}
