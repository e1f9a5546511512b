#include "doctest.h"
#include "vcg/model.hpp"

using namespace vcg;

namespace {
ModelParams linear_params(int n = 10, double gamma = 0.0, double kappa = 0.1) {
  return ModelParams(StateSpace(n), gamma, CostSpec::linear(kappa),
                     TypeDistribution::uniform(n + gamma + 1.0));
}
}  // namespace

TEST_CASE("expected_payoff is the arithmetic mean of the members") {
  CHECK(expected_payoff(Message::from_members({7}, 10)) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(expected_payoff(Message::from_members({2, 4, 9}, 10)) ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK(expected_payoff(Message::from_members({1, 8, 9, 10}, 10)) ==
        doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("expected_payoff stays between the extreme members") {
  const StateSpace states(10);
  for (std::uint32_t b = 1; b < (1u << 10); ++b) {
    const Message j(b);
    CHECK(j.mean() >= j.min_member());
    CHECK(j.mean() <= j.max_member());
  }
}

TEST_CASE("message invariants and parsing") {
  CHECK_THROWS_AS(Message(0), std::invalid_argument);
  CHECK_THROWS_AS(Message::from_members({0}, 10), std::invalid_argument);
  CHECK_THROWS_AS(Message::from_members({11}, 10), std::invalid_argument);
  CHECK(Message::parse("10;3", 10) == Message::from_members({3, 10}, 10));
  CHECK(Message::parse("3;8;9;10", 10).str() == "3;8;9;10");
}

TEST_CASE("cost_eval") {
  CHECK(cost_eval(CostSpec::linear(0.1), 3.0, 7.5) == doctest::Approx(0.45));
  CHECK(cost_eval(CostSpec::linear(0.1), 4.0, 4.0) == 0.0);
  CHECK(cost_eval(CostSpec::quadratic(0.05), 4.0, 4.0) == 0.0);
  CHECK(cost_eval(CostSpec::zero(), 1.0, 10.0) == 0.0);

  CostSpec table{CostSpec::Variant::Table, 0.0, {{1.0, 2.0, 0.3}}};
  CHECK(cost_eval(table, 1.0, 2.0) == doctest::Approx(0.3));
  CHECK_THROWS_AS(cost_eval(table, 1.0, 3.0), std::domain_error);
}

TEST_CASE("validate_cost") {
  const StateSpace states(10);
  CHECK(validate_cost(CostSpec::linear(0.1), states).pass);
  CHECK(validate_cost(CostSpec::zero(), states).pass);

  const auto fail = validate_cost(CostSpec::linear(1.5), states);
  CHECK_FALSE(fail.pass);
  CHECK(fail.violated == "iv");
}

TEST_CASE("linear cost passes exactly when kappa < 1, N in 2..12") {
  for (int n = 2; n <= 12; ++n) {
    const StateSpace states(n);
    CHECK(validate_cost(CostSpec::linear(0.99), states).pass);
    CHECK_FALSE(validate_cost(CostSpec::linear(1.0), states).pass);
  }
}

TEST_CASE("utility evaluates Eq-1 components") {
  auto p0 = linear_params(10, 0.0);
  CHECK(utility(3, Message::singleton(3), 2.0, p0, 0.7) == doctest::Approx(3.0));
  CHECK(utility(3, Message::from_members({5, 10}, 10), 1.2, p0, 0.0) == doctest::Approx(5.85));

  ModelParams p1(StateSpace(10), 1.0, CostSpec::zero(), TypeDistribution::uniform(12.0));
  CHECK(utility(2, Message::singleton(10), 0.0, p1, 0.5) == doctest::Approx(10.5));
}

TEST_CASE("utility_anonymous drops the social identity term") {
  auto p = linear_params();
  CHECK(utility_anonymous(3, Message::from_members({3, 8, 9, 10}, 10), 5.0, p) ==
        doctest::Approx(7.5));
  CHECK(utility_anonymous(10, Message::singleton(10), 3.0, p) == doctest::Approx(10.0));
  CHECK(utility_anonymous(3, Message::singleton(10), 1.2, p) == doctest::Approx(8.1));
}

TEST_CASE("utility identity: full utility = anonymous + gamma * rho") {
  ModelParams p(StateSpace(8), 2.5, CostSpec::linear(0.2), TypeDistribution::uniform(12.0));
  for (std::uint32_t b = 1; b < (1u << 8); ++b) {
    const Message j(b);
    for (int i = 1; i <= 8; i += 3)
      for (double t : {0.0, 1.3, 7.7})
        for (double rho : {0.0, 0.4, 1.0})
          CHECK(utility(i, j, t, p, rho) ==
                doctest::Approx(utility_anonymous(i, j, t, p) + p.gamma * rho).epsilon(1e-12));
  }
}

TEST_CASE("truthful utility is independent of t") {
  auto p = linear_params();
  const Message j = Message::from_members({4, 9}, 10);
  CHECK(utility_anonymous(4, j, 0.0, p) == utility_anonymous(4, j, 11.0, p));
}

TEST_CASE("truthfulness / precision predicates") {
  CHECK(is_truthful(3, Message::from_members({3, 5}, 10)));
  CHECK_FALSE(is_truthful(3, Message::from_members({4, 5}, 10)));
  CHECK(is_truthful(10, Message::singleton(10)));
  CHECK(is_precise(Message::singleton(4)));
  CHECK(is_vague(Message::from_members({4, 5}, 10)));
  CHECK(is_vague(Message::full(10)));
}

TEST_CASE("ModelParams rejects N + gamma >= T") {
  CHECK_THROWS_AS(
      ModelParams(StateSpace(10), 3.0, CostSpec::linear(0.1), TypeDistribution::uniform(13.0)),
      std::invalid_argument);
  CHECK_NOTHROW(
      ModelParams(StateSpace(10), 2.0, CostSpec::linear(0.1), TypeDistribution::uniform(13.0)));
}

TEST_CASE("type distribution tables") {
  auto d = TypeDistribution::from_table({{0.0, 0.0}, {1.0, 0.25}, {4.0, 1.0}});
  CHECK(d.cdf(0.5) == doctest::Approx(0.125));
  CHECK(d.cdf(2.5) == doctest::Approx(0.625));
  CHECK(d.quantile(0.25) == doctest::Approx(1.0));
  CHECK(d.quantile(d.cdf(3.3)) == doctest::Approx(3.3));
  CHECK_THROWS_AS(TypeDistribution::from_table({{0.0, 0.0}, {1.0, 0.5}, {2.0, 0.5}, {3.0, 1.0}}),
                  std::invalid_argument);
}
