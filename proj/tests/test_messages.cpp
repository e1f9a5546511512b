#include <algorithm>

#include "doctest.h"
#include "vcg/messages.hpp"

using namespace vcg;

TEST_CASE("enumerate_messages covers the full lattice in canonical order") {
  const auto m2 = enumerate_messages(StateSpace(2));
  REQUIRE(m2.size() == 3);
  CHECK(m2[0] == Message::singleton(1));
  CHECK(m2[1] == Message::singleton(2));
  CHECK(m2[2] == Message::from_members({1, 2}, 2));

  CHECK(enumerate_messages(StateSpace(10)).size() == 1023);

  int vague = 0;
  for (const auto& j : enumerate_messages(StateSpace(3)))
    if (is_vague(j)) ++vague;
  CHECK(vague == 4);

  CHECK_THROWS_AS(enumerate_messages(StateSpace(21)), std::length_error);
}

TEST_CASE("ovm formula on the N=10 benchmark states") {
  const StateSpace states(10);
  CHECK(ovm(1, states) == Message::from_members({1, 8, 9, 10}, 10));
  CHECK(ovm(1, states).mean() == doctest::Approx(7.0));
  CHECK(ovm(9, states) == Message::from_members({9, 10}, 10));
  CHECK(ovm(9, states).mean() == doctest::Approx(9.5));
  CHECK(ovm(10, states) == Message::singleton(10));  // tail past N, honest maximum
  CHECK(ovm(6, states) == Message::from_members({6, 9, 10}, 10));
  CHECK(ovm(8, states) == Message::from_members({8, 10}, 10));
}

TEST_CASE("ovm brute-force oracle") {
  const StateSpace states(10);
  auto r1 = ovm_bruteforce(1, states);
  CHECK(r1.best_mean == doctest::Approx(7.0));
  const Message tie_a = Message::from_members({1, 8, 9, 10}, 10);
  const Message tie_b = Message::from_members({1, 7, 8, 9, 10}, 10);
  CHECK(std::count(r1.all_maximizers.begin(), r1.all_maximizers.end(), tie_a) == 1);
  CHECK(std::count(r1.all_maximizers.begin(), r1.all_maximizers.end(), tie_b) == 1);

  auto r5 = ovm_bruteforce(5, states);
  CHECK(r5.best_mean == doctest::Approx(8.0));
  CHECK(std::count(r5.all_maximizers.begin(), r5.all_maximizers.end(),
                   Message::from_members({5, 9, 10}, 10)) == 1);
  CHECK(std::count(r5.all_maximizers.begin(), r5.all_maximizers.end(),
                   Message::from_members({5, 8, 9, 10}, 10)) == 1);

  auto r22 = ovm_bruteforce(2, StateSpace(2));
  CHECK(r22.best_mean == doctest::Approx(2.0));
  REQUIRE(r22.all_maximizers.size() == 1);
  CHECK(r22.all_maximizers[0] == Message::singleton(2));
}

TEST_CASE("ovm matches the brute-force oracle for all N in 2..12") {
  for (int n = 2; n <= 12; ++n) {
    const StateSpace states(n);
    for (int i = 1; i <= n; ++i) {
      const Message m = ovm(i, states);
      const auto oracle = ovm_bruteforce(i, states);
      CHECK(std::abs(m.mean() - oracle.best_mean) < 1e-12);
      CHECK(std::count(oracle.all_maximizers.begin(), oracle.all_maximizers.end(), m) == 1);
      // shape: contains i, nothing strictly between i and the tail start
      CHECK(m.contains(i));
      const int x = ovm_tail_start(i, states);
      for (int s = i + 1; s < x; ++s) CHECK_FALSE(m.contains(s));
    }
  }
}

TEST_CASE("best_lie") {
  auto params = ModelParams::defaults(10, 0.0);
  auto r = best_lie(3, params);
  CHECK(r.message == Message::singleton(10));
  CHECK(r.value == doctest::Approx(9.3));

  ModelParams zero(StateSpace(10), 0.0, CostSpec::zero(), TypeDistribution::uniform(11.0));
  auto rz = best_lie(3, zero);
  CHECK(rz.message == Message::singleton(10));
  CHECK(rz.value == doctest::Approx(10.0));

  auto rtop = best_lie(10, params);
  CHECK(rtop.message == Message::singleton(9));
  CHECK(rtop.value == doctest::Approx(8.9));
}

TEST_CASE("best_lie never contains the true state") {
  auto params = ModelParams::defaults(8, 0.0);
  for (int i = 1; i <= 8; ++i) CHECK_FALSE(best_lie(i, params).message.contains(i));
}

TEST_CASE("is_interval") {
  CHECK(is_interval(Message::from_members({6, 7, 8}, 10)));
  CHECK_FALSE(is_interval(Message::from_members({6, 8}, 10)));
  CHECK(is_interval(Message::from_members({9, 10}, 10)));
  CHECK_FALSE(is_interval(Message::singleton(4)));
}

TEST_CASE("classify_message with unknown true state") {
  const StateSpace states(10);
  auto a = classify_message(Message::from_members({6, 9, 10}, 10), std::nullopt, states);
  CHECK(a.kind == MessageKind::PseudoOptimal);

  auto b = classify_message(Message::from_members({6, 7, 8, 9, 10}, 10), std::nullopt, states);
  CHECK(b.kind == MessageKind::OtherVague);
  CHECK(b.interval_flag);

  auto c = classify_message(Message::singleton(7), std::nullopt, states);
  CHECK(c.kind == MessageKind::PreciseUnknownTruth);

  auto d = classify_message(Message::from_members({3, 7}, 10), std::nullopt, states);
  CHECK(d.kind == MessageKind::Pair);

  // pseudo-optimal precedence over pair
  auto e = classify_message(Message::from_members({8, 10}, 10), std::nullopt, states);
  CHECK(e.kind == MessageKind::PseudoOptimal);
}

TEST_CASE("classify_message with known true state") {
  const StateSpace states(10);
  auto a = classify_message(Message::from_members({8, 10}, 10), 8, states);
  CHECK(a.kind == MessageKind::Optimal);

  auto b = classify_message(Message::singleton(4), 4, states);
  CHECK(b.kind == MessageKind::PreciseTruthful);

  auto c = classify_message(Message::singleton(10), 4, states);
  CHECK(c.kind == MessageKind::PreciseLie);

  auto d = classify_message(Message::from_members({4, 10}, 10), 4, states);
  CHECK(d.kind == MessageKind::Pair);

  auto e = classify_message(Message::from_members({9, 10}, 10), 9, states);
  CHECK(e.kind == MessageKind::Optimal);  // interval that is also the OVM
  CHECK(e.interval_flag);
}

TEST_CASE("classification is total and precise-lie coherent") {
  const StateSpace states(6);
  for (const auto& j : enumerate_messages(states)) {
    for (int i = 1; i <= 6; ++i) {
      const auto label = classify_message(j, i, states);
      CHECK((label.kind == MessageKind::PreciseLie) ==
            (is_precise(j) && !is_truthful(i, j)));
    }
    (void)classify_message(j, std::nullopt, states);
  }
}
