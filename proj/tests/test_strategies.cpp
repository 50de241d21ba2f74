#include <doctest.h>

#include <cmath>
#include <memory>

#include "experts/errors.hpp"
#include "experts/exact.hpp"
#include "experts/strategies.hpp"
#include "oracle/brute_force.hpp"

using namespace experts;

namespace {

Decomposition two_parts(std::initializer_list<Count> first, std::initializer_list<Count> second) {
  const std::vector<Count> a(first), b(second);
  Decomposition dec(2, static_cast<int>(a.size()) - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    dec.at(0, static_cast<int>(i)) = a[i];
    dec.at(1, static_cast<int>(i)) = b[i];
  }
  return dec;
}

}  // namespace

TEST_CASE("potential forecaster follows a unanimous vote") {
  PotentialForecaster f(Potential::fc(2.0));
  const auto p = f.forecast(State{3, 1}, two_parts({3, 1}, {0, 0}));
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.0));
}

TEST_CASE("potential forecaster with the perfect-expert potential") {
  PotentialForecaster f(Potential::perfect_expert());
  auto p = f.forecast(State{2}, two_parts({1}, {1}));
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  p = f.forecast(State{4}, two_parts({3}, {1}));
  CHECK(p[0] == doctest::Approx(0.75));
  CHECK(p[1] == doctest::Approx(0.25));
}

TEST_CASE("potential forecaster reports an invalid potential") {
  PotentialForecaster f(Potential::linear());
  Decomposition dec(3, 1);
  for (int j = 0; j < 3; ++j) dec.at(j, 0) = 1;
  CHECK_THROWS_AS(f.forecast(State{3, 0}, dec), CertificationViolation);
}

TEST_CASE("certified potentials always give valid forecasts") {
  PotentialForecaster f(Potential::fc(2.0));
  for (int d : {2, 3}) {
    for (const State& s : states_up_to_phi(1, 8)) {
      DecompositionCursor cursor(s, ChoiceSet::prefix(d), d);
      do {
        auto p = f.forecast(s, cursor.current());
        CHECK_NOTHROW(validate_forecast(p, d));
        for (int j = 0; j < d; ++j) {
          if (successor(s, cursor.current(), j).is_zero()) CHECK(p[j] == 0.0);
        }
      } while (cursor.next());
    }
  }
}

TEST_CASE("multiplicative weights") {
  MultiplicativeWeights mw(std::log(2.0));
  auto p = mw.forecast(State{4}, two_parts({2}, {2}));
  CHECK(p[0] == doctest::Approx(0.5));
  // Two experts erred once: weights 1, 1, 1/2, 1/2.
  p = mw.forecast(State{2, 2}, two_parts({2, 0}, {0, 2}));
  CHECK(p[0] == doctest::Approx(2.0 / 3.0));
  p = mw.forecast(State{2, 2}, two_parts({2, 2}, {0, 0}));
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(MultiplicativeWeights(0.0), DomainError);
}

TEST_CASE("leader baselines") {
  MajorityOfLeaders maj;
  RandomLeader rl;
  auto p = maj.forecast(State{4, 3}, two_parts({3, 0}, {1, 3}));
  CHECK(p == std::vector<double>{1.0, 0.0});
  p = rl.forecast(State{4, 3}, two_parts({3, 0}, {1, 3}));
  CHECK(p[0] == doctest::Approx(0.75));
  p = maj.forecast(State{4}, two_parts({2}, {2}));
  CHECK(p == std::vector<double>{1.0, 0.0});
  p = rl.forecast(State{4}, two_parts({2}, {2}));
  CHECK(p[0] == doctest::Approx(0.5));
  // Leaders are on level 1 here.
  p = maj.forecast(State{0, 1, 5}, [] {
    Decomposition d(2, 2);
    d.at(1, 1) = 1;
    d.at(0, 2) = 5;
    return d;
  }());
  CHECK(p == std::vector<double>{0.0, 1.0});
}

TEST_CASE("binary majority rule") {
  CHECK(binary_majority_rule(1.0) == doctest::Approx(1.0));
  CHECK(binary_majority_rule(0.5) == doctest::Approx(0.5));
  CHECK(binary_majority_rule(0.75) == doctest::Approx(0.79248).epsilon(1e-5));
  CHECK_THROWS_AS(binary_majority_rule(0.4), DomainError);
  CHECK_THROWS_AS(binary_majority_rule(1.1), DomainError);
}

TEST_CASE("even split") {
  CHECK(even_split(State{4}).to_parts_string() == "2|2");
  CHECK(even_split(State{5, 2}).to_parts_string() == "2,1|3,1");
  CHECK(even_split(State{3, 3}).to_parts_string() == "1,1|2,2");
  for (int b : {0, 1, 2, 3}) {
    for (const State& s : states_up_to_phi(b, 12)) {
      const Decomposition dec = even_split(s);
      CHECK(dec.decomposes(s));
      for (int i = 0; i <= b; ++i) {
        const auto x = dec.at(0, i), y = dec.at(1, i);
        CHECK((x > y ? x - y : y - x) <= 1);
      }
    }
  }
  CHECK_THROWS_AS(EvenSplitAdversary(3), DomainError);
}

TEST_CASE("even-split adversary never draws an empty successor") {
  EvenSplitAdversary adv;
  for (const State& s : states_up_to_phi(2, 10)) {
    const AdversaryPlay play = adv.play(s);
    for (int j : play.support.members()) CHECK_FALSE(successor(s, play.dec, j).is_zero());
    CHECK(play.coinflip == (play.support.size() == 2));
  }
  // (0,1): k_0 = 0 is even, so the odd expert goes to choice 1 and choice 2
  // would empty the state.
  const AdversaryPlay play = adv.play(State{0, 1});
  CHECK(play.dec.to_parts_string() == "0,1|0,0");
  CHECK_FALSE(play.coinflip);
  CHECK(play.support == ChoiceSet::of({0}));
}

TEST_CASE("optimal adversary delegates to the solver") {
  SolverConfig cfg;
  cfg.b = 1;
  auto solver = std::make_shared<ExactSolver>(cfg);
  OptimalAdversary adv(solver);
  for (const State& s : states_up_to_phi(1, 8)) {
    if (s.is_absorbing()) continue;
    const AdversaryPlay play = adv.play(s);
    const AdversaryMove move = solver->optimal_adversary_move(s);
    CHECK(play.dec == move.dec);
    CHECK(play.support == move.choices);
  }
  CHECK_THROWS_AS(OptimalAdversary(nullptr), DomainError);
}

TEST_CASE("uniform adversary") {
  UniformAdversary adv(ChoiceSet::of({0, 2}), 3);
  const AdversaryPlay play = adv.play(State{5, 2});
  CHECK(play.dec.to_parts_string() == "3,1|0,0|2,1");
  CHECK(play.support == ChoiceSet::of({0, 2}));
  CHECK_THROWS_AS(UniformAdversary(ChoiceSet::of({3}), 3), DomainError);
}

TEST_CASE("closed-form lower bound") {
  CHECK(lower_bound(32, 1) == 3.0);
  CHECK(lower_bound(32, 0) == 2.5);
  CHECK_THROWS_AS(lower_bound(16, 1), DomainError);
  CHECK(lower_bound_invalid(16, 1).has_value());
  for (std::uint64_t n = 1; n <= 5000; n += 7) {
    for (int b = 0; b <= 2; ++b) {
      if (lower_bound_invalid(n, b)) continue;
      CHECK(lower_bound(n, b) == oracle::lower_bound(n, b).convert_to<double>());
    }
  }
}

TEST_CASE("lower bound <= exact loss for one perfect expert") {
  for (std::uint64_t n = 1; n <= 64; ++n) {
    CHECK(exact_rational(lower_bound(n, 0)) <= perfect_expert_loss(n));
  }
  for (std::uint64_t n = 1; n <= 1024; ++n) {
    CHECK(lower_bound(n, 0) <= to_double(perfect_expert_loss(n)));
    CHECK(to_double(perfect_expert_loss(n)) <= upper_bound(n, 0));
  }
}

TEST_CASE("multiplicative-weights bound") {
  CHECK(mw_bound(32, 0).value == doctest::Approx(std::log(32.0)));
  const MwBound m = mw_bound(32, 1);
  for (double eta : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    CHECK(m.value <= (eta + std::log(32.0)) / (1 - std::exp(-eta)) + 1e-12);
  }
}

TEST_CASE("strategy parsing") {
  CHECK(make_forecaster("potential:fc:2")->name() == "potential:fc:2");
  CHECK(make_forecaster("potential:opt")->name() == "potential:opt");
  CHECK(make_forecaster("mw:0.5")->name() == "mw:0.5");
  CHECK(make_forecaster("majority")->name() == "majority");
  CHECK(make_forecaster("random-leader")->name() == "random-leader");
  CHECK_THROWS_AS(make_forecaster("mw:-1"), DomainError);
  CHECK_THROWS_AS(make_forecaster("best"), DomainError);
  CHECK(make_adversary("even-split", 2)->name() == "even-split");
  CHECK(make_adversary("uniform:1,2", 3)->name() == "uniform:1,2");
  CHECK_THROWS_AS(make_adversary("optimal", 2), DomainError);
  CHECK_THROWS_AS(make_adversary("even-split", 3), DomainError);
}

TEST_CASE("validate_forecast") {
  std::vector<double> p{0.5, 0.5 + 1e-13};
  CHECK_NOTHROW(validate_forecast(p, 2));
  std::vector<double> neg{-1e-13, 1.0};
  validate_forecast(neg, 2);
  CHECK(neg[0] == 0.0);
  std::vector<double> bad{0.4, 0.4};
  CHECK_THROWS_AS(validate_forecast(bad, 2), ProtocolError);
  std::vector<double> short_vec{1.0};
  CHECK_THROWS_AS(validate_forecast(short_vec, 2), ProtocolError);
}
