#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "experts/errors.hpp"
#include "experts/exact.hpp"
#include "experts/sim.hpp"
#include "oracle/brute_force.hpp"

using namespace experts;

namespace {

std::shared_ptr<ExactSolver> make_solver(int b, int d = 2) {
  SolverConfig cfg;
  cfg.b = b;
  cfg.d = d;
  cfg.record_moves = true;
  return std::make_shared<ExactSolver>(cfg);
}

class BrokenAdversary : public Adversary {
 public:
  std::string name() const override { return "broken"; }
  int d() const override { return 2; }
  AdversaryPlay play(const State& state) override {
    Decomposition dec(2, state.b());
    dec.at(0, 0) = state[0] + 1;
    return AdversaryPlay{dec, ChoiceSet::prefix(2), false};
  }
};

}  // namespace

TEST_CASE("a game from the absorbing state costs nothing") {
  PotentialForecaster f(Potential::fc(2.0));
  EvenSplitAdversary adv;
  const Transcript t = play_game(f, adv, State::absorbing(2), 100, 7);
  CHECK(t.rounds.empty());
  CHECK(t.total_loss() == 0);
  CHECK(t.absorbed);
}

TEST_CASE("games are deterministic given the seed") {
  auto f = make_forecaster("potential:opt");
  EvenSplitAdversary adv;
  std::ostringstream a, b, c;
  write_transcript_csv(a, play_game(*f, adv, State{40, 0}, 1000, 11));
  write_transcript_csv(b, play_game(*f, adv, State{40, 0}, 1000, 11));
  write_transcript_csv(c, play_game(*f, adv, State{40, 0}, 1000, 12));
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("transcripts chain through successor()") {
  auto f = make_forecaster("mw:0.7");
  auto solver = make_solver(1);
  for (auto adv_spec : {"even-split", "optimal", "uniform:1,2"}) {
    auto adv = make_adversary(adv_spec, 2, solver);
    const Transcript t = play_game(*f, *adv, State{9, 2}, 10000, 3);
    State s = t.start;
    std::uint64_t losses = 0;
    for (const auto& r : t.rounds) {
      CHECK(r.before == s);
      CHECK(r.after == successor(r.before, r.dec, r.outcome));
      CHECK(r.expected_loss == doctest::Approx(1.0 - r.probs[r.outcome]));
      losses += r.loss;
      s = r.after;
    }
    CHECK(losses == t.total_loss());
    CHECK(s == t.final_state);
  }
}

TEST_CASE("transcript CSV format") {
  auto f = make_forecaster("potential:perfect");
  EvenSplitAdversary adv;
  std::ostringstream out;
  write_transcript_csv(out, play_game(*f, adv, State{2}, 10, 1));
  const std::string text = out.str();
  CHECK(text.rfind("round,state_before,dec,forecast_probs,forecast,outcome,loss,state_after,coinflip\n",
                   0) == 0);
  CHECK(text.find("1,2,\"1|1\",0.500000:0.500000,") != std::string::npos);
}

TEST_CASE("Monte Carlo mean for two perfect experts is 1/2") {
  PotentialForecaster f(Potential::perfect_expert());
  EvenSplitAdversary adv;
  const MonteCarloSummary s = monte_carlo(f, adv, State{2}, 100000, 100, 2024);
  CHECK(std::abs(s.mean_loss - 0.5) <= 3 * s.stderr_loss);
  CHECK(s.mean_expected_loss == doctest::Approx(0.5));
}

TEST_CASE("exact expected loss") {
  auto solver0 = make_solver(0);
  OptimalAdversary opt0(solver0);
  PotentialForecaster perfect(Potential::perfect_expert());
  CHECK(exact_expected_loss(perfect, opt0, State{2}, 100) == Rational(1, 2));

  EvenSplitAdversary even;
  for (const char* spec : {"majority", "random-leader", "mw:0.3", "potential:opt"}) {
    auto f = make_forecaster(spec);
    for (int k = 0; k <= 4; ++k) {
      CHECK(exact_expected_loss(*f, even, State{Count{1} << k}, 100) == Rational(k) / 2);
    }
  }

  MajorityOfLeaders maj;
  CHECK(exact_expected_loss(maj, opt0, State{4}, 100) >= 1);
  CHECK_THROWS_AS(exact_expected_loss(maj, opt0, State{40}, 10), ResourceLimitError);
}

TEST_CASE("minimax sandwich on small states") {
  auto solver = make_solver(1);
  OptimalAdversary adv(solver);
  const Potential f = Potential::fc(2.0);
  REQUIRE(certify(f, 1, 6, 2).certified());
  PotentialForecaster forecaster(f);
  for (const State& s : states_up_to_phi(1, 6)) {
    const Rational e = exact_expected_loss(forecaster, adv, s, 6);
    CHECK(e >= solver->minimax_loss(s));
    CHECK(e <= exact_rational(f(s)));
  }
}

TEST_CASE("Monte Carlo agrees with the exact expectation") {
  auto solver = make_solver(1);
  struct Case {
    const char* forecaster;
    const char* adversary;
    State start;
  };
  const Case cases[] = {
      {"potential:fc:2", "optimal", State{3, 0}},
      {"mw:1", "uniform:1,2", State{2, 2}},
      {"random-leader", "even-split", State{3, 0}},
      {"majority", "optimal", State{2, 1}},
  };
  std::uint64_t seed = 90;
  for (const Case& c : cases) {
    auto f = make_forecaster(c.forecaster);
    auto adv = make_adversary(c.adversary, 2, solver);
    const double exact = to_double(exact_expected_loss(*f, *adv, c.start, 6));
    const MonteCarloSummary s = monte_carlo(*f, *adv, c.start, 100000, 100000, seed++);
    CHECK_MESSAGE(std::abs(s.mean_loss - exact) <= 3 * s.stderr_loss, c.forecaster, " vs ",
                  c.adversary);
  }
}

TEST_CASE("protocol errors carry the round") {
  MajorityOfLeaders f;
  BrokenAdversary adv;
  try {
    play_game(f, adv, State{3}, 10, 1);
    FAIL("expected a protocol error");
  } catch (const ProtocolError& e) {
    CHECK(std::string(e.what()).find("round 1") != std::string::npos);
  }
}

TEST_CASE("level counts under the even split") {
  for (int k : {3, 5, 6}) {
    const Count n = Count{1} << k;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const GiTrace tr = trace_g(n, 2, 3 * k, seed);
      CHECK(tr.g[0] == std::vector<Count>{n, 0, 0});
      for (int t = 0; t <= k; ++t) CHECK(tr.g[t][0] == (n >> t));
      for (std::size_t t = 1; t < tr.g.size(); ++t) {
        std::uint64_t before = 0, after = 0;
        for (int i = 0; i <= 2; ++i) {
          before += tr.g[t - 1][i];
          after += tr.g[t][i];
        }
        CHECK(after <= before);
        for (int i = 1; i <= 2; ++i) {
          CHECK(2.0 * tr.g[t][i] >= tr.g[t - 1][i - 1] + 1.0 * tr.g[t - 1][i] - 1.0);
        }
      }
    }
  }
}

TEST_CASE("t_b* estimates") {
  const TStarSummary zero = estimate_t_b_star(32, 0, 200, 5);
  CHECK(zero.min == 5);
  CHECK(zero.max == 5);
  CHECK(estimate_t_b_star(1, 0, 10, 5).max == 0);
  const TStarSummary one = estimate_t_b_star(32, 1, 1000, 5);
  CHECK(one.censored == 0);
  CHECK(one.loss_floor >= lower_bound(32, 1));
  CHECK(one.min >= 7);
}
