#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "experts/errors.hpp"
#include "experts/exact.hpp"
#include "oracle/brute_force.hpp"

using namespace experts;

namespace {

Rational from_oracle(const oracle::Q& q) {
  Rational r(numerator(q).str() + "/" + denominator(q).str());
  r.canonicalize();
  return r;
}

ExactSolver solver(int b, int d = 2, bool fast = false) {
  SolverConfig cfg;
  cfg.b = b;
  cfg.d = d;
  cfg.pairs_only = fast;
  return ExactSolver(cfg);
}

}  // namespace

TEST_CASE("base cases") {
  for (int b : {1, 2, 3}) {
    auto s = solver(b);
    CHECK(s.minimax_loss(State::absorbing(b)) == 0);
    std::vector<Count> one_left(b + 1, 0);
    one_left[b - 1] = 1;
    CHECK(s.minimax_loss(State(one_left)) == 1);
  }
}

TEST_CASE("small b = 1 values") {
  auto s = solver(1);
  CHECK(s.minimax_loss(State{2, 0}) == Rational(7, 4));
  CHECK(s.minimax_loss(State{1, 1}) == Rational(5, 4));
  CHECK(s.minimax_loss(State{0, 2}) == Rational(1, 2));
  CHECK(s.minimax_loss(State{1, 0}) == 1);
}

TEST_CASE("perfect expert closed form") {
  CHECK(perfect_expert_loss(1) == 0);
  CHECK(perfect_expert_loss(3) == Rational(3, 4));
  CHECK(perfect_expert_loss(4) == 1);
  CHECK_THROWS_AS(perfect_expert_loss(0), DomainError);
  auto s = solver(0);
  for (std::uint64_t n = 1; n <= 64; ++n) {
    CHECK(s.minimax_loss(State{static_cast<Count>(n)}) == from_oracle(oracle::perfect_expert(n)));
  }
}

TEST_CASE("memoized solver equals the brute-force oracle") {
  for (int b : {0, 1, 2}) {
    auto s = solver(b);
    for (const auto& h : oracle::states_up_to(b, 5)) {
      const State k{std::vector<Count>(h.begin(), h.end())};
      CHECK_MESSAGE(s.minimax_loss(k) == from_oracle(oracle::minimax(h, 2)), k.to_string());
    }
  }
}

TEST_CASE("three choices agree with the oracle") {
  for (int b : {0, 1}) {
    auto s = solver(b, 3);
    for (const auto& h : oracle::states_up_to(b, 4)) {
      const State k{std::vector<Count>(h.begin(), h.end())};
      CHECK_MESSAGE(s.minimax_loss(k) == from_oracle(oracle::minimax(h, 3)), k.to_string());
    }
  }
}

TEST_CASE("optimal moves") {
  auto s0 = solver(0);
  const AdversaryMove m = s0.optimal_adversary_move(State{2});
  CHECK(m.choices == ChoiceSet::prefix(2));
  CHECK(m.dec.to_parts_string() == "1|1");

  auto s1 = solver(1);
  const AdversaryMove loop = s1.optimal_adversary_move(State{1, 0});
  CHECK(loop.choices == ChoiceSet::prefix(2));
  CHECK(unanimous_choice(State{1, 0}, loop.dec) >= 0);
  CHECK_THROWS_AS(s1.optimal_adversary_move(State{0, 1}), DomainError);

  // The returned move attains the value.
  for (const State& k : states_up_to_phi(1, 10)) {
    if (k.is_absorbing()) continue;
    const AdversaryMove move = s1.optimal_adversary_move(k);
    CHECK(move.dec.supported_on(move.choices));
    const int a = move.choices.size();
    const int loop_choice = unanimous_choice(k, move.dec);
    Rational sum = 0;
    for (int j : move.choices.members()) {
      if (j == loop_choice) continue;
      sum += s1.minimax_loss(successor(k, move.dec, j));
    }
    Rational value = loop_choice >= 0 ? (Rational(a - 1) + sum) / (a - 1)
                                      : (Rational(a - 1) + sum) / a;
    value.canonicalize();
    CHECK(value == s1.minimax_loss(k));
  }
}

TEST_CASE("value is strictly larger than at every successor") {
  auto s = solver(1);
  for (const State& k : states_up_to_phi(1, 12)) {
    for (const State& next : successors(k)) {
      if (next == k) continue;
      CHECK(s.minimax_loss(k) > s.minimax_loss(next));
    }
  }
}

TEST_CASE("phi cap") {
  SolverConfig cfg;
  cfg.b = 1;
  cfg.phi_cap = 10;
  ExactSolver s(cfg);
  CHECK_THROWS_AS(s.minimax_loss(State{6, 0}), ResourceLimitError);
  CHECK_NOTHROW(s.minimax_loss(State{5, 0}));
  CHECK(default_phi_cap(1) >= 240);  // covers the 80 x 80 surface
}

TEST_CASE("invalid states") {
  auto s = solver(1);
  CHECK_THROWS_AS(s.minimax_loss(State{0, 0}), DomainError);
  CHECK_THROWS_AS(s.minimax_loss(State{1}), DomainError);
}

TEST_CASE("precompute gives the same table for any thread count") {
  auto one = solver(1);
  one.precompute(30, 1);
  auto four = solver(1);
  four.precompute(30, 4);
  CHECK(one.export_table() == four.export_table());
  CHECK(one.memo_size() == states_up_to_phi(1, 30).size());
  auto lazy = solver(1);
  for (const State& k : states_up_to_phi(1, 30)) CHECK(lazy.minimax_loss(k) == one.minimax_loss(k));
}

TEST_CASE("pairs-only mode") {
  // With two choices every admissible set is a pair.
  auto full = solver(1, 2);
  auto fast = solver(1, 2, true);
  for (const State& k : states_up_to_phi(1, 16)) CHECK(full.minimax_loss(k) == fast.minimax_loss(k));
  // With three choices it can only lose value.
  auto full3 = solver(1, 3);
  auto fast3 = solver(1, 3, true);
  for (const State& k : states_up_to_phi(1, 8)) CHECK(fast3.minimax_loss(k) <= full3.minimax_loss(k));
}

TEST_CASE("memo round trip and errors") {
  MemoTable t;
  t.b = 1;
  t.d = 2;
  t.values[State{0, 1}] = 0;
  t.values[State{1, 0}] = 1;
  t.values[State{2, 0}] = Rational(7, 4);
  std::stringstream buf;
  write_memo(buf, t);
  CHECK(read_memo(buf) == t);

  const auto path = std::filesystem::temp_directory_path() / "experts_memo_test.txt";
  save_memo(t, path);
  CHECK(load_memo(path) == t);
  std::filesystem::remove(path);

  std::stringstream bad("b=1 d=2 version=1\n1,0;1/x\n");
  CHECK_THROWS_AS(read_memo(bad), ParseError);
  std::stringstream bad_header("b=1 d=2\n");
  CHECK_THROWS_AS(read_memo(bad_header), ParseError);

  auto s2 = solver(2);
  CHECK_THROWS_AS(s2.import_table(t), IncompatibleMemoError);

  auto s1 = solver(1);
  s1.import_table(t);
  CHECK(s1.contains(State{2, 0}));
  CHECK(s1.minimax_loss(State{2, 0}) == Rational(7, 4));
}

TEST_CASE("exported moves survive a round trip") {
  SolverConfig cfg;
  cfg.b = 1;
  cfg.record_moves = true;
  ExactSolver s(cfg);
  s.minimax_loss(State{4, 1});
  const MemoTable t = s.export_table();
  CHECK_FALSE(t.moves.empty());
  std::stringstream buf;
  write_memo(buf, t);
  CHECK(read_memo(buf) == t);
}
