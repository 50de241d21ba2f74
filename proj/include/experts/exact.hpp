#pragma once

// Exact minimax loss of the forecaster.
//
// The adversary's optimal play at any state is to pick a subset A of a >= 2
// choices, a decomposition that only votes inside A, and to draw the correct
// choice uniformly from A. The loss therefore satisfies
//
//   l(k) = max_{A, dec} (a-1)/a + (1/a) * sum_{i in A} l(s_i),   l(0,...,0,1) = 0,
//
// which ExactSolver evaluates with exact rationals and memoization on the
// state. A unanimous vote makes one successor equal to k itself; that
// candidate is solved in closed form as 1 + l(0, k_0, ..., k_{b-1}).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <unordered_map>

#include "experts/rational.hpp"
#include "experts/states.hpp"

namespace experts {

struct AdversaryMove {
  ChoiceSet choices;  // the outcome is drawn uniformly from these
  Decomposition dec;  // supported on `choices`

  bool operator==(const AdversaryMove&) const = default;
};

struct SolverConfig {
  int b = 1;
  int d = 2;
  std::uint64_t phi_cap = 0;  // 0 selects default_phi_cap(b)
  bool pairs_only = false;    // fast mode: only |A| = 2
  bool record_moves = false;
  bool check_monotonicity = true;
};

// Largest phi accepted by default for a given budget.
std::uint64_t default_phi_cap(int b);

// Serialized form of a solver's memo (see save_memo for the file layout).
struct MemoTable {
  int b = 0;
  int d = 2;
  std::map<State, Rational> values;
  std::map<State, AdversaryMove> moves;

  bool operator==(const MemoTable&) const = default;
};

class ExactSolver {
 public:
  explicit ExactSolver(SolverConfig config);

  const SolverConfig& config() const { return config_; }

  // Throws DomainError for an invalid state and ResourceLimitError when
  // phi(state) exceeds the configured cap.
  const Rational& minimax_loss(const State& state);

  // First maximizer of the recursion in canonical enumeration order.
  // Throws DomainError at the absorbing state, where the adversary has no move.
  AdversaryMove optimal_adversary_move(const State& state);

  // Fills the memo for every state with phi <= phi_max, one phi level at a
  // time. States within a level only read lower levels, so they are split
  // across `threads` workers; results are identical for any thread count.
  void precompute(std::uint64_t phi_max, unsigned threads);

  std::size_t memo_size() const { return memo_.size(); }
  bool contains(const State& state) const { return memo_.count(state) != 0; }

  MemoTable export_table() const;
  // Throws IncompatibleMemoError when the table was built for another (b, d).
  void import_table(const MemoTable& table);

 private:
  struct Evaluation {
    Rational value;
    AdversaryMove move;
    bool has_move = false;
  };

  template <typename Lookup>
  Evaluation evaluate(const State& state, Lookup&& lookup, bool want_move) const;

  const Rational& value(const State& state);
  void check_cap(const State& state) const;

  SolverConfig config_;
  std::unordered_map<State, Rational, StateHash> memo_;
  std::unordered_map<State, AdversaryMove, StateHash> moves_;
};

// 0.5 * (k - 1 + n / 2^k) with 2^k <= n < 2^(k+1). Throws DomainError for n = 0.
Rational perfect_expert_loss(std::uint64_t n);

// Memo file layout:
//   b=<int> d=<int> version=1
//   k_0,...,k_b;<num>/<den>            one row per state
//   #moves                              optional section
//   k_0,...,k_b;A=<i,j,...>;dec=<level0 parts|level1 parts|...>
void write_memo(std::ostream& out, const MemoTable& table);
MemoTable read_memo(std::istream& in);
void save_memo(const MemoTable& table, const std::filesystem::path& path);
MemoTable load_memo(const std::filesystem::path& path);

}  // namespace experts
