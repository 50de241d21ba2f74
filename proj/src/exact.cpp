#include "experts/exact.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <thread>

#include "experts/errors.hpp"

namespace experts {

std::uint64_t default_phi_cap(int b) {
  switch (b) {
    case 0: return 1024;
    case 1: return 320;
    case 2: return 24;
    default: return 16;
  }
}

ExactSolver::ExactSolver(SolverConfig config) : config_(config) {
  if (config_.b < 0) throw DomainError("mistake budget b must be nonnegative");
  if (config_.d < 2) throw DomainError("the game needs at least d = 2 choices");
  if (config_.d > 31) throw DomainError("at most 31 choices are supported");
  if (config_.phi_cap == 0) config_.phi_cap = default_phi_cap(config_.b);
}

void ExactSolver::check_cap(const State& state) const {
  const auto p = phi(state);
  if (p > config_.phi_cap) {
    throw ResourceLimitError("state " + state.to_string() + " has phi = " + std::to_string(p) +
                             ", above the cap of " + std::to_string(config_.phi_cap) +
                             " (raise it with --phi-cap)");
  }
}

template <typename Lookup>
ExactSolver::Evaluation ExactSolver::evaluate(const State& state, Lookup&& lookup,
                                              bool want_move) const {
  Evaluation result;
  if (state.is_absorbing()) return result;

  const int d = config_.d;
  const int a_max = config_.pairs_only ? 2 : d;

  const State shift = shifted(state);
  const Rational* shift_value = shift.is_zero() ? nullptr : &lookup(shift);
  const Rational* max_successor = nullptr;
  auto note_successor = [&](const Rational& v) {
    if (max_successor == nullptr || v > *max_successor) max_successor = &v;
  };

  bool have = false;
  Rational& best = result.value;
  // A non-unanimous candidate beats `best` iff its successor sum exceeds
  // a*best - (a-1).
  Rational threshold;
  Rational sum;
  State succ;

  // Choice relabeling is a symmetry of the game, so A = {0..a-1} stands in for
  // every subset of size a and yields the same first maximizer.
  for (int a = 2; a <= a_max; ++a) {
    const ChoiceSet choices = ChoiceSet::prefix(a);
    const std::vector<int> members = choices.members();
    if (have) threshold = best * a - (a - 1);

    DecompositionCursor cursor(state, choices, d);
    do {
      const Decomposition& dec = cursor.current();
      if (unanimous_choice(state, dec) >= 0) {
        // Everyone else lands on the shifted state; an empty one breaks the promise.
        if (shift_value == nullptr) continue;
        note_successor(*shift_value);
        Rational candidate = *shift_value + 1;
        if (!have || candidate > best) {
          best = std::move(candidate);
          have = true;
          threshold = best * a - (a - 1);
          if (want_move) result.move = AdversaryMove{choices, dec};
        }
        continue;
      }

      bool breaks_promise = false;
      sum = 0;
      for (int j : members) {
        successor_into(dec, j, succ);
        if (succ.is_zero()) {
          breaks_promise = true;
          break;
        }
        const Rational& v = lookup(succ);
        note_successor(v);
        sum += v;
      }
      if (breaks_promise) continue;
      if (!have || sum > threshold) {
        threshold = sum;
        best = (sum + (a - 1)) / a;
        have = true;
        if (want_move) result.move = AdversaryMove{choices, dec};
      }
    } while (cursor.next());
  }

  if (!have) {
    throw std::logic_error("no admissible adversary move at state " + state.to_string());
  }
  best.canonicalize();
  result.has_move = want_move;
  if (config_.check_monotonicity && max_successor != nullptr && !(best > *max_successor)) {
    throw std::logic_error("strict monotonicity violated at state " + state.to_string());
  }
  return result;
}

const Rational& ExactSolver::value(const State& state) {
  if (auto it = memo_.find(state); it != memo_.end()) return it->second;
  auto recurse = [this](const State& s) -> const Rational& { return value(s); };
  Evaluation e = evaluate(state, recurse, config_.record_moves);
  if (e.has_move) moves_.emplace(state, std::move(e.move));
  return memo_.emplace(state, std::move(e.value)).first->second;
}

const Rational& ExactSolver::minimax_loss(const State& state) {
  require_valid(state, config_.b);
  check_cap(state);
  return value(state);
}

AdversaryMove ExactSolver::optimal_adversary_move(const State& state) {
  require_valid(state, config_.b);
  if (state.is_absorbing()) {
    throw DomainError("the absorbing state " + state.to_string() + " has no adversary move");
  }
  check_cap(state);
  if (auto it = moves_.find(state); it != moves_.end()) return it->second;
  auto recurse = [this](const State& s) -> const Rational& { return value(s); };
  Evaluation e = evaluate(state, recurse, true);
  memo_.emplace(state, e.value);
  if (config_.record_moves) moves_.emplace(state, e.move);
  return e.move;
}

void ExactSolver::precompute(std::uint64_t phi_max, unsigned threads) {
  if (phi_max > config_.phi_cap) {
    throw ResourceLimitError("requested phi " + std::to_string(phi_max) + " exceeds the cap of " +
                             std::to_string(config_.phi_cap) + " (raise it with --phi-cap)");
  }
  threads = std::max(1u, threads);
  const std::vector<State> all = states_up_to_phi(config_.b, phi_max);

  auto read_only = [this](const State& s) -> const Rational& {
    auto it = memo_.find(s);
    if (it == memo_.end()) {
      throw std::logic_error("successor " + s.to_string() + " missing from a lower level");
    }
    return it->second;
  };

  std::size_t begin = 0;
  while (begin < all.size()) {
    const auto level_phi = phi(all[begin]);
    std::size_t end = begin;
    while (end < all.size() && phi(all[end]) == level_phi) ++end;

    std::vector<const State*> todo;
    for (std::size_t i = begin; i < end; ++i) {
      if (!memo_.count(all[i])) todo.push_back(&all[i]);
    }
    std::vector<Evaluation> results(todo.size());
    auto work = [&](unsigned worker) {
      for (std::size_t i = worker; i < todo.size(); i += threads) {
        results[i] = evaluate(*todo[i], read_only, config_.record_moves);
      }
    };
    if (threads == 1 || todo.size() < 2) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      std::vector<std::exception_ptr> errors(threads);
      for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            work(w);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      pool.clear();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    for (std::size_t i = 0; i < todo.size(); ++i) {
      if (results[i].has_move) moves_.emplace(*todo[i], std::move(results[i].move));
      memo_.emplace(*todo[i], std::move(results[i].value));
    }
    begin = end;
  }
}

MemoTable ExactSolver::export_table() const {
  MemoTable table;
  table.b = config_.b;
  table.d = config_.d;
  table.values.insert(memo_.begin(), memo_.end());
  table.moves.insert(moves_.begin(), moves_.end());
  return table;
}

void ExactSolver::import_table(const MemoTable& table) {
  if (table.b != config_.b || table.d != config_.d) {
    throw IncompatibleMemoError("memo table was built for b=" + std::to_string(table.b) +
                                " d=" + std::to_string(table.d) + " but this run uses b=" +
                                std::to_string(config_.b) + " d=" + std::to_string(config_.d));
  }
  for (const auto& [state, v] : table.values) memo_.emplace(state, v);
  for (const auto& [state, m] : table.moves) moves_.emplace(state, m);
}

Rational perfect_expert_loss(std::uint64_t n) {
  if (n == 0) throw DomainError("perfect_expert_loss needs n >= 1");
  const int k = std::bit_width(n) - 1;
  mpz_class pow2 = 1;
  pow2 <<= k;
  Rational frac{mpz_class(static_cast<unsigned long>(n)), pow2};
  frac.canonicalize();
  Rational result = (frac + (k - 1)) / 2;
  result.canonicalize();
  return result;
}

}  // namespace experts
