#pragma once

// State algebra for the mistake-bounded experts game.
//
// A state is the histogram (k_0, ..., k_b) of surviving experts by mistake
// count. Each round the adversary partitions the experts into the choices
// they vote for (a decomposition); once the correct choice j is revealed,
// experts that voted for anything else move up one level and those already at
// level b drop out.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace experts {

using Count = std::uint32_t;

class State {
 public:
  State() = default;
  // Throws DomainError when `counts` is empty. The all-zero vector is
  // representable (successor() can produce it) but is not a valid game state;
  // see require_valid().
  explicit State(std::vector<Count> counts);
  State(std::initializer_list<Count> counts);

  // (n, 0, ..., 0)
  static State start(Count n, int b);
  // (0, ..., 0, 1): a single surviving expert with no mistakes left to make.
  static State absorbing(int b);
  static State zero(int b);

  int b() const { return static_cast<int>(counts_.size()) - 1; }
  std::size_t levels() const { return counts_.size(); }
  Count operator[](std::size_t i) const { return counts_[i]; }
  Count& operator[](std::size_t i) { return counts_[i]; }
  std::span<const Count> counts() const { return counts_; }

  std::uint64_t total() const;
  bool is_zero() const;
  bool is_absorbing() const;

  // Joined with `sep`: "3,1" or "3:1".
  std::string to_string(char sep = ',') const;

  auto operator<=>(const State&) const = default;
  bool operator==(const State&) const = default;

 private:
  std::vector<Count> counts_;
};

struct StateHash {
  std::size_t operator()(const State& s) const noexcept;
};

// Throws DomainError if `s` is all-zero or its width does not match b.
void require_valid(const State& s, int b);
void require_valid(const State& s);

// Remaining mistake budget Σ k_i (b - i + 1). Strictly decreases along every
// successor other than the unanimous-correct self-loop.
std::uint64_t phi(const State& s);

// Parses "k0,k1,..." (or with ':' separators).
State parse_state(const std::string& text, char sep = ',');

// Nonempty subset of the d choices, stored as a bitmask over 0-based indices.
class ChoiceSet {
 public:
  ChoiceSet() = default;
  static ChoiceSet from_mask(std::uint32_t mask);
  static ChoiceSet of(std::initializer_list<int> choices);
  static ChoiceSet of(const std::vector<int>& choices);
  // {0, ..., a-1}
  static ChoiceSet prefix(int a);

  bool contains(int choice) const { return (mask_ >> choice) & 1u; }
  int size() const;
  std::uint32_t mask() const { return mask_; }
  std::vector<int> members() const;
  // 1-based, comma separated: "1,2".
  std::string to_string() const;

  bool operator==(const ChoiceSet&) const = default;

 private:
  std::uint32_t mask_ = 0;
};

// Parses the 1-based "1,2,..." form written by ChoiceSet::to_string.
ChoiceSet parse_choice_set(const std::string& text, int d);

// Per-choice vote vectors: at(j, i) experts at level i vote for choice j.
class Decomposition {
 public:
  Decomposition() = default;
  Decomposition(int d, int b);

  int d() const { return d_; }
  int b() const { return levels_ - 1; }
  Count at(int choice, int level) const { return data_[index(choice, level)]; }
  Count& at(int choice, int level) { return data_[index(choice, level)]; }
  std::span<const Count> part(int choice) const {
    return {data_.data() + static_cast<std::size_t>(choice) * levels_,
            static_cast<std::size_t>(levels_)};
  }

  State column_sums() const;
  bool decomposes(const State& s) const;
  // True when every choice outside `choices` receives no votes.
  bool supported_on(ChoiceSet choices) const;
  bool part_is_zero(int choice) const;

  // "k0,k1|k0,k1|..." one part per choice (transcript format).
  std::string to_parts_string() const;
  // "c1,c2,...|c1,c2,...|..." one group per level (memo format).
  std::string to_levels_string() const;

  bool operator==(const Decomposition&) const = default;

 private:
  std::size_t index(int choice, int level) const {
    return static_cast<std::size_t>(choice) * levels_ + level;
  }

  int d_ = 0;
  int levels_ = 0;
  std::vector<Count> data_;
};

// Inverse of Decomposition::to_levels_string.
Decomposition parse_levels_decomposition(const std::string& text, int d, int b);

// Successor when `choice` (0-based) is correct. May return the all-zero state,
// which callers must treat as an illegal outcome. Throws DomainError if `dec`
// is not a decomposition of `s` or `choice` is out of range.
State successor(const State& s, const Decomposition& dec, int choice);

// Unchecked variant used by the solvers; `out` is resized as needed.
void successor_into(const Decomposition& dec, int choice, State& out);

// (0, k_0, ..., k_{b-1}): every expert voted against the correct choice.
State shifted(const State& s);

// Index of the choice whose part equals the whole state (a unanimous vote), or -1.
int unanimous_choice(const State& s, const Decomposition& dec);

// Lazy enumeration of the decompositions of `s` supported on `choices`. Per
// level, compositions of k_i over the members of `choices` are visited in
// descending lexicographic order ((2|0), (1|1), (0|2)); levels form a
// mixed-radix product with level 0 as the most significant digit.
class DecompositionCursor {
 public:
  DecompositionCursor(const State& s, ChoiceSet choices, int d);

  const Decomposition& current() const { return dec_; }
  // Moves to the next decomposition; false once the sequence is exhausted.
  bool next();

 private:
  bool next_composition(int level);
  void reset_level(int level);

  std::vector<int> members_;
  std::vector<Count> totals_;
  Decomposition dec_;
};

// Π_i C(k_i + a - 1, a - 1)
std::uint64_t count_decompositions(const State& s, int a);

// Every successor of `s` (any decomposition, any correct choice), deduplicated
// and sorted. Zero states are excluded.
std::vector<State> successors(const State& s);

// Whether `to` can be reached from `from` by a chain of successors (including
// the empty chain).
bool is_reachable(const State& from, const State& to);

// All valid states of width b+1 with phi(s) <= phi_cap, ordered by phi and then
// lexicographically. This is the canonical order used for witnesses.
std::vector<State> states_up_to_phi(int b, std::uint64_t phi_cap);

// Canonical order: phi first, then lexicographic.
bool canonical_less(const State& a, const State& b);

}  // namespace experts
