#include "experts/states.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "experts/errors.hpp"

namespace experts {

State::State(std::vector<Count> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw DomainError("a state needs at least one level");
}

State::State(std::initializer_list<Count> counts) : State(std::vector<Count>(counts)) {}

State State::start(Count n, int b) {
  if (b < 0) throw DomainError("mistake budget b must be nonnegative");
  std::vector<Count> c(static_cast<std::size_t>(b) + 1, 0);
  c[0] = n;
  return State(std::move(c));
}

State State::absorbing(int b) {
  State s = zero(b);
  s[static_cast<std::size_t>(b)] = 1;
  return s;
}

State State::zero(int b) {
  if (b < 0) throw DomainError("mistake budget b must be nonnegative");
  return State(std::vector<Count>(static_cast<std::size_t>(b) + 1, 0));
}

std::uint64_t State::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

bool State::is_zero() const {
  return std::all_of(counts_.begin(), counts_.end(), [](Count c) { return c == 0; });
}

bool State::is_absorbing() const {
  if (counts_.back() != 1) return false;
  return std::all_of(counts_.begin(), counts_.end() - 1, [](Count c) { return c == 0; });
}

std::string State::to_string(char sep) const {
  std::string out;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(counts_[i]);
  }
  return out;
}

std::size_t StateHash::operator()(const State& s) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (Count c : s.counts()) {
    h ^= c;
    h *= 0x100000001b3ull;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

void require_valid(const State& s) {
  if (s.levels() == 0) throw DomainError("empty state");
  if (s.is_zero()) throw DomainError("the all-zero state is outside the domain");
}

void require_valid(const State& s, int b) {
  require_valid(s);
  if (s.b() != b) {
    throw DomainError("state " + s.to_string() + " has " + std::to_string(s.levels()) +
                      " levels, expected b+1 = " + std::to_string(b + 1));
  }
}

std::uint64_t phi(const State& s) {
  const auto b = static_cast<std::uint64_t>(s.b());
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < s.levels(); ++i) total += std::uint64_t{s[i]} * (b - i + 1);
  return total;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

Count parse_count(const std::string& tok) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    throw DomainError("not a nonnegative integer: '" + tok + "'");
  }
  const unsigned long long v = std::stoull(tok);
  if (v > 0xffffffffull) throw DomainError("count too large: '" + tok + "'");
  return static_cast<Count>(v);
}

}  // namespace

State parse_state(const std::string& text, char sep) {
  std::vector<Count> counts;
  for (const auto& tok : split(text, sep)) counts.push_back(parse_count(tok));
  return State(std::move(counts));
}

ChoiceSet ChoiceSet::from_mask(std::uint32_t mask) {
  if (mask == 0) throw DomainError("a choice set must be nonempty");
  ChoiceSet c;
  c.mask_ = mask;
  return c;
}

ChoiceSet ChoiceSet::of(std::initializer_list<int> choices) {
  return of(std::vector<int>(choices));
}

ChoiceSet ChoiceSet::of(const std::vector<int>& choices) {
  std::uint32_t mask = 0;
  for (int c : choices) {
    if (c < 0 || c >= 32) throw DomainError("choice index out of range");
    mask |= 1u << c;
  }
  return from_mask(mask);
}

ChoiceSet ChoiceSet::prefix(int a) {
  if (a < 1 || a > 31) throw DomainError("choice set size out of range");
  return from_mask((1u << a) - 1);
}

int ChoiceSet::size() const { return std::popcount(mask_); }

std::vector<int> ChoiceSet::members() const {
  std::vector<int> out;
  for (int j = 0; j < 32; ++j) {
    if (contains(j)) out.push_back(j);
  }
  return out;
}

std::string ChoiceSet::to_string() const {
  std::string out;
  for (int j : members()) {
    if (!out.empty()) out += ',';
    out += std::to_string(j + 1);
  }
  return out;
}

ChoiceSet parse_choice_set(const std::string& text, int d) {
  std::vector<int> choices;
  for (const auto& tok : split(text, ',')) {
    const Count v = parse_count(tok);
    if (v < 1 || static_cast<int>(v) > d) {
      throw DomainError("choice " + tok + " outside 1.." + std::to_string(d));
    }
    choices.push_back(static_cast<int>(v) - 1);
  }
  return ChoiceSet::of(choices);
}

Decomposition::Decomposition(int d, int b)
    : d_(d), levels_(b + 1), data_(static_cast<std::size_t>(d) * (b + 1), 0) {
  if (d < 1) throw DomainError("need at least one choice");
  if (b < 0) throw DomainError("mistake budget b must be nonnegative");
}

State Decomposition::column_sums() const {
  State s = State::zero(b());
  for (int j = 0; j < d_; ++j) {
    for (int i = 0; i < levels_; ++i) s[i] += at(j, i);
  }
  return s;
}

bool Decomposition::decomposes(const State& s) const {
  return static_cast<int>(s.levels()) == levels_ && column_sums() == s;
}

bool Decomposition::supported_on(ChoiceSet choices) const {
  for (int j = 0; j < d_; ++j) {
    if (!choices.contains(j) && !part_is_zero(j)) return false;
  }
  return true;
}

bool Decomposition::part_is_zero(int choice) const {
  const auto p = part(choice);
  return std::all_of(p.begin(), p.end(), [](Count c) { return c == 0; });
}

std::string Decomposition::to_parts_string() const {
  std::string out;
  for (int j = 0; j < d_; ++j) {
    if (j) out += '|';
    for (int i = 0; i < levels_; ++i) {
      if (i) out += ',';
      out += std::to_string(at(j, i));
    }
  }
  return out;
}

std::string Decomposition::to_levels_string() const {
  std::string out;
  for (int i = 0; i < levels_; ++i) {
    if (i) out += '|';
    for (int j = 0; j < d_; ++j) {
      if (j) out += ',';
      out += std::to_string(at(j, i));
    }
  }
  return out;
}

Decomposition parse_levels_decomposition(const std::string& text, int d, int b) {
  const auto groups = split(text, '|');
  if (static_cast<int>(groups.size()) != b + 1) {
    throw DomainError("decomposition '" + text + "' needs " + std::to_string(b + 1) + " levels");
  }
  Decomposition dec(d, b);
  for (int i = 0; i <= b; ++i) {
    const auto parts = split(groups[i], ',');
    if (static_cast<int>(parts.size()) != d) {
      throw DomainError("decomposition level '" + groups[i] + "' needs " + std::to_string(d) +
                        " entries");
    }
    for (int j = 0; j < d; ++j) dec.at(j, i) = parse_count(parts[j]);
  }
  return dec;
}

void successor_into(const Decomposition& dec, int choice, State& out) {
  const int levels = dec.b() + 1;
  if (static_cast<int>(out.levels()) != levels) out = State::zero(dec.b());
  // Level i receives the level-(i-1) experts that voted for some other choice.
  std::uint64_t carry = 0;
  for (int i = 0; i < levels; ++i) {
    std::uint64_t others = 0;
    for (int v = 0; v < dec.d(); ++v) {
      if (v != choice) others += dec.at(v, i);
    }
    out[i] = static_cast<Count>(dec.at(choice, i) + carry);
    carry = others;
  }
}

State successor(const State& s, const Decomposition& dec, int choice) {
  if (!dec.decomposes(s)) {
    throw DomainError("decomposition " + dec.to_parts_string() + " does not partition state " +
                      s.to_string());
  }
  if (choice < 0 || choice >= dec.d()) {
    throw DomainError("choice index " + std::to_string(choice) + " out of range");
  }
  State out;
  successor_into(dec, choice, out);
  return out;
}

State shifted(const State& s) {
  State out = State::zero(s.b());
  for (std::size_t i = 1; i < s.levels(); ++i) out[i] = s[i - 1];
  return out;
}

int unanimous_choice(const State& s, const Decomposition& dec) {
  for (int j = 0; j < dec.d(); ++j) {
    const auto p = dec.part(j);
    if (std::equal(p.begin(), p.end(), s.counts().begin())) return j;
  }
  return -1;
}

DecompositionCursor::DecompositionCursor(const State& s, ChoiceSet choices, int d)
    : members_(choices.members()),
      totals_(s.counts().begin(), s.counts().end()),
      dec_(d, s.b()) {
  if (members_.empty()) throw DomainError("choice set must be nonempty");
  if (members_.back() >= d) throw DomainError("choice set exceeds the number of choices");
  for (int i = 0; i <= s.b(); ++i) reset_level(i);
}

void DecompositionCursor::reset_level(int level) {
  for (int m : members_) dec_.at(m, level) = 0;
  dec_.at(members_.front(), level) = totals_[level];
}

bool DecompositionCursor::next_composition(int level) {
  const int a = static_cast<int>(members_.size());
  if (a == 1) return false;
  const Count last = dec_.at(members_[a - 1], level);
  int p = a - 2;
  while (p >= 0 && dec_.at(members_[p], level) == 0) --p;
  if (p < 0) return false;
  dec_.at(members_[p], level) -= 1;
  if (p + 1 != a - 1) dec_.at(members_[a - 1], level) = 0;
  dec_.at(members_[p + 1], level) = last + 1;
  return true;
}

bool DecompositionCursor::next() {
  for (int level = dec_.b(); level >= 0; --level) {
    if (next_composition(level)) return true;
    reset_level(level);
  }
  return false;
}

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return static_cast<std::uint64_t>(r);
}

}  // namespace

std::uint64_t count_decompositions(const State& s, int a) {
  std::uint64_t product = 1;
  for (Count k : s.counts()) product *= binomial(std::uint64_t{k} + a - 1, a - 1);
  return product;
}

std::vector<State> successors(const State& s) {
  std::set<State> found;
  DecompositionCursor cursor(s, ChoiceSet::prefix(2), 2);
  State next;
  do {
    successor_into(cursor.current(), 0, next);
    if (!next.is_zero()) found.insert(next);
  } while (cursor.next());
  return {found.begin(), found.end()};
}

bool is_reachable(const State& from, const State& to) {
  if (from.levels() != to.levels()) throw DomainError("states have different widths");
  if (from == to) return true;
  const std::uint64_t phi_to = phi(to);
  const std::uint64_t total_to = to.total();
  auto viable = [&](const State& s) {
    return phi(s) >= phi_to && s.total() >= total_to && s[0] >= to[0];
  };
  if (!viable(from)) return false;
  std::unordered_set<State, StateHash> seen{from};
  std::vector<State> frontier{from};
  while (!frontier.empty()) {
    State cur = std::move(frontier.back());
    frontier.pop_back();
    for (State& next : successors(cur)) {
      if (next == to) return true;
      if (!viable(next) || !seen.insert(next).second) continue;
      frontier.push_back(std::move(next));
    }
  }
  return false;
}

bool canonical_less(const State& a, const State& b) {
  const auto pa = phi(a);
  const auto pb = phi(b);
  if (pa != pb) return pa < pb;
  return a < b;
}

std::vector<State> states_up_to_phi(int b, std::uint64_t phi_cap) {
  std::vector<State> out;
  State cur = State::zero(b);
  // Depth-first over levels; weight of level i is b - i + 1.
  auto rec = [&](auto&& self, int level, std::uint64_t budget) -> void {
    if (level > b) {
      if (!cur.is_zero()) out.push_back(cur);
      return;
    }
    const std::uint64_t weight = static_cast<std::uint64_t>(b - level + 1);
    for (std::uint64_t k = 0; k * weight <= budget; ++k) {
      cur[level] = static_cast<Count>(k);
      self(self, level + 1, budget - k * weight);
    }
    cur[level] = 0;
  };
  rec(rec, 0, phi_cap);
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

}  // namespace experts
