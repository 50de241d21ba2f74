#include "experts/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "experts/errors.hpp"
#include "experts/exact.hpp"

namespace experts {

PotentialParams PotentialParams::from_c(double c) {
  if (!(c > 1.0) || !std::isfinite(c)) {
    throw DomainError("potential parameter c must be a finite value above 1");
  }
  const double ratio = 2.0 * c / (c + 1.0);
  return PotentialParams{c, ratio * ratio};
}

namespace {

// ln(gamma) = 2 ln(1 + (c-1)/(c+1)), accurate near c = 1 and for large c.
double log_gamma_base(double c) { return 2.0 * std::log1p((c - 1.0) / (c + 1.0)); }

template <typename Range>
double weighted_sum(const Range& counts, double c) {
  double w = 0.0;
  for (auto k : counts) w = w * c + static_cast<double>(k);
  return w;
}

template <typename Range>
double f_c_raw(const Range& counts, double c) {
  return std::log(weighted_sum(counts, c)) / log_gamma_base(c);
}

template <typename Range>
OptimalPotential minimize_over_c(const Range& counts, double n_for_presets, int b) {
  constexpr int kGrid = 64;
  const double u_lo = std::log(kMinC - 1.0);
  const double u_hi = std::log(kMaxC - 1.0);
  auto at = [&](double u) { return f_c_raw(counts, 1.0 + std::exp(u)); };

  OptimalPotential best{std::numeric_limits<double>::infinity(), kMinC};
  auto consider = [&](double c, double v) {
    if (v < best.value) best = {v, c};
  };

  std::array<double, kGrid> us{};
  std::array<double, kGrid> vs{};
  int arg = 0;
  for (int i = 0; i < kGrid; ++i) {
    us[i] = u_lo + (u_hi - u_lo) * i / (kGrid - 1);
    vs[i] = at(us[i]);
    consider(1.0 + std::exp(us[i]), vs[i]);
    if (vs[i] < vs[arg]) arg = i;
  }

  // Golden section on the bracket around the best grid point.
  double lo = us[std::max(arg - 1, 0)];
  double hi = us[std::min(arg + 1, kGrid - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = at(x1);
  double f2 = at(x2);
  for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = at(x2);
    }
  }
  consider(1.0 + std::exp(x1), f1);
  consider(1.0 + std::exp(x2), f2);

  if (n_for_presets >= 1.0) {
    const double c_ub = std::log2(4.0 * n_for_presets + 4.0) / std::log(4.0);
    consider(c_ub, f_c_raw(counts, c_ub));
    if (b >= 1) {
      const double c_fast = std::log2(n_for_presets) / b;
      if (c_fast > 1.0) consider(c_fast, f_c_raw(counts, c_fast));
    }
  }
  return best;
}

}  // namespace

double f_c(const State& state, const PotentialParams& params) {
  if (!(params.c > 1.0)) throw DomainError("potential parameter c must be above 1");
  require_valid(state);
  return f_c_raw(state.counts(), params.c);
}

double f_c(std::span<const double> counts, const PotentialParams& params) {
  if (!(params.c > 1.0)) throw DomainError("potential parameter c must be above 1");
  return f_c_raw(counts, params.c);
}

OptimalPotential f_opt(const State& state) {
  require_valid(state);
  return minimize_over_c(state.counts(), static_cast<double>(state.total()), state.b());
}

namespace {

OptimalPotential f_opt_real(std::span<const double> counts) {
  double total = 0.0;
  for (double k : counts) total += k;
  return minimize_over_c(counts, total, static_cast<int>(counts.size()) - 1);
}

}  // namespace

double ub_preset_c(std::uint64_t n) {
  if (n == 0) throw DomainError("n must be at least 1");
  return std::log2(4.0 * static_cast<double>(n) + 4.0) / std::log(4.0);
}

double fast_preset_c(std::uint64_t n, int b) {
  if (b < 1) throw DomainError("the fast preset c = log2(n)/b needs b >= 1");
  const double c = std::log2(static_cast<double>(n)) / b;
  if (!(c > 1.0)) throw DomainError("log2(n)/b must exceed 1 for the fast preset");
  return c;
}

double upper_bound(std::uint64_t n, int b) {
  if (n == 0) throw DomainError("upper_bound needs n >= 1");
  if (b < 0) throw DomainError("mistake budget b must be nonnegative");
  const double log4 = std::log(4.0);
  const double nd = static_cast<double>(n);
  return std::log(nd) / log4 + b * (std::log(std::log2(nd + 1.0)) / log4 + 4.0) + 1.0;
}

double precise_upper_bound(std::uint64_t n, int b) {
  if (n == 0) throw DomainError("precise_upper_bound needs n >= 1");
  const double ln_n = std::log(static_cast<double>(n));
  if (b < 1 || !(b < ln_n / 2.0)) {
    throw DomainError("precise_upper_bound requires 1 <= b < ln(n)/2");
  }
  const double log4 = std::log(4.0);
  const double leading = ln_n / log4 + b * std::log(std::log2(static_cast<double>(n)) / b) / log4;
  return (1.0 + 2.0 * b / ln_n) * leading;
}

std::string to_string(Certification::Status status) {
  switch (status) {
    case Certification::Status::kUncertified: return "uncertified";
    case Certification::Status::kCertifiedOnCap: return "certified";
    case Certification::Status::kRefuted: return "refuted";
  }
  return "unknown";
}

Potential::Potential(std::string name, Eval eval) : name_(std::move(name)), eval_(std::move(eval)) {}

Potential& Potential::with_exact(ExactEval e) {
  exact_ = std::move(e);
  return *this;
}

Potential& Potential::with_real(RealEval r) {
  real_ = std::move(r);
  return *this;
}

namespace {

std::string format_number(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

}  // namespace

Potential Potential::fc(double c) {
  const PotentialParams params = PotentialParams::from_c(c);
  Potential p("fc:" + format_number(c), [params](const State& s) { return f_c(s, params); });
  p.with_real([params](std::span<const double> k) { return f_c(k, params); });
  return p;
}

Potential Potential::optimal() {
  Potential p("opt", [](const State& s) { return f_opt(s).value; });
  p.with_real([](std::span<const double> k) { return f_opt_real(k).value; });
  return p;
}

Potential Potential::constant(double value) {
  Potential p("const:" + format_number(value), [value](const State&) { return value; });
  p.with_real([value](std::span<const double>) { return value; });
  p.with_exact([value](const State&) { return exact_rational(value); });
  return p;
}

Potential Potential::linear() {
  Potential p("linear", [](const State& s) { return static_cast<double>(s.total()); });
  p.with_real([](std::span<const double> k) {
    double t = 0.0;
    for (double x : k) t += x;
    return t;
  });
  return p;
}

Potential Potential::perfect_expert() {
  auto exact = [](const State& s) {
    if (s.b() != 0) throw DomainError("the perfect-expert potential is defined for b = 0");
    return perfect_expert_loss(s[0]);
  };
  Potential p("perfect", [exact](const State& s) { return to_double(exact(s)); });
  p.with_exact(exact);
  return p;
}

Potential Potential::exact(std::shared_ptr<ExactSolver> solver) {
  Potential p("exact", [solver](const State& s) { return to_double(solver->minimax_loss(s)); });
  p.with_exact([solver](const State& s) { return solver->minimax_loss(s); });
  return p;
}

namespace {

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw DomainError("not a number: '" + text + "'");
  return v;
}

}  // namespace

Potential make_potential(const std::string& spec) {
  if (spec.rfind("fc:", 0) == 0) return Potential::fc(parse_double(spec.substr(3)));
  if (spec.rfind("const:", 0) == 0) return Potential::constant(parse_double(spec.substr(6)));
  if (spec == "opt") return Potential::optimal();
  if (spec == "linear") return Potential::linear();
  if (spec == "perfect") return Potential::perfect_expert();
  throw DomainError("unknown potential '" + spec +
                    "' (expected fc:<c>, opt, const:<v>, linear, perfect or exact)");
}

namespace {

// Values of f at the successors of one decomposition, in either arithmetic.
template <typename Value>
struct SuccessorValues {
  std::vector<Value> value;
  std::vector<bool> legal;
};

template <typename Value, typename EvalFn, typename ToDouble>
Certification certify_impl(int b, std::uint64_t phi_cap, int d,
                           Value slack, EvalFn&& eval, ToDouble&& as_double) {
  Certification cert;
  cert.phi_cap = phi_cap;
  cert.b = b;
  cert.d = d;

  std::unordered_map<State, Value, StateHash> cache;
  auto value_of = [&](const State& s) -> const Value& {
    auto it = cache.find(s);
    if (it == cache.end()) it = cache.emplace(s, eval(s)).first;
    return it->second;
  };

  const State base = State::absorbing(b);
  const Value& base_value = value_of(base);
  if (base_value < Value(0)) {
    cert.status = Certification::Status::kRefuted;
    cert.witness = Witness{base, std::nullopt, std::nullopt, as_double(base_value), 0.0};
    return cert;
  }

  const std::uint32_t all_masks = (1u << d) - 1;
  SuccessorValues<Value> succ{std::vector<Value>(d), std::vector<bool>(d)};
  State next;
  for (const State& state : states_up_to_phi(b, phi_cap)) {
    const Value fk = value_of(state);
    DecompositionCursor cursor(state, ChoiceSet::prefix(d), d);
    do {
      const Decomposition& dec = cursor.current();
      for (int j = 0; j < d; ++j) {
        successor_into(dec, j, next);
        succ.legal[j] = !next.is_zero();
        if (succ.legal[j]) succ.value[j] = value_of(next);
      }
      for (std::uint32_t mask = 1; mask <= all_masks; ++mask) {
        const ChoiceSet choices = ChoiceSet::from_mask(mask);
        Value sum(0);
        bool legal = true;
        for (int j : choices.members()) {
          if (!succ.legal[j]) {
            legal = false;
            break;
          }
          sum += succ.value[j];
        }
        if (!legal) continue;
        const int a = choices.size();
        // f(k) >= (a-1)/a + sum/a  <=>  a f(k) >= (a-1) + sum
        const Value lhs = fk * a;
        const Value rhs = sum + (a - 1);
        if (lhs < rhs - slack * a) {
          cert.status = Certification::Status::kRefuted;
          cert.witness = Witness{state, choices, dec, as_double(fk), as_double(rhs) / a};
          return cert;
        }
      }
    } while (cursor.next());
  }
  cert.status = Certification::Status::kCertifiedOnCap;
  return cert;
}

}  // namespace

Certification certify(const Potential& f, int b, std::uint64_t phi_cap, int d) {
  if (phi_cap < 1) throw DomainError("phi_cap must be at least 1");
  if (d < 1 || d > 16) throw DomainError("d must be between 1 and 16");
  if (b < 0) throw DomainError("mistake budget b must be nonnegative");
  if (f.has_exact()) {
    return certify_impl<Rational>(
        b, phi_cap, d, Rational(0), [&f](const State& s) { return f.exact_value(s); },
        [](const Rational& q) { return to_double(q); });
  }
  return certify_impl<double>(
      b, phi_cap, d, kCertifySlack, [&f](const State& s) { return f(s); },
      [](double x) { return x; });
}

ShortcutResult concavity_shortcut_check(const Potential& f, int b, std::uint64_t phi_cap, int d) {
  if (!f.concave()) {
    throw DomainError("potential '" + f.name() + "' has no concave real-valued extension");
  }
  ShortcutResult result;
  std::vector<double> k(static_cast<std::size_t>(b) + 1);
  std::vector<double> split(k.size());
  for (const State& state : states_up_to_phi(b, phi_cap)) {
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = state[i];
    const double fk = f.real_value(k);
    for (int a = 1; a <= d; ++a) {
      // s_1 of the uniform split (k/a, ..., k/a, 0, ..., 0).
      for (std::size_t i = 0; i < k.size(); ++i) {
        split[i] = k[i] / a + (i > 0 ? (a - 1) * k[i - 1] / a : 0.0);
      }
      const double lhs = static_cast<double>(a - 1) / a + f.real_value(split);
      if (lhs > fk + kCertifySlack) {
        result.passed = false;
        result.witness_state = state;
        result.witness_a = a;
        return result;
      }
    }
  }
  return result;
}

}  // namespace experts
