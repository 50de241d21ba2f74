#pragma once

// Potential functions that upper-bound the minimax loss.
//
// Any f with f(0,...,0,1) >= 0 and
//
//   f(k) >= (a-1)/a + (1/a) * sum_{i in A} f(s_i)    for every k, A (a >= 1), decomposition
//
// bounds the loss from above and induces a forecaster (see strategies.hpp).
// The main family is f_c(k) = log_gamma(sum_i c^(b-i) k_i) with
// gamma = (2c/(c+1))^2, c > 1.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "experts/rational.hpp"
#include "experts/states.hpp"

namespace experts {

class ExactSolver;

struct PotentialParams {
  double c = 2.0;
  double gamma = 16.0 / 9.0;

  // Throws DomainError unless c > 1.
  static PotentialParams from_c(double c);
};

double f_c(const State& state, const PotentialParams& params);
double f_c(std::span<const double> counts, const PotentialParams& params);

// Bounds of the c search used by f_opt.
inline constexpr double kMinC = 1.0 + 1.0 / 1024.0;
inline constexpr double kMaxC = 1048576.0;

struct OptimalPotential {
  double value = 0.0;
  double c = 2.0;
};

// min over c in [kMinC, kMaxC] of f_c(state): a 64-point grid, uniform in
// log(c - 1), followed by golden-section refinement around the best grid
// point. The two preset values of c are always probed as well, so the result
// never exceeds f_c at either preset.
OptimalPotential f_opt(const State& state);

// c = log2(4n + 4) / ln 4, the choice behind upper_bound().
double ub_preset_c(std::uint64_t n);
// c = log2(n) / b, the quick choice behind precise_upper_bound(). Throws
// DomainError when b = 0 or the value is not above 1.
double fast_preset_c(std::uint64_t n, int b);

// log4(n) + b * (log4(log2(n + 1)) + 4) + 1
double upper_bound(std::uint64_t n, int b);

// (1 + 2b / ln n) * (log4 n + b * log4(log2(n) / b)); requires 1 <= b < ln(n) / 2.
double precise_upper_bound(std::uint64_t n, int b);

struct Witness {
  State state;
  std::optional<ChoiceSet> choices;     // empty for the boundary condition
  std::optional<Decomposition> dec;
  double lhs = 0.0;  // f(k)
  double rhs = 0.0;  // what the condition requires f(k) to be at least
};

struct Certification {
  enum class Status { kUncertified, kCertifiedOnCap, kRefuted };
  Status status = Status::kUncertified;
  std::uint64_t phi_cap = 0;
  int b = 0;
  int d = 2;
  std::optional<Witness> witness;

  bool certified() const { return status == Status::kCertifiedOnCap; }
  bool refuted() const { return status == Status::kRefuted; }
};

std::string to_string(Certification::Status status);

// A candidate potential. Evaluators take valid (nonzero) states.
class Potential {
 public:
  using Eval = std::function<double(const State&)>;
  using ExactEval = std::function<Rational(const State&)>;
  using RealEval = std::function<double(std::span<const double>)>;

  Potential(std::string name, Eval eval);

  static Potential fc(double c);
  static Potential optimal();
  static Potential constant(double value);
  // Σ k_i; concave (affine) but not a valid potential.
  static Potential linear();
  // The closed-form perfect-expert loss; b = 0 only.
  static Potential perfect_expert();
  // The exact minimax loss from `solver`, compared in exact arithmetic.
  static Potential exact(std::shared_ptr<ExactSolver> solver);

  const std::string& name() const { return name_; }
  double operator()(const State& s) const { return eval_(s); }

  bool has_exact() const { return static_cast<bool>(exact_); }
  Rational exact_value(const State& s) const { return exact_(s); }

  // Concave potentials carry an extension to real-valued states.
  bool concave() const { return static_cast<bool>(real_); }
  double real_value(std::span<const double> counts) const { return real_(counts); }

  const Certification& certification() const { return cert_; }
  void set_certification(Certification cert) { cert_ = std::move(cert); }

  Potential& with_exact(ExactEval e);
  Potential& with_real(RealEval r);

 private:
  std::string name_;
  Eval eval_;
  ExactEval exact_;
  RealEval real_;
  Certification cert_;
};

// Parses "fc:<c>", "opt", "const:<v>", "linear", "perfect". ("exact" needs a
// solver and is handled by the caller.)
Potential make_potential(const std::string& spec);

// Numerical slack on the decomposition inequality for floating potentials.
inline constexpr double kCertifySlack = 1e-9;

// Exhaustive check of the boundary condition and of the decomposition
// inequality over every state with phi <= phi_cap, every nonempty A of the d
// choices, and every decomposition of the state over the d choices. Outcomes
// whose successor is the empty state are excluded from A. The first violation
// in canonical state order is returned as the witness.
Certification certify(const Potential& f, int b, std::uint64_t phi_cap, int d);

struct ShortcutResult {
  bool passed = true;
  std::optional<State> witness_state;
  int witness_a = 0;
};

// For concave f only: checks (a-1)/a + f(s_1(k/a, ..., k/a, 0, ...)) <= f(k)
// for a = 1..d on integer states with phi <= phi_cap, which implies the full
// decomposition property. Throws DomainError for potentials without a
// real-valued extension.
ShortcutResult concavity_shortcut_check(const Potential& f, int b, std::uint64_t phi_cap, int d);

}  // namespace experts
