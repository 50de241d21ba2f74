#pragma once

// Forecasters and adversaries for the experts game.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "experts/potential.hpp"
#include "experts/states.hpp"

namespace experts {

class ExactSolver;

inline constexpr double kForecastTolerance = 1e-12;

// Clamps entries in [-1e-12, 0) to zero and checks that the result is a
// probability vector of length d. Throws ProtocolError otherwise.
void validate_forecast(std::vector<double>& probs, int d);

// The potential forecaster found a negative remainder: f is not a valid
// potential at this (state, decomposition).
class CertificationViolation : public std::runtime_error {
 public:
  CertificationViolation(State state, Decomposition dec, double remainder);
  const State& state() const { return state_; }
  const Decomposition& dec() const { return dec_; }
  double remainder() const { return remainder_; }

 private:
  State state_;
  Decomposition dec_;
  double remainder_;
};

class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::string name() const = 0;
  // Distribution over the dec.d() choices (0-based).
  virtual std::vector<double> forecast(const State& state, const Decomposition& dec) = 0;
  virtual void observe(const State& /*before*/, const Decomposition& /*dec*/, int /*outcome*/) {}
  virtual void reset() {}
};

// p_i = max{0, 1 + f(s_i) - f(k)} for all but one choice, which takes the
// remainder. Choices whose successor is empty cannot be correct, so they get
// probability 0 and the remainder goes to the last choice that can.
class PotentialForecaster : public Forecaster {
 public:
  explicit PotentialForecaster(Potential f);
  std::string name() const override { return "potential:" + f_.name(); }
  std::vector<double> forecast(const State& state, const Decomposition& dec) override;
  const Potential& potential() const { return f_; }

 private:
  double value(const State& s);

  Potential f_;
  std::unordered_map<State, double, StateHash> cache_;
};

// Multiplicative weights. An expert with i mistakes has weight exp(-eta * i);
// since every expert starts at weight 1, the weights are a function of the
// state and no per-expert bookkeeping is needed. Experts past the budget are
// no longer part of the state and carry no weight.
class MultiplicativeWeights : public Forecaster {
 public:
  explicit MultiplicativeWeights(double eta);
  std::string name() const override;
  std::vector<double> forecast(const State& state, const Decomposition& dec) override;

 private:
  double eta_;
};

// Leaders are the experts on the lowest nonempty level.
class MajorityOfLeaders : public Forecaster {
 public:
  std::string name() const override { return "majority"; }
  std::vector<double> forecast(const State& state, const Decomposition& dec) override;
};

class RandomLeader : public Forecaster {
 public:
  std::string name() const override { return "random-leader"; }
  std::vector<double> forecast(const State& state, const Decomposition& dec) override;
};

struct AdversaryPlay {
  Decomposition dec;
  ChoiceSet support;      // the correct choice is drawn uniformly from here
  bool coinflip = false;  // a genuine fair coin between two live branches
};

class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual std::string name() const = 0;
  virtual int d() const = 0;
  virtual AdversaryPlay play(const State& state) = 0;
};

// Binary adversary that halves every level, alternating the side that gets the
// odd expert, then flips a fair coin. When one side would leave nobody, that
// side is never drawn and the round is not a coin flip.
class EvenSplitAdversary : public Adversary {
 public:
  explicit EvenSplitAdversary(int d = 2);
  std::string name() const override { return "even-split"; }
  int d() const override { return 2; }
  AdversaryPlay play(const State& state) override;
};

// The even-split decomposition itself (part 0 gets k_j^0).
Decomposition even_split(const State& state);

class OptimalAdversary : public Adversary {
 public:
  explicit OptimalAdversary(std::shared_ptr<ExactSolver> solver);
  std::string name() const override { return "optimal"; }
  int d() const override;
  AdversaryPlay play(const State& state) override;

 private:
  std::shared_ptr<ExactSolver> solver_;
};

// Splits every level as evenly as possible over A (lower choices take the
// remainder) and draws uniformly from the members of A with a live successor.
class UniformAdversary : public Adversary {
 public:
  UniformAdversary(ChoiceSet choices, int d);
  std::string name() const override { return "uniform:" + choices_.to_string(); }
  int d() const override { return d_; }
  AdversaryPlay play(const State& state) override;

 private:
  ChoiceSet choices_;
  int d_;
};

// 1 + log4(x) for x in [1/2, 1].
double binary_majority_rule(double x);

// 0.5 floor(log2 n) + 0.5 floor(log2 C(floor(log2 n), b)) - 0.5 b, valid for
// 5b <= floor(log2 n).
double lower_bound(std::uint64_t n, int b);
// Human-readable reason lower_bound(n, b) is unavailable, or nullopt.
std::optional<std::string> lower_bound_invalid(std::uint64_t n, int b);

struct MwBound {
  double value = 0.0;
  double eta = 0.0;  // infinity when b = 0 (the bound decreases toward ln n)
};
// min over eta > 0 of (eta b + ln n) / (1 - exp(-eta)).
MwBound mw_bound(std::uint64_t n, int b);

// "potential:fc:<c>", "potential:opt" (or any other potential spec after the
// prefix, except exact), "mw:<eta>", "majority", "random-leader".
std::unique_ptr<Forecaster> make_forecaster(const std::string& spec);

// "even-split", "optimal", "uniform:<1-based choices>". `solver` is only
// needed for optimal.
std::unique_ptr<Adversary> make_adversary(const std::string& spec, int d,
                                          std::shared_ptr<ExactSolver> solver = nullptr);

}  // namespace experts
