#include "experts/strategies.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "experts/errors.hpp"
#include "experts/exact.hpp"

namespace experts {

void validate_forecast(std::vector<double>& probs, int d) {
  if (static_cast<int>(probs.size()) != d) {
    throw ProtocolError("forecast has " + std::to_string(probs.size()) + " entries, expected " +
                        std::to_string(d));
  }
  double sum = 0.0;
  for (double& p : probs) {
    if (!std::isfinite(p) || p < -kForecastTolerance || p > 1.0 + kForecastTolerance) {
      throw ProtocolError("forecast entry " + std::to_string(p) + " is not a probability");
    }
    p = std::clamp(p, 0.0, 1.0);
    sum += p;
  }
  if (std::abs(sum - 1.0) > kForecastTolerance) {
    throw ProtocolError("forecast sums to " + std::to_string(sum));
  }
}

CertificationViolation::CertificationViolation(State state, Decomposition dec, double remainder)
    : std::runtime_error("potential forecaster got remainder " + std::to_string(remainder) +
                         " at state " + state.to_string() + " with decomposition " +
                         dec.to_parts_string() + "; the potential is not certified there"),
      state_(std::move(state)),
      dec_(std::move(dec)),
      remainder_(remainder) {}

PotentialForecaster::PotentialForecaster(Potential f) : f_(std::move(f)) {}

double PotentialForecaster::value(const State& s) {
  auto it = cache_.find(s);
  if (it == cache_.end()) it = cache_.emplace(s, f_(s)).first;
  return it->second;
}

std::vector<double> PotentialForecaster::forecast(const State& state, const Decomposition& dec) {
  const int d = dec.d();
  std::vector<double> probs(d, 0.0);
  std::vector<bool> live(d);
  int last = -1;
  State next;
  const double fk = value(state);
  for (int j = 0; j < d; ++j) {
    next = successor(state, dec, j);
    live[j] = !next.is_zero();
    if (live[j]) {
      last = j;
      probs[j] = std::max(0.0, 1.0 + value(next) - fk);
    }
  }
  if (last < 0) throw ProtocolError("no choice has a nonempty successor");
  double rest = 1.0;
  for (int j = 0; j < d; ++j) {
    if (j != last) rest -= probs[j];
  }
  if (rest < -1e-9) throw CertificationViolation(state, dec, rest);
  probs[last] = std::max(0.0, rest);
  // Renormalize the rounding residue left by clamping a tiny negative remainder.
  double total = 0.0;
  for (double p : probs) total += p;
  for (double& p : probs) p /= total;
  return probs;
}

MultiplicativeWeights::MultiplicativeWeights(double eta) : eta_(eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("mw needs a finite eta > 0");
}

std::string MultiplicativeWeights::name() const {
  std::ostringstream out;
  out << "mw:" << eta_;
  return out.str();
}

namespace {

int lowest_level(const State& state) {
  for (std::size_t i = 0; i < state.levels(); ++i) {
    if (state[i] > 0) return static_cast<int>(i);
  }
  throw DomainError("state has no experts");
}

std::vector<double> normalized(std::vector<double> w) {
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) throw std::logic_error("all forecaster weights are zero");
  for (double& x : w) x /= total;
  return w;
}

}  // namespace

std::vector<double> MultiplicativeWeights::forecast(const State& state, const Decomposition& dec) {
  require_valid(state);
  const int low = lowest_level(state);
  std::vector<double> w(dec.d(), 0.0);
  for (int j = 0; j < dec.d(); ++j) {
    for (int i = low; i <= dec.b(); ++i) {
      // Relative to the leaders' weight, so nothing underflows.
      w[j] += dec.at(j, i) * std::exp(-eta_ * (i - low));
    }
  }
  return normalized(std::move(w));
}

std::vector<double> MajorityOfLeaders::forecast(const State& state, const Decomposition& dec) {
  const int low = lowest_level(state);
  int best = 0;
  for (int j = 1; j < dec.d(); ++j) {
    if (dec.at(j, low) > dec.at(best, low)) best = j;
  }
  std::vector<double> probs(dec.d(), 0.0);
  probs[best] = 1.0;
  return probs;
}

std::vector<double> RandomLeader::forecast(const State& state, const Decomposition& dec) {
  const int low = lowest_level(state);
  std::vector<double> w(dec.d());
  for (int j = 0; j < dec.d(); ++j) w[j] = dec.at(j, low);
  return normalized(std::move(w));
}

namespace {

// Restricts `choices` to the members with a nonempty successor.
ChoiceSet live_support(const State& state, const Decomposition& dec, ChoiceSet choices) {
  std::uint32_t mask = 0;
  for (int j : choices.members()) {
    if (!successor(state, dec, j).is_zero()) mask |= 1u << j;
  }
  if (mask == 0) throw ProtocolError("no drawable choice at state " + state.to_string());
  return ChoiceSet::from_mask(mask);
}

}  // namespace

Decomposition even_split(const State& state) {
  require_valid(state);
  Decomposition dec(2, state.b());
  int even_before = 0;  // r: levels below j with an even count
  for (int j = 0; j <= state.b(); ++j) {
    const Count k = state[j];
    if (k % 2 == 0) {
      dec.at(0, j) = k / 2;
      dec.at(1, j) = k / 2;
      ++even_before;
      continue;
    }
    const Count small = k / 2;
    const Count large = small + 1;
    dec.at(0, j) = even_before % 2 == 0 ? small : large;
    dec.at(1, j) = k - dec.at(0, j);
  }
  return dec;
}

EvenSplitAdversary::EvenSplitAdversary(int d) {
  if (d != 2) throw DomainError("the even-split adversary needs d = 2");
}

AdversaryPlay EvenSplitAdversary::play(const State& state) {
  AdversaryPlay out;
  out.dec = even_split(state);
  out.support = live_support(state, out.dec, ChoiceSet::prefix(2));
  out.coinflip = out.support.size() == 2;
  return out;
}

OptimalAdversary::OptimalAdversary(std::shared_ptr<ExactSolver> solver) : solver_(std::move(solver)) {
  if (!solver_) throw DomainError("the optimal adversary needs an exact solver");
}

int OptimalAdversary::d() const { return solver_->config().d; }

AdversaryPlay OptimalAdversary::play(const State& state) {
  AdversaryMove move = solver_->optimal_adversary_move(state);
  return AdversaryPlay{std::move(move.dec), move.choices, false};
}

UniformAdversary::UniformAdversary(ChoiceSet choices, int d) : choices_(choices), d_(d) {
  if (d < 1 || d > 16) throw DomainError("d must be between 1 and 16");
  if (choices.size() == 0 || (choices.mask() >> d) != 0) {
    throw DomainError("uniform adversary choices must be a nonempty subset of 1.." +
                      std::to_string(d));
  }
}

AdversaryPlay UniformAdversary::play(const State& state) {
  require_valid(state);
  const std::vector<int> members = choices_.members();
  const Count a = static_cast<Count>(members.size());
  AdversaryPlay out;
  out.dec = Decomposition(d_, state.b());
  for (int i = 0; i <= state.b(); ++i) {
    for (Count m = 0; m < a; ++m) {
      out.dec.at(members[m], i) = state[i] / a + (m < state[i] % a ? 1 : 0);
    }
  }
  out.support = live_support(state, out.dec, choices_);
  return out;
}

double binary_majority_rule(double x) {
  if (!(x >= 0.5 && x <= 1.0)) throw DomainError("the majority rule needs x in [1/2, 1]");
  return 1.0 + std::log(x) / std::log(4.0);
}

std::optional<std::string> lower_bound_invalid(std::uint64_t n, int b) {
  if (n == 0) return "n must be at least 1";
  if (b < 0) return "b must be nonnegative";
  const int k = std::bit_width(n) - 1;
  if (5 * b > k) return "b > floor(log2 n)/5";
  return std::nullopt;
}

double lower_bound(std::uint64_t n, int b) {
  if (auto why = lower_bound_invalid(n, b)) throw DomainError("lower_bound: " + *why);
  const int k = std::bit_width(n) - 1;
  // C(k, b) for k <= 63 stays exact in 64 bits when built this way.
  unsigned __int128 binom = 1;
  for (int i = 1; i <= b; ++i) binom = binom * static_cast<unsigned>(k - b + i) / i;
  int log_binom = -1;
  while (binom > 0) {
    binom >>= 1;
    ++log_binom;
  }
  return 0.5 * k + 0.5 * log_binom - 0.5 * b;
}

MwBound mw_bound(std::uint64_t n, int b) {
  if (n == 0) throw DomainError("mw_bound needs n >= 1");
  if (b < 0) throw DomainError("b must be nonnegative");
  const double ln_n = std::log(static_cast<double>(n));
  if (b == 0) return MwBound{ln_n, std::numeric_limits<double>::infinity()};
  auto g = [&](double u) {
    const double eta = std::exp(u);
    return (eta * b + ln_n) / -std::expm1(-eta);
  };
  // The bound is convex in eta; search in log(eta).
  double lo = -30.0;
  double hi = 10.0;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = g(x1);
  double f2 = g(x2);
  while (hi - lo > 1e-12) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = g(x2);
    }
  }
  const double u = 0.5 * (lo + hi);
  return MwBound{g(u), std::exp(u)};
}

namespace {

double parse_positive(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw DomainError(what + ": not a number: '" + text + "'");
  return v;
}

}  // namespace

std::unique_ptr<Forecaster> make_forecaster(const std::string& spec) {
  if (spec.rfind("potential:", 0) == 0) {
    return std::make_unique<PotentialForecaster>(make_potential(spec.substr(10)));
  }
  if (spec.rfind("mw:", 0) == 0) {
    return std::make_unique<MultiplicativeWeights>(parse_positive(spec.substr(3), "mw eta"));
  }
  if (spec == "majority") return std::make_unique<MajorityOfLeaders>();
  if (spec == "random-leader") return std::make_unique<RandomLeader>();
  throw DomainError("unknown forecaster '" + spec +
                    "' (expected potential:fc:<c>, potential:opt, mw:<eta>, majority, random-leader)");
}

std::unique_ptr<Adversary> make_adversary(const std::string& spec, int d,
                                          std::shared_ptr<ExactSolver> solver) {
  if (spec == "even-split") return std::make_unique<EvenSplitAdversary>(d);
  if (spec == "optimal") {
    auto adv = std::make_unique<OptimalAdversary>(std::move(solver));
    if (adv->d() != d) throw DomainError("solver was built for a different d");
    return adv;
  }
  if (spec.rfind("uniform:", 0) == 0) {
    return std::make_unique<UniformAdversary>(parse_choice_set(spec.substr(8), d), d);
  }
  throw DomainError("unknown adversary '" + spec + "' (expected even-split, optimal, uniform:<A>)");
}

}  // namespace experts
