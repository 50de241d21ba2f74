#include "experts/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "experts/errors.hpp"

namespace experts {

std::uint64_t CounterRng::mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return mix(mix(mix(seed) ^ stream) ^ counter);
}

double CounterRng::uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return static_cast<double>(bits(seed, stream, counter) >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::game_seed(std::uint64_t seed, std::uint64_t index) {
  return mix(seed ^ mix(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t Transcript::total_loss() const {
  std::uint64_t total = 0;
  for (const auto& r : rounds) total += r.loss;
  return total;
}

double Transcript::total_expected_loss() const {
  double total = 0.0;
  for (const auto& r : rounds) total += r.expected_loss;
  return total;
}

namespace {

int draw_from(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  int last = 0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] <= 0.0) continue;
    last = static_cast<int>(j);
    acc += probs[j];
    if (u < acc) return last;
  }
  return last;
}

void check_play(const State& state, const AdversaryPlay& play, int d, std::uint64_t round) {
  auto fail = [&](const std::string& why) {
    throw ProtocolError("round " + std::to_string(round) + ": " + why);
  };
  if (play.dec.d() != d) fail("decomposition has the wrong number of choices");
  if (!play.dec.decomposes(state)) {
    fail("decomposition " + play.dec.to_parts_string() + " does not split state " +
         state.to_string());
  }
  if (play.support.size() == 0 || (play.support.mask() >> d) != 0) fail("empty or invalid support");
  for (int j : play.support.members()) {
    if (successor(state, play.dec, j).is_zero()) {
      fail("choice " + std::to_string(j + 1) + " would leave no experts");
    }
  }
}

}  // namespace

Transcript play_game(Forecaster& forecaster, Adversary& adversary, const State& start,
                     std::uint64_t max_rounds, std::uint64_t seed) {
  require_valid(start);
  if (max_rounds < 1) throw DomainError("max_rounds must be at least 1");
  forecaster.reset();
  Transcript t;
  t.start = start;
  State state = start;
  for (std::uint64_t round = 1; round <= max_rounds && !state.is_absorbing(); ++round) {
    AdversaryPlay play = adversary.play(state);
    check_play(state, play, adversary.d(), round);

    RoundRecord r;
    r.round = round;
    r.before = state;
    r.probs = forecaster.forecast(state, play.dec);
    validate_forecast(r.probs, adversary.d());
    r.forecast = draw_from(r.probs, CounterRng::uniform(seed, kForecastStream, round));
    const std::vector<int> members = play.support.members();
    const double u = CounterRng::uniform(seed, kOutcomeStream, round);
    const auto pick = std::min<std::size_t>(static_cast<std::size_t>(u * members.size()),
                                            members.size() - 1);
    r.outcome = members[pick];
    r.loss = r.forecast == r.outcome ? 0 : 1;
    r.expected_loss = 1.0 - r.probs[r.outcome];
    r.after = successor(state, play.dec, r.outcome);
    r.coinflip = play.coinflip;
    forecaster.observe(state, play.dec, r.outcome);
    state = r.after;
    r.dec = std::move(play.dec);
    t.rounds.push_back(std::move(r));
  }
  t.final_state = state;
  t.absorbed = state.is_absorbing();
  return t;
}

void write_transcript_csv(std::ostream& out, const Transcript& t, bool header) {
  if (header) {
    out << "round,state_before,dec,forecast_probs,forecast,outcome,loss,state_after,coinflip\n";
  }
  for (const auto& r : t.rounds) {
    out << r.round << ',' << r.before.to_string(':') << ",\"" << r.dec.to_parts_string()
        << "\",";
    for (std::size_t j = 0; j < r.probs.size(); ++j) {
      if (j > 0) out << ':';
      out << to_decimal(r.probs[j]);
    }
    out << ',' << r.forecast + 1 << ',' << r.outcome + 1 << ',' << r.loss << ','
        << r.after.to_string(':') << ',' << (r.coinflip ? 1 : 0) << '\n';
  }
}

MonteCarloSummary monte_carlo(Forecaster& forecaster, Adversary& adversary, const State& start,
                              std::uint64_t trials, std::uint64_t max_rounds, std::uint64_t seed,
                              std::vector<Transcript>* keep) {
  if (trials < 1) throw DomainError("trials must be at least 1");
  double sum = 0.0, sum_sq = 0.0, esum = 0.0, esum_sq = 0.0;
  MonteCarloSummary s;
  s.trials = trials;
  for (std::uint64_t i = 0; i < trials; ++i) {
    Transcript t = play_game(forecaster, adversary, start, max_rounds,
                             CounterRng::game_seed(seed, i));
    const double loss = static_cast<double>(t.total_loss());
    const double eloss = t.total_expected_loss();
    sum += loss;
    sum_sq += loss * loss;
    esum += eloss;
    esum_sq += eloss * eloss;
    if (t.absorbed) ++s.absorbed;
    if (keep != nullptr) keep->push_back(std::move(t));
  }
  const double n = static_cast<double>(trials);
  auto stderr_of = [n](double total, double total_sq) {
    if (n < 2) return 0.0;
    const double mean = total / n;
    const double var = std::max(0.0, (total_sq - n * mean * mean) / (n - 1));
    return std::sqrt(var / n);
  };
  s.mean_loss = sum / n;
  s.stderr_loss = stderr_of(sum, sum_sq);
  s.mean_expected_loss = esum / n;
  s.stderr_expected_loss = stderr_of(esum, esum_sq);
  return s;
}

namespace {

class ExpectationOracle {
 public:
  ExpectationOracle(Forecaster& f, Adversary& a) : forecaster_(f), adversary_(a) {}

  const Rational& value(const State& state) {
    if (auto it = memo_.find(state); it != memo_.end()) return it->second;
    Rational v = evaluate(state);
    return memo_.emplace(state, std::move(v)).first->second;
  }

 private:
  Rational evaluate(const State& state) {
    if (state.is_absorbing()) return Rational(0);
    AdversaryPlay play = adversary_.play(state);
    const int d = adversary_.d();
    check_play(state, play, d, 0);
    std::vector<double> probs = forecaster_.forecast(state, play.dec);
    validate_forecast(probs, d);

    // Exact probabilities; the largest entry absorbs the rounding so they sum to 1.
    const auto top = static_cast<std::size_t>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
    std::vector<Rational> p(d);
    Rational rest = 1;
    for (int j = 0; j < d; ++j) {
      if (static_cast<std::size_t>(j) == top) continue;
      p[j] = exact_rational(probs[j]);
      rest -= p[j];
    }
    p[top] = rest;

    const std::vector<int> members = play.support.members();
    const int a = static_cast<int>(members.size());
    Rational round_loss = 0;
    Rational future = 0;
    bool self_loop = false;
    for (int j : members) {
      round_loss += 1 - p[j];
      State next = successor(state, play.dec, j);
      if (next == state) {
        self_loop = true;
      } else {
        future += value(next);
      }
    }
    if (play.coinflip) {
      Rational half = round_loss / a;
      half.canonicalize();
      if (half != Rational(1, 2)) {
        throw std::logic_error("coin-flip round at " + state.to_string() +
                               " has expected loss " + to_fraction_string(half));
      }
    }
    Rational result;
    if (!self_loop) {
      result = (round_loss + future) / a;
    } else if (a > 1) {
      // E = (round_loss + future + E) / a
      result = (round_loss + future) / (a - 1);
    } else if (round_loss == 0) {
      result = 0;
    } else {
      throw DomainError("the adversary repeats state " + state.to_string() +
                        " forever with positive loss per round");
    }
    result.canonicalize();
    return result;
  }

  Forecaster& forecaster_;
  Adversary& adversary_;
  std::map<State, Rational> memo_;
};

}  // namespace

Rational exact_expected_loss(Forecaster& forecaster, Adversary& adversary, const State& start,
                             std::uint64_t phi_cap) {
  require_valid(start);
  if (phi(start) > phi_cap) {
    throw ResourceLimitError("state " + start.to_string() + " has phi = " +
                             std::to_string(phi(start)) + ", above the cap of " +
                             std::to_string(phi_cap));
  }
  forecaster.reset();
  ExpectationOracle oracle(forecaster, adversary);
  return oracle.value(start);
}

namespace {

State even_split_step(const State& state, std::uint64_t seed, std::uint64_t round,
                      EvenSplitAdversary& adv) {
  AdversaryPlay play = adv.play(state);
  const std::vector<int> members = play.support.members();
  const double u = CounterRng::uniform(seed, kOutcomeStream, round);
  const auto pick = std::min<std::size_t>(static_cast<std::size_t>(u * members.size()),
                                          members.size() - 1);
  return successor(state, play.dec, members[pick]);
}

}  // namespace

GiTrace trace_g(Count n, int b, std::uint64_t rounds, std::uint64_t seed) {
  State state = State::start(n, b);
  require_valid(state);
  EvenSplitAdversary adv;
  GiTrace trace;
  trace.g.reserve(rounds + 1);
  trace.g.emplace_back(state.counts().begin(), state.counts().end());
  for (std::uint64_t t = 1; t <= rounds; ++t) {
    state = even_split_step(state, seed, t, adv);
    trace.g.emplace_back(state.counts().begin(), state.counts().end());
  }
  return trace;
}

TStarSummary estimate_t_b_star(Count n, int b, std::uint64_t trials, std::uint64_t seed,
                               std::uint64_t max_rounds) {
  if (trials < 1) throw DomainError("trials must be at least 1");
  EvenSplitAdversary adv;
  TStarSummary s;
  s.values.reserve(trials);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t game = CounterRng::game_seed(seed, trial);
    State state = State::start(n, b);
    require_valid(state);
    std::uint64_t t_star = state[b] > 1 ? 1 : 0;
    std::uint64_t t = 0;
    while (state.total() > 1 && t < max_rounds) {
      ++t;
      state = even_split_step(state, game, t, adv);
      if (state[b] > 1) t_star = t + 1;
    }
    if (state.total() > 1) ++s.censored;
    s.values.push_back(t_star);
  }
  s.min = *std::min_element(s.values.begin(), s.values.end());
  s.max = *std::max_element(s.values.begin(), s.values.end());
  double total = 0.0;
  for (auto v : s.values) total += static_cast<double>(v);
  s.mean = total / static_cast<double>(trials);
  s.loss_floor = static_cast<double>(s.min) / 2.0;
  return s;
}

}  // namespace experts
