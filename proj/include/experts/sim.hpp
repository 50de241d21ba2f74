#pragma once

// Playing games: seeded simulation, exact expectations for small states, and
// the level-count traces behind the lower bound.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "experts/rational.hpp"
#include "experts/states.hpp"
#include "experts/strategies.hpp"

namespace experts {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so extra draws in one role never shift another.
class CounterRng {
 public:
  static std::uint64_t mix(std::uint64_t x);
  static std::uint64_t bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);
  // Uniform in [0, 1) with 53 random bits.
  static double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);
  // Seed of game number `index` in a batch.
  static std::uint64_t game_seed(std::uint64_t seed, std::uint64_t index);
};

enum Stream : std::uint64_t { kForecastStream = 1, kOutcomeStream = 2 };

struct RoundRecord {
  std::uint64_t round = 0;  // 1-based
  State before;
  Decomposition dec;
  std::vector<double> probs;
  int forecast = 0;  // 0-based
  int outcome = 0;   // 0-based
  int loss = 0;      // 1 on a mismatch
  double expected_loss = 0.0;  // 1 - probs[outcome]
  State after;
  bool coinflip = false;
};

struct Transcript {
  State start;
  State final_state;
  std::vector<RoundRecord> rounds;
  bool absorbed = false;

  std::uint64_t total_loss() const;
  double total_expected_loss() const;
};

// Plays until the absorbing state or max_rounds. Throws ProtocolError (with
// the round number) when the adversary's move is not legal.
Transcript play_game(Forecaster& forecaster, Adversary& adversary, const State& start,
                     std::uint64_t max_rounds, std::uint64_t seed);

// Header: round,state_before,dec,forecast_probs,forecast,outcome,loss,state_after,coinflip
void write_transcript_csv(std::ostream& out, const Transcript& t, bool header = true);

struct MonteCarloSummary {
  std::uint64_t trials = 0;
  double mean_loss = 0.0;
  double stderr_loss = 0.0;
  double mean_expected_loss = 0.0;
  double stderr_expected_loss = 0.0;
  std::uint64_t absorbed = 0;
};

// Game i uses CounterRng::game_seed(seed, i); the forecaster is reset between games.
MonteCarloSummary monte_carlo(Forecaster& forecaster, Adversary& adversary, const State& start,
                              std::uint64_t trials, std::uint64_t max_rounds, std::uint64_t seed,
                              std::vector<Transcript>* keep = nullptr);

// Exact expected loss of a fixed pair of strategies from `start`. Both must be
// functions of the state only. The forecaster's probabilities are taken as
// exact binary fractions. Throws ResourceLimitError when phi(start) > phi_cap.
Rational exact_expected_loss(Forecaster& forecaster, Adversary& adversary, const State& start,
                             std::uint64_t phi_cap);

// g[t][i] = number of experts with exactly i mistakes after t rounds of the
// even-split adversary from (n, 0, ..., 0); t = 0..rounds.
struct GiTrace {
  std::vector<std::vector<Count>> g;
};

GiTrace trace_g(Count n, int b, std::uint64_t rounds, std::uint64_t seed);

struct TStarSummary {
  std::vector<std::uint64_t> values;  // one per trial
  std::uint64_t censored = 0;         // trials that hit the round cap
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  double mean = 0.0;
  double loss_floor = 0.0;  // min / 2
};

// t_b* on each even-split trajectory: the first t after which g_b stays <= 1.
// A trajectory is followed until at most one expert survives, which fixes t_b*
// exactly; `max_rounds` is a safety cap and trials reaching it are counted as
// censored (their value is a lower bound).
TStarSummary estimate_t_b_star(Count n, int b, std::uint64_t trials, std::uint64_t seed,
                               std::uint64_t max_rounds = 100000);

}  // namespace experts
