#include "experts/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "experts/errors.hpp"
#include "experts/exact.hpp"
#include "experts/potential.hpp"
#include "experts/sim.hpp"
#include "experts/strategies.hpp"

namespace experts {
namespace {

struct Options {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> ns;
  std::uint64_t n_min = 0;
  std::uint64_t n_max = 0;
  std::string state;
  int b = 1;
  int d = 2;
  std::uint64_t phi_cap = 0;
  bool fast = false;
  bool moves = false;
  std::string memo;
  unsigned threads = 1;
  std::string out_path;
  int imax = 80;
  int jmax = 80;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  std::uint64_t max_rounds = 10000;
  std::string forecaster = "potential:opt";
  std::string adversary = "even-split";
  std::string transcripts;
  std::string potential;
  bool shortcut = false;
};

void check_b_d(const Options& o, int min_d) {
  if (o.b < 0 || o.b > 64) throw DomainError("--b must be between 0 and 64");
  if (o.d < min_d || o.d > 16) {
    throw DomainError("--d must be between " + std::to_string(min_d) + " and 16");
  }
}

Count checked_count(std::uint64_t n) {
  if (n < 1) throw DomainError("--n must be at least 1");
  if (n > std::numeric_limits<Count>::max()) throw DomainError("--n is too large");
  return static_cast<Count>(n);
}

State start_state(const Options& o) {
  if (!o.state.empty()) {
    State s = parse_state(o.state);
    require_valid(s, o.b);
    return s;
  }
  return State::start(checked_count(o.n), o.b);
}

std::shared_ptr<ExactSolver> make_solver(const Options& o, bool record_moves) {
  SolverConfig cfg;
  cfg.b = o.b;
  cfg.d = o.d;
  cfg.phi_cap = o.phi_cap;
  cfg.pairs_only = o.fast;
  cfg.record_moves = record_moves;
  auto solver = std::make_shared<ExactSolver>(cfg);
  if (!o.memo.empty() && std::filesystem::exists(o.memo)) solver->import_table(load_memo(o.memo));
  return solver;
}

void save_solver(const Options& o, const ExactSolver& solver) {
  if (!o.memo.empty()) save_memo(solver.export_table(), o.memo);
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

void cmd_exact(const Options& o, std::ostream& out) {
  check_b_d(o, 2);
  const State start = start_state(o);
  auto solver = make_solver(o, o.moves);
  if (o.threads > 1) solver->precompute(phi(start), o.threads);
  const Rational value = solver->minimax_loss(start);
  out << to_fraction_string(value) << " (" << to_decimal(value) << ")\n";
  if (o.moves) {
    std::vector<State> states;
    for (const auto& [s, v] : solver->export_table().values) {
      if (!s.is_absorbing() && phi(s) <= phi(start)) states.push_back(s);
    }
    std::sort(states.begin(), states.end(), canonical_less);
    out << "state,choices,dec\n";
    for (const State& s : states) {
      const AdversaryMove move = solver->optimal_adversary_move(s);
      out << s.to_string(':') << ',' << quoted(move.choices.to_string()) << ','
          << quoted(move.dec.to_parts_string()) << '\n';
    }
  }
  save_solver(o, *solver);
}

void cmd_surface(Options o, std::ostream& out) {
  if (o.b != 1) throw DomainError("surface is defined for b = 1");
  check_b_d(o, 2);
  if (o.imax < 0 || o.jmax < 0) throw DomainError("--imax and --jmax must be nonnegative");
  auto solver = make_solver(o, false);
  const std::uint64_t top = 2ULL * o.imax + o.jmax;
  if (top > solver->config().phi_cap) {
    throw ResourceLimitError("cell (" + std::to_string(o.imax) + "," + std::to_string(o.jmax) +
                             ") has phi = " + std::to_string(top) + ", above the cap of " +
                             std::to_string(solver->config().phi_cap) +
                             " (raise it with --phi-cap)");
  }
  if (o.threads > 1) solver->precompute(top, o.threads);
  out << "i,j,loss_decimal,loss_rational\n";
  for (int i = 0; i <= o.imax; ++i) {
    for (int j = 0; j <= o.jmax; ++j) {
      out << i << ',' << j << ',';
      if (i == 0 && j == 0) {
        out << ",\n";
        continue;
      }
      const Rational& v =
          solver->minimax_loss(State{static_cast<Count>(i), static_cast<Count>(j)});
      out << to_decimal(v) << ',' << to_fraction_string(v) << '\n';
    }
  }
  save_solver(o, *solver);
}

void cmd_bounds(Options o, std::ostream& out) {
  check_b_d(o, 2);
  std::vector<std::uint64_t> ns = o.ns;
  if (o.n_min > 0 || o.n_max > 0) {
    if (o.n_min < 1 || o.n_max < o.n_min) throw DomainError("need 1 <= --n-min <= --n-max");
    if (o.n_max - o.n_min > 1000000) throw DomainError("--n range is too long");
    for (std::uint64_t n = o.n_min; n <= o.n_max; ++n) ns.push_back(n);
  }
  if (ns.empty()) throw DomainError("give --n or --n-min/--n-max");
  if (o.phi_cap == 0) o.phi_cap = std::min<std::uint64_t>(default_phi_cap(o.b), 64);
  auto solver = make_solver(o, false);

  out << "n,b,lower,exact,exact_rational,f_opt,upper,precise_upper,mw\n";
  for (std::uint64_t n : ns) {
    const State start = State::start(checked_count(n), o.b);
    std::optional<double> lower, exact, precise;
    std::optional<Rational> exact_q;
    out << n << ',' << o.b << ',';
    if (auto why = lower_bound_invalid(n, o.b)) {
      out << "n/a: " << *why;
    } else {
      lower = lower_bound(n, o.b);
      out << to_decimal(*lower);
    }
    out << ',';
    if (phi(start) <= o.phi_cap) {
      exact_q = solver->minimax_loss(start);
      exact = to_double(*exact_q);
      out << to_decimal(*exact_q) << ',' << to_fraction_string(*exact_q);
    } else {
      out << "n/a: phi > " << o.phi_cap << ",n/a: phi > " << o.phi_cap;
    }
    const double fopt = f_opt(start).value;
    const double upper = upper_bound(n, o.b);
    out << ',' << to_decimal(fopt) << ',' << to_decimal(upper) << ',';
    const double ln_n = std::log(static_cast<double>(n));
    if (o.b >= 1 && o.b < ln_n / 2.0) {
      precise = precise_upper_bound(n, o.b);
      out << to_decimal(*precise);
    } else {
      out << "n/a: requires 1 <= b < ln(n)/2";
    }
    const MwBound mw = mw_bound(n, o.b);
    out << ',' << to_decimal(mw.value) << '\n';

    // lower <= exact <= f_opt <= closed forms, wherever present.
    constexpr double kSlack = 1e-9;
    auto require = [&](bool ok, const std::string& what) {
      if (!ok) throw std::logic_error("bound ordering violated at n = " + std::to_string(n) + ": " + what);
    };
    if (lower && exact_q) require(exact_rational(*lower) <= *exact_q, "lower > exact");
    if (lower && !exact) require(*lower <= fopt + kSlack, "lower > f_opt");
    if (exact) require(*exact <= fopt + kSlack, "exact > f_opt");
    if (exact) require(*exact <= mw.value + kSlack, "exact > mw");
    require(fopt <= upper + kSlack, "f_opt > upper");
    if (precise) require(fopt <= *precise + kSlack, "f_opt > precise_upper");
  }
  save_solver(o, *solver);
}

void cmd_simulate(const Options& o, std::ostream& out) {
  check_b_d(o, 2);
  const State start = start_state(o);
  if (o.trials < 1) throw DomainError("--trials must be at least 1");
  if (o.max_rounds < 1) throw DomainError("--max-rounds must be at least 1");
  std::shared_ptr<ExactSolver> solver;
  if (o.adversary == "optimal") solver = make_solver(o, true);
  auto forecaster = make_forecaster(o.forecaster);
  auto adversary = make_adversary(o.adversary, o.d, solver);

  std::vector<Transcript> kept;
  const MonteCarloSummary s = monte_carlo(*forecaster, *adversary, start, o.trials, o.max_rounds,
                                          o.seed, o.transcripts.empty() ? nullptr : &kept);
  out << "forecaster,adversary,start,trials,seed,mean_loss,stderr_loss,mean_expected_loss,"
         "stderr_expected_loss,absorbed\n";
  out << forecaster->name() << ',' << adversary->name() << ',' << start.to_string(':') << ','
      << s.trials << ',' << o.seed << ',' << to_decimal(s.mean_loss) << ','
      << to_decimal(s.stderr_loss) << ',' << to_decimal(s.mean_expected_loss) << ','
      << to_decimal(s.stderr_expected_loss) << ',' << s.absorbed << '\n';

  if (!o.transcripts.empty()) {
    std::filesystem::create_directories(o.transcripts);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      std::ofstream file(std::filesystem::path(o.transcripts) /
                         ("game_" + std::to_string(i) + ".csv"));
      if (!file) throw std::runtime_error("cannot write transcripts to " + o.transcripts);
      write_transcript_csv(file, kept[i]);
    }
  }
  if (solver) save_solver(o, *solver);
}

void cmd_verify(Options o, std::ostream& out) {
  check_b_d(o, 1);
  if (o.phi_cap == 0) o.phi_cap = 6;
  std::shared_ptr<ExactSolver> solver;
  std::optional<Potential> f;
  if (o.potential == "exact") {
    Options so = o;
    so.phi_cap = std::max<std::uint64_t>(o.phi_cap, default_phi_cap(o.b));
    so.d = std::max(o.d, 2);
    solver = make_solver(so, false);
    f = Potential::exact(solver);
  } else {
    f = make_potential(o.potential);
  }
  Certification cert = certify(*f, o.b, o.phi_cap, o.d);
  out << "potential,b,d,phi_cap,status,witness_state,witness_choices,witness_dec,lhs,rhs";
  if (o.shortcut) out << ",shortcut";
  out << '\n';
  out << f->name() << ',' << o.b << ',' << o.d << ',' << o.phi_cap << ',' << to_string(cert.status)
      << ',';
  if (cert.witness) {
    const Witness& w = *cert.witness;
    out << w.state.to_string(':') << ','
        << (w.choices ? quoted(w.choices->to_string()) : std::string()) << ','
        << (w.dec ? quoted(w.dec->to_parts_string()) : std::string()) << ','
        << to_decimal(w.lhs) << ',' << to_decimal(w.rhs);
  } else {
    out << ",,,,";
  }
  if (o.shortcut) {
    const ShortcutResult r = concavity_shortcut_check(*f, o.b, o.phi_cap, o.d);
    out << ',' << (r.passed ? "passed" : "failed");
  }
  out << '\n';
  if (solver) save_solver(o, *solver);
}

void add_solver_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--d", o.d, "number of choices")->capture_default_str();
  cmd->add_option("--phi-cap", o.phi_cap, "largest potential Phi the exact solver accepts");
  cmd->add_flag("--fast", o.fast, "only consider adversary subsets of size 2");
  cmd->add_option("--memo", o.memo, "load and save the exact solver's table here");
  cmd->add_option("--threads", o.threads, "worker threads for precomputation")
      ->capture_default_str();
  cmd->add_option("--out", o.out_path, "write the output here instead of stdout");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Minimax loss of prediction with expert advice under a mistake budget"};
  app.require_subcommand(1);

  auto* exact = app.add_subcommand("exact", "exact minimax loss from (n, 0, ..., 0)");
  exact->add_option("--n", o.n, "number of experts");
  exact->add_option("--state", o.state, "start state k0,k1,... instead of --n");
  exact->add_option("--b", o.b, "mistake budget")->capture_default_str();
  exact->add_flag("--moves", o.moves, "also list the adversary's optimal move per state");
  add_solver_flags(exact, o);

  auto* surface = app.add_subcommand("surface", "grid of the minimax loss at (i, j) for b = 1");
  surface->add_option("--imax", o.imax)->capture_default_str();
  surface->add_option("--jmax", o.jmax)->capture_default_str();
  surface->add_option("--b", o.b)->capture_default_str();
  add_solver_flags(surface, o);

  auto* table = app.add_subcommand("table", "the surface for i = 0..39, j = 0..15");
  table->add_option("--b", o.b)->capture_default_str();
  add_solver_flags(table, o);

  auto* bounds = app.add_subcommand("bounds", "lower bound, exact value and upper bounds");
  bounds->add_option("--n", o.ns, "number of experts (repeatable)");
  bounds->add_option("--n-min", o.n_min);
  bounds->add_option("--n-max", o.n_max);
  bounds->add_option("--b", o.b)->capture_default_str();
  add_solver_flags(bounds, o);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo games");
  simulate->add_option("--forecaster", o.forecaster)->capture_default_str();
  simulate->add_option("--adversary", o.adversary)->capture_default_str();
  simulate->add_option("--n", o.n);
  simulate->add_option("--state", o.state);
  simulate->add_option("--b", o.b)->capture_default_str();
  simulate->add_option("--trials", o.trials)->capture_default_str();
  simulate->add_option("--seed", o.seed)->required();
  simulate->add_option("--max-rounds", o.max_rounds)->capture_default_str();
  simulate->add_option("--transcripts", o.transcripts, "directory for per-game transcript CSVs");
  add_solver_flags(simulate, o);

  auto* verify = app.add_subcommand("verify", "certify a potential function on small states");
  verify->add_option("--potential", o.potential, "fc:<c>, opt, const:<v>, linear, perfect, exact")
      ->required();
  verify->add_option("--b", o.b)->capture_default_str();
  verify->add_flag("--shortcut", o.shortcut, "also run the concavity shortcut check");
  add_solver_flags(verify, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitDomain;
  }

  std::ostringstream buffer;
  try {
    if (exact->parsed()) {
      if (o.n == 0 && o.state.empty()) throw DomainError("give --n or --state");
      cmd_exact(o, buffer);
    } else if (surface->parsed()) {
      cmd_surface(o, buffer);
    } else if (table->parsed()) {
      o.imax = 39;
      o.jmax = 15;
      cmd_surface(o, buffer);
    } else if (bounds->parsed()) {
      cmd_bounds(o, buffer);
    } else if (simulate->parsed()) {
      if (o.n == 0 && o.state.empty()) throw DomainError("give --n or --state");
      cmd_simulate(o, buffer);
    } else if (verify->parsed()) {
      cmd_verify(o, buffer);
    }
  } catch (const ResourceLimitError& e) {
    err << "error: " << e.what() << '\n';
    return kExitResource;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const IncompatibleMemoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  if (o.out_path.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(o.out_path);
    if (!file) {
      err << "error: cannot write " << o.out_path << '\n';
      return kExitFailure;
    }
    file << buffer.str();
  }
  return kExitOk;
}

}  // namespace experts
