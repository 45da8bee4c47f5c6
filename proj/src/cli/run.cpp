#include "ncpoa/analysis.hpp"
#include "ncpoa/cli.hpp"
#include "ncpoa/equilibrium.hpp"
#include "ncpoa/optimum.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace ncpoa::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* kSweepSides = "1e-4,1e-3,0.01,0.05,0.1,0.2,0.5,1,2,5,10";

// A run that finished but with an unconverged solver somewhere.
struct Outcome {
  Table table;
  bool converged = true;
};

std::string join_rates(const RateVector& x) {
  std::string out;
  for (Eigen::Index i = 0; i < x.size(); ++i) out += (i ? ";" : "") + format_number(x(i));
  return out;
}

std::string describe(const Profile& p) {
  if (const auto* x = std::get_if<RateVector>(&p)) return join_rates(*x);
  const auto& f = std::get<FlowAllocation>(p);
  return "y=" + join_rates(f.y) + " z1=" + format_number(f.z1) + " zN=" + format_number(f.zN) +
         " v1=" + format_number(f.v1) + " vN=" + format_number(f.vN);
}

Game game_of(const ExperimentConfig& c) { return static_cast<Game>(c.game); }

IterOptions iter_options(const ExperimentConfig& c) {
  IterOptions o;
  o.damping = c.damping;
  o.max_iter = c.max_iter;
  o.proximal = c.proximal;
  o.tol = c.iter_tol;
  return o;
}

EfficiencyOptions efficiency_options(const ExperimentConfig& c) {
  return {c.samples, iter_options(c)};
}

std::string kind_name(OutcomeKind k) { return k == OutcomeKind::Point ? "point" : "segment"; }

Outcome run_optimal(const ExperimentConfig& c) {
  const auto s = build_scenario(c);
  const auto r = solve_optimum(game_of(c), s);
  Outcome o;
  o.converged = r.converged;
  o.table.columns = {"game", "method", "surplus", "kkt_residual", "converged", "sweeps", "profile"};
  o.table.rows.push_back({to_string(game_of(c)), to_string(r.method), r.surplus, r.kkt_residual,
                          r.converged, static_cast<std::int64_t>(r.sweeps), describe(r.profile)});
  return o;
}

Outcome run_nash(const ExperimentConfig& c) {
  const auto s = build_scenario(c);
  const Game g = game_of(c);
  const NashOutcome ne = g == Game::Coding ? nash_game2(s, iter_options(c)) : solve_nash(g, s);

  double worst = 0.0;
  bool verified = true;
  for (const auto& p : ne.profiles(9)) {
    const auto v = verify_nash(s, g, p, c.verify_tol);
    worst = std::max(worst, v.worst_gain);
    verified = verified && v.pass;
  }

  Outcome o;
  o.converged = ne.converged;
  o.table.columns = {"game",     "kind",       "regime",   "axis",       "lo",     "hi",        "boundary",
                     "converged", "iterations", "verified", "worst_gain", "profile", "profile_hi"};
  std::vector<Cell> row{to_string(g), std::string(ne.is_segment() ? "segment" : "point"), to_string(ne.regime)};
  if (ne.is_segment()) {
    const auto& seg = ne.segment();
    row.insert(row.end(), {to_string(seg.axis), seg.lo, seg.hi});
  } else {
    row.insert(row.end(), {std::string(), std::string(), std::string()});
  }
  row.insert(row.end(), {ne.boundary, ne.converged, static_cast<std::int64_t>(ne.iterations), verified, worst});
  if (ne.is_segment()) {
    row.emplace_back(join_rates(ne.segment().at(ne.segment().lo)));
    row.emplace_back(join_rates(ne.segment().at(ne.segment().hi)));
  } else {
    row.emplace_back(describe(ne.point()));
    row.emplace_back(std::string());
  }
  o.table.rows.push_back(std::move(row));
  return o;
}

std::vector<Cell> efficiency_cells(const EfficiencyReport& r) {
  return {kind_name(r.outcome_kind), to_string(r.regime), r.boundary,      r.ne_surplus_min, r.ne_surplus_max,
          r.opt_surplus,             r.efficiency_min,    r.efficiency_max, r.converged};
}

const std::vector<std::string> kEfficiencyColumns = {
    "kind", "regime", "boundary", "ne_surplus_min", "ne_surplus_max", "opt_surplus", "efficiency_min", "efficiency_max",
    "converged"};

Outcome run_efficiency(const ExperimentConfig& c) {
  const auto r = efficiency(build_scenario(c), game_of(c), efficiency_options(c));
  Outcome o;
  o.converged = r.converged;
  o.table.columns = {"game"};
  o.table.columns.insert(o.table.columns.end(), kEfficiencyColumns.begin(), kEfficiencyColumns.end());
  auto row = efficiency_cells(r);
  row.insert(row.begin(), to_string(r.game));
  o.table.rows.push_back(std::move(row));
  return o;
}

Outcome run_scan(const ExperimentConfig& c) {
  ScanGrid grid;
  grid.ratios = parse_grid(c.ratios);
  grid.routing_levels = parse_grid(c.levels);
  grid.n_users.clear();
  for (double n : parse_grid(c.n_list)) grid.n_users.push_back(static_cast<int>(std::lround(n)));
  grid.side_slopes = parse_grid(c.sides.empty() ? "1e-4" : c.sides);
  grid.a = c.a;
  const auto res = poa_scan(game_of(c), c.beta, grid);

  Outcome o;
  o.table.columns = {"ratio", "routing_level", "n_users", "side", "kind", "efficiency_min", "efficiency_max",
                     "converged", "is_min"};
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    o.converged = o.converged && r.report.converged;
    o.table.rows.push_back({r.ratio, r.routing_level, static_cast<std::int64_t>(r.n_users), r.side,
                            kind_name(r.report.outcome_kind), r.report.efficiency_min, r.report.efficiency_max,
                            r.report.converged, i == res.argmin});
  }
  return o;
}

Outcome run_montecarlo(const ExperimentConfig& c) {
  MonteCarloRanges r;
  std::tie(r.a_lo, r.a_hi) = parse_range(c.a_range);
  std::tie(r.alpha_lo, r.alpha_hi) = parse_range(c.alpha_range);
  std::tie(r.scale_lo, r.scale_hi) = parse_range(c.scale_range);
  std::tie(r.side_lo, r.side_hi) = parse_range(c.side_range);
  r.n_users = c.n_users.value_or(2);
  const auto rows = monte_carlo(game_of(c), c.beta, c.count, c.seed, r);

  Outcome o;
  o.table.columns = {"seed_index",     "n_users",        "a",         "beta", "utilities", "a1", "aN",
                     "efficiency_min", "efficiency_max", "converged", "error"};
  for (const auto& row : rows) {
    const auto& s = row.scenario;
    o.converged = o.converged && row.converged();
    o.table.rows.push_back({static_cast<std::int64_t>(row.index), static_cast<std::int64_t>(s.n_users()), s.a,
                            s.beta, format_utilities(s), s.side ? s.side->a1 : kNaN, s.side ? s.side->aN : kNaN,
                            row.report ? row.report->efficiency_min : kNaN,
                            row.report ? row.report->efficiency_max : kNaN, row.converged(), row.error});
  }
  return o;
}

Outcome run_sweep(const ExperimentConfig& c) {
  SideSweepParams p;
  p.n_users = c.n_users.value_or(500);
  p.a = c.a;
  const auto rows = sweep_side_cost(parse_grid(c.sides.empty() ? kSweepSides : c.sides), p);
  Outcome o;
  o.table.columns = {"side", "efficiency", "ne_surplus", "opt_surplus", "converged"};
  for (const auto& r : rows) {
    o.converged = o.converged && r.report.converged;
    o.table.rows.push_back({r.side, r.report.efficiency_min, r.report.ne_surplus_min, r.report.opt_surplus,
                            r.report.converged});
  }
  return o;
}

Outcome run_family(const ExperimentConfig& c) {
  const auto id = parse_family(c.family);
  if (!id) {
    std::string names;
    for (auto f : all_families()) names += (names.empty() ? "" : ", ") + to_string(f);
    throw ConfigError("id: unknown family '" + c.family + "' (one of " + names + ")");
  }
  FamilyParams p;
  p.beta = c.beta;
  p.eps = c.eps;
  p.n_users = c.n_users.value_or(*id == FamilyId::Game1JT ? 2000 : 500);
  const auto fam = make_worst_family(*id, p);
  const auto r = efficiency(fam.scenario, fam.game, efficiency_options(c));

  if (!c.emit_scenario.empty()) {
    std::ofstream f(c.emit_scenario);
    if (!f) throw ConfigError("cannot write '" + c.emit_scenario + "'");
    f << "game = " << to_string(fam.game) << '\n';
    for (const auto& [k, v] : scenario_pairs(fam.scenario)) f << k << " = " << v << '\n';
  }

  Outcome o;
  o.converged = r.converged;
  o.table.columns = {"id", "game", "n_users", "beta", "predicted", "sigma"};
  o.table.columns.insert(o.table.columns.end(), kEfficiencyColumns.begin(), kEfficiencyColumns.end());
  std::vector<Cell> row{to_string(*id),   to_string(fam.game),       static_cast<std::int64_t>(fam.scenario.n_users()),
                        fam.scenario.beta, fam.predicted_efficiency, fam.sigma};
  for (auto& cell : efficiency_cells(r)) row.push_back(std::move(cell));
  o.table.rows.push_back(std::move(row));
  return o;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int run(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  Outcome result;
  try {
    if (c.command == "optimal") result = run_optimal(c);
    else if (c.command == "nash") result = run_nash(c);
    else if (c.command == "efficiency") result = run_efficiency(c);
    else if (c.command == "poa-scan") result = run_scan(c);
    else if (c.command == "montecarlo") result = run_montecarlo(c);
    else if (c.command == "sweep-side-cost") result = run_sweep(c);
    else if (c.command == "worst-family") result = run_family(c);
    else throw ConfigError(c.command.empty() ? "no command given" : "unknown command '" + c.command + "'");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitNoConvergence;
  }

  const auto config = resolved(c);
  const std::string generated = c.timestamp ? utc_now() : std::string();
  std::ofstream file;
  if (!c.out.empty()) {
    file.open(c.out);
    if (!file) {
      err << "error: cannot write '" << c.out << "'\n";
      return kExitInvalid;
    }
  }
  std::ostream& sink = c.out.empty() ? out : file;
  if (c.format == "json") write_json(sink, result.table, config, generated);
  else write_csv(sink, result.table, config, generated);

  if (!result.converged) {
    err << "warning: solver did not converge on at least one row\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optima, equilibria and price-of-anarchy estimates for routing and network-coding games", "ncpoa"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::map<std::string, std::string> given;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  auto text = [&](const std::string& flag, const std::string& key, const std::string& help) {
    options.emplace_back(key, app.add_option("--" + flag, given[key], help));
  };
  std::string config_path;
  std::string scenario_path;
  std::string linear;
  std::string alpha;
  app.add_option("--config", config_path, "Key/value config or a previous result file");
  app.add_option("--scenario", scenario_path, "Key/value scenario file (utilities, a, beta, a1, aN, game)");
  auto* linear_opt = app.add_option("--linear", linear, "Linear slopes, comma separated");
  auto* alpha_opt = app.add_option("--alpha", alpha, "Alpha-fair exponents, comma separated");
  text("utilities", "utilities", "Utility list: linear:G or alpha:A[:SCALE], comma separated");
  text("game", "game", "Game / problem index: 1, 2 or 3");
  text("a", "a", "Bottleneck price slope");
  text("beta", "beta", "Price discrimination parameter in (0,1]");
  text("a1", "a1", "Side-link slope of user 1 (Game 3)");
  text("aN", "aN", "Side-link slope of user N (Game 3)");
  text("seed", "seed", "Random seed");
  text("count", "count", "Number of random scenarios");
  text("n", "n", "Number of users");
  text("eps", "eps", "Side-link slope for game3-general");
  text("id", "id", "Worst-case family id");
  text("ratios", "ratios", "Scan grid of gamma_1/gamma_N: lo:hi:step or list");
  text("levels", "levels", "Scan grid of routing slope / (gamma_1 + gamma_N)");
  text("n-list", "n-list", "Scan grid of user counts");
  text("sides", "sides", "Side-link slopes (a1 = aN): lo:hi:step or list");
  text("a-range", "a-range", "Random a range lo:hi");
  text("alpha-range", "alpha-range", "Random alpha range lo:hi");
  text("scale-range", "scale-range", "Random utility scale range lo:hi");
  text("side-range", "side-range", "Random side-link slope range lo:hi");
  text("samples", "samples", "Interior samples on an equilibrium segment");
  text("damping", "damping", "Best-response damping in (0,1]");
  text("max-iter", "max-iter", "Best-response iteration cap");
  text("proximal", "proximal", "Proximal weight of the best-response iteration, in units of a");
  text("iter-tol", "iter-tol", "Best-response convergence tolerance");
  text("verify-tol", "verify-tol", "Deviation gain tolerance for equilibrium checks");
  text("format", "format", "csv or json");
  text("emit-scenario", "emit-scenario", "worst-family: also write the scenario to this file");
  std::string out_path;
  app.add_option("--out", out_path, "Output file (default stdout)");
  bool no_timestamp = false;
  auto* no_ts = app.add_flag("--no-timestamp", no_timestamp, "Omit the generation timestamp");

  for (const auto& name : commands()) app.add_subcommand(name, "Run the " + name + " experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cli::apply(cfg, read_key_values(config_path));
    if (!scenario_path.empty()) {
      const auto pairs = read_key_values(scenario_path);
      for (const auto& [k, v] : pairs)
        if (k != "utilities" && k != "a" && k != "beta" && k != "a1" && k != "aN" && k != "game")
          throw ConfigError(scenario_path + ": '" + k + "' is not a scenario key");
      cli::apply(cfg, pairs);
    }
    KeyValues flags;
    if (linear_opt->count() && alpha_opt->count()) throw ConfigError("use either --linear or --alpha, not both");
    auto expand = [](const std::string& list, const std::string& prefix) {
      std::string joined;
      std::stringstream ss(list);
      for (std::string tok; std::getline(ss, tok, ',');) joined += (joined.empty() ? "" : ",") + prefix + tok;
      return joined;
    };
    if (linear_opt->count()) flags.emplace_back("utilities", expand(linear, "linear:"));
    if (alpha_opt->count()) flags.emplace_back("utilities", expand(alpha, "alpha:"));
    for (const auto& [key, opt] : options)
      if (opt->count()) flags.emplace_back(key, given[key]);
    if (no_ts->count()) flags.emplace_back("timestamp", "false");
    cli::apply(cfg, flags);
    for (const auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    cfg.out = out_path;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return run(cfg, out, err);
}

}  // namespace ncpoa::cli
