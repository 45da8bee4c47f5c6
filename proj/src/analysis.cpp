#include "ncpoa/analysis.hpp"

#include "ncpoa/optimum.hpp"
#include "ncpoa/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <stdexcept>

namespace ncpoa {

namespace {

Scenario linear_scenario(const std::vector<double>& gammas, double a, double beta) {
  Scenario s;
  for (double g : gammas) s.utilities.push_back(UtilityFunction::linear(g));
  s.a = a;
  s.beta = beta;
  return s;
}

double linear_sigma(const Scenario& s) {
  const int last = s.last();
  double sigma = s.utilities[0].gamma() + s.utilities[last].gamma();
  for (int n = 1; n < last; ++n) sigma = std::max(sigma, s.utilities[n].gamma());
  return sigma;
}

void require_general(const FamilyParams& p) {
  if (p.n_users < 3) throw std::invalid_argument("general worst-case families need n_users >= 3");
}

}  // namespace

EfficiencyReport efficiency(const Scenario& s, Game game, const EfficiencyOptions& opts) {
  require_valid(s);
  if (game == Game::CostlySide && !s.side)
    throw std::invalid_argument("Game 3 requires side-link slopes a1, aN");
  if (game != Game::CostlySide && s.side)
    throw std::invalid_argument("Games 1 and 2 assume zero-cost side links; drop a1/aN");

  const auto opt = solve_optimum(game, s);
  if (!(opt.surplus >= 1e-12))
    throw std::domain_error("degenerate scenario: optimal surplus below 1e-12");

  const NashOutcome ne = game == Game::Coding ? nash_game2(s, opts.iter) : solve_nash(game, s);

  EfficiencyReport r;
  r.game = game;
  r.scenario = s;
  r.opt_surplus = opt.surplus;
  r.outcome_kind = ne.is_segment() ? OutcomeKind::Segment : OutcomeKind::Point;
  r.regime = ne.regime;
  r.boundary = ne.boundary;
  r.converged = ne.converged && opt.converged;

  const auto profiles = ne.profiles(opts.segment_samples);
  r.ne_surplus_min = r.ne_surplus_max = surplus(game, s, profiles.front());
  for (const auto& p : profiles) {
    const double v = surplus(game, s, p);
    r.ne_surplus_min = std::min(r.ne_surplus_min, v);
    r.ne_surplus_max = std::max(r.ne_surplus_max, v);
  }
  r.efficiency_min = r.ne_surplus_min / opt.surplus;
  r.efficiency_max = r.ne_surplus_max / opt.surplus;
  return r;
}

std::string to_string(FamilyId id) {
  switch (id) {
    case FamilyId::Game1JT: return "game1-jt";
    case FamilyId::Game2TwoUser: return "game2-two-user";
    case FamilyId::Game2General: return "game2-general";
    case FamilyId::Game2Subcase: return "game2-subcase";
    case FamilyId::Game3General: return "game3-general";
  }
  return "?";
}

std::vector<FamilyId> all_families() {
  return {FamilyId::Game1JT, FamilyId::Game2TwoUser, FamilyId::Game2General, FamilyId::Game2Subcase,
          FamilyId::Game3General};
}

std::optional<FamilyId> parse_family(const std::string& name) {
  std::string key;
  for (char c : name) key += c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (auto id : all_families())
    if (to_string(id) == key) return id;
  return std::nullopt;
}

WorstCaseFamily make_worst_family(FamilyId id, const FamilyParams& p) {
  const int n = p.n_users;
  std::vector<double> g;
  WorstCaseFamily out{id, Game::Coding, {}, 0.0, 0.0};
  switch (id) {
    case FamilyId::Game1JT: {
      if (n < 2) throw std::invalid_argument("game1-jt needs n_users >= 2");
      g.assign(n, 2.0 / 3.0);
      g[0] = 1.0;
      out.game = Game::Routing;
      out.scenario = linear_scenario(g, 1.0, 1.0);
      out.predicted_efficiency = 2.0 / 3.0;
      break;
    }
    case FamilyId::Game2TwoUser: {
      out.scenario = linear_scenario({1.0, p.beta / 2.0}, 1.0, p.beta);
      out.predicted_efficiency = 3.0 / ((2.0 + p.beta) * (2.0 + p.beta));
      break;
    }
    case FamilyId::Game2General: {
      require_general(p);
      g.assign(n, 0.5 + 0.5 / (n - 2));
      g.front() = g.back() = 0.5;
      out.scenario = linear_scenario(g, 1.0, p.beta);
      out.predicted_efficiency = 0.25;
      break;
    }
    case FamilyId::Game2Subcase: {
      // Unit sigma; the equilibrium sits where the weaker coder just stops
      // sending and the routing load equals q.
      require_general(p);
      const double b = p.beta;
      const double den = 2.0 * b * b + 4.0 * b + 3.0;
      const double q = (1.0 + 2.0 * b) / den;
      const double g1 = (2.0 - b * q) / (2.0 + b);
      const double x1 = (g1 - q) / 2.0;
      g.assign(n, q + x1 + q / (n - 2));
      g.front() = g1;
      g.back() = 1.0 - g1;
      out.scenario = linear_scenario(g, 1.0, b);
      out.predicted_efficiency = 2.0 / den;
      break;
    }
    case FamilyId::Game3General: {
      require_general(p);
      g.assign(n, 1.0 + 0.5 / (n - 2));
      g.front() = g.back() = 1.25;
      out.game = Game::CostlySide;
      out.scenario = linear_scenario(g, 1.0, p.beta);
      out.scenario.side = SideLinks{p.eps, p.eps};
      out.predicted_efficiency = 0.2;
      break;
    }
  }
  require_valid(out.scenario);
  out.sigma = linear_sigma(out.scenario);
  return out;
}

ScanResult poa_scan(Game game, double beta, const ScanGrid& grid) {
  if (grid.ratios.empty() || grid.n_users.empty())
    throw std::invalid_argument("poa_scan: empty grid");
  const bool needs_routing =
      std::any_of(grid.n_users.begin(), grid.n_users.end(), [](int n) { return n > 2; });
  if (needs_routing && grid.routing_levels.empty())
    throw std::invalid_argument("poa_scan: routing_levels empty while n_users > 2");
  if (game == Game::CostlySide && grid.side_slopes.empty())
    throw std::invalid_argument("poa_scan: side_slopes empty for Game 3");

  std::vector<ScanRow> rows;
  const std::vector<double> no_side{0.0};
  const auto& sides = game == Game::CostlySide ? grid.side_slopes : no_side;
  for (int n : grid.n_users) {
    if (n < 2) throw std::invalid_argument("poa_scan: n_users must be >= 2");
    const std::vector<double> levels = n > 2 ? grid.routing_levels : std::vector<double>{0.0};
    for (double level : levels)
      for (double side : sides)
        for (double ratio : grid.ratios) {
          ScanRow row;
          row.ratio = ratio;
          row.routing_level = level;
          row.n_users = n;
          row.side = side;
          std::vector<double> g(n, level * (1.0 + ratio));
          g.front() = ratio;
          g.back() = 1.0;
          row.report.scenario = linear_scenario(g, grid.a, beta);
          if (game == Game::CostlySide) row.report.scenario.side = SideLinks{side, side};
          rows.push_back(std::move(row));
        }
  }

  parallel_for(rows.size(), [&](std::size_t i) {
    rows[i].report = efficiency(rows[i].report.scenario, game);
  });

  ScanResult out;
  out.rows = std::move(rows);
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    if (out.rows[i].report.efficiency_min < out.rows[out.argmin].report.efficiency_min) out.argmin = i;
  return out;
}

std::vector<MonteCarloRow> monte_carlo(Game game, double beta, std::size_t count, std::uint64_t seed,
                                       const MonteCarloRanges& r) {
  if (count < 1) throw std::invalid_argument("monte_carlo: count must be >= 1");
  if (r.n_users < 2) throw std::invalid_argument("monte_carlo: n_users must be >= 2");

  std::mt19937_64 rng(seed);
  auto open = [&rng](double lo, double hi) {
    if (!(hi > lo)) return lo;
    std::uniform_real_distribution<double> dist(lo, hi);
    double v = dist(rng);
    while (v <= lo) v = dist(rng);
    return v;
  };

  std::vector<MonteCarloRow> rows(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto& s = rows[i].scenario;
    rows[i].index = i;
    s.a = open(r.a_lo, r.a_hi);
    s.beta = beta;
    for (int n = 0; n < r.n_users; ++n) {
      const double alpha = open(r.alpha_lo, r.alpha_hi);
      s.utilities.push_back(UtilityFunction::alpha_fair(alpha, open(r.scale_lo, r.scale_hi)));
    }
    if (game == Game::CostlySide) {
      const double a1 = open(r.side_lo, r.side_hi);
      s.side = SideLinks{a1, open(r.side_lo, r.side_hi)};
    }
  }

  parallel_for(count, [&](std::size_t i) {
    try {
      rows[i].report = efficiency(rows[i].scenario, game);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  return rows;
}

std::vector<SweepRow> sweep_side_cost(const std::vector<double>& slopes, const SideSweepParams& base) {
  if (base.n_users < 2) throw std::invalid_argument("sweep_side_cost: n_users must be >= 2");
  std::vector<double> g(base.n_users, base.routing_slope);
  g.front() = g.back() = base.coder_slope;
  std::vector<SweepRow> rows(slopes.size());
  parallel_for(slopes.size(), [&](std::size_t i) {
    Scenario s = linear_scenario(g, base.a, 1.0);
    s.side = SideLinks{slopes[i], slopes[i]};
    rows[i].side = slopes[i];
    rows[i].report = efficiency(s, Game::CostlySide);
  });
  return rows;
}

}  // namespace ncpoa
