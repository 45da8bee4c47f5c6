#include "ncpoa/equilibrium.hpp"

#include "ncpoa/search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ncpoa {

namespace {

double marginal_at(const UtilityFunction& u, double x) { return u.marginal(std::max(0.0, x)); }

// q >= 0 with q = sum_i max(0, c_i - q). Exact: the active set is a prefix of
// c sorted in decreasing order and q = (sum of that prefix) / (k + 1).
double water_fill(std::vector<double> c) {
  std::sort(c.begin(), c.end(), std::greater<>());
  double prefix = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] <= 0.0) break;
    prefix += c[k];
    const double q = prefix / static_cast<double>(k + 2);
    if (k + 1 == c.size() || c[k + 1] <= q) return q;
  }
  return 0.0;
}

double routing_sum(const Scenario& s, const RateVector& x) {
  return s.n_users() > 2 ? x.segment(1, s.n_users() - 2).sum() : 0.0;
}

// Best responses with an optional proximal pull toward `anchor`.
struct Prox {
  double rho = 0.0;
  double anchor = 0.0;
  double pull(double t) const { return rho * (t - anchor); }
  double penalty(double t) const { return 0.5 * rho * (t - anchor) * (t - anchor); }
};

double best_plain(const UtilityFunction& u, double a, double others, double cap, const Prox& p) {
  return search::maximize_concave(
      [&](double t) { return marginal_at(u, t) - a * others - 2.0 * a * t - p.pull(t); }, 0.0,
      std::max(cap, p.anchor), 0.0);
}

double best_game1(const Scenario& s, int n, const RateVector& x, double cap, const Prox& p) {
  return best_plain(s.utilities[n], s.a, x.sum() - x(n), cap, p);
}

double best_routing(const Scenario& s, int n, const RateVector& x, double cap, const Prox& p) {
  const double others = routing_sum(s, x) - x(n) + std::max(x(0), x(s.last()));
  return best_plain(s.utilities[n], s.a, others, cap, p);
}

double best_coder(const Scenario& s, int n, const RateVector& x, double cap, const Prox& p) {
  const auto& u = s.utilities[n];
  const double a = s.a;
  const double beta = s.beta;
  const double peer = x(n == 0 ? s.last() : 0);
  const double routed = routing_sum(s, x);
  const double hi = std::max({cap, peer, p.anchor});

  const double upper = search::maximize_concave(
      [&](double t) {
        return marginal_at(u, t) - a * (routed + 2.0 * t) + a * (1.0 - beta) * peer - p.pull(t);
      },
      peer, hi, 0.0);
  const double lower = search::maximize_concave(
      [&](double t) { return marginal_at(u, t) - beta * a * (routed + peer) - p.pull(t); }, 0.0,
      peer, 0.0);

  auto value = [&](double t) {
    const double paid = t - (1.0 - beta) * std::min(t, peer);
    return u.value(t) - paid * a * (routed + std::max(t, peer)) - p.penalty(t);
  };
  return value(lower) > value(upper) ? lower : upper;
}

// Largest x with f(x) >= 0 for f strictly decreasing from f(0) > 0.
template <class F>
double decreasing_root(F&& f) {
  double hi = 1.0;
  while (f(hi) > 0.0 && hi < search::kRateCap) hi *= 2.0;
  return search::bisect_decreasing(f, 0.0, hi, 0.0);
}

// Game 1 share of user n at total load Q: U'(x) = aQ + ax, clipped at 0.
double game1_share(const UtilityFunction& u, double a, double load) {
  if (u.is_linear()) return std::max(0.0, u.gamma() / a - load);
  return decreasing_root([&](double x) { return marginal_at(u, x) - a * load - a * x; });
}

RateVector swap_coders(RateVector x) {
  std::swap(x(0), x(x.size() - 1));
  return x;
}

}  // namespace

std::string to_string(NashRegime r) {
  switch (r) {
    case NashRegime::Unique: return "unique";
    case NashRegime::EqualRates: return "equal-rates";
    case NashRegime::UnequalRates: return "unequal-rates";
    case NashRegime::SingleCoder: return "single-coder";
    case NashRegime::Iterative: return "iterative";
  }
  return "?";
}

std::string to_string(SegmentAxis a) {
  return a == SegmentAxis::EqualRates ? "equal-rates" : "peer-rate";
}

std::vector<RateVector> NashSegment::samples(int interior) const {
  std::vector<RateVector> out;
  out.push_back(at(lo));
  for (int i = 1; i <= interior; ++i)
    out.push_back(at(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(interior + 1)));
  if (hi > lo) out.push_back(at(hi));
  return out;
}

std::vector<Profile> NashOutcome::profiles(int interior) const {
  if (!is_segment()) return {point()};
  std::vector<Profile> out;
  for (auto& x : segment().samples(interior)) out.emplace_back(std::move(x));
  return out;
}

double br_game1(const Scenario& s, int n, const RateVector& x) {
  return best_game1(s, n, x, rate_bound(s), {});
}

double br_routing(const Scenario& s, int n, const RateVector& x) {
  if (s.is_coding_user(n)) throw std::invalid_argument("br_routing: user is a coding user");
  return best_routing(s, n, x, rate_bound(s), {});
}

double br_nc(const Scenario& s, int n, const RateVector& x) {
  if (!s.is_coding_user(n)) throw std::invalid_argument("br_nc: user is not a coding user");
  return best_coder(s, n, x, rate_bound(s), {});
}

NashOutcome nash_game1(const Scenario& s, double load_hint) {
  require_valid(s);
  const int n_users = s.n_users();
  const double a = s.a;
  RateVector x(n_users);

  if (s.all_linear()) {
    std::vector<double> c(n_users);
    for (int n = 0; n < n_users; ++n) c[n] = s.utilities[n].gamma() / a;
    const double load = water_fill(c);
    for (int n = 0; n < n_users; ++n) x(n) = std::max(0.0, c[n] - load);
  } else {
    auto excess = [&](double load) {
      double total = 0.0;
      for (const auto& u : s.utilities) total += game1_share(u, a, load);
      return total - load;
    };
    double lo = 0.0;
    double hi = std::max(load_hint, 1e-300);
    while (excess(hi) > 0.0 && hi < search::kRateCap) {
      lo = hi;
      hi *= 2.0;
    }
    const double load = search::bisect_decreasing(excess, lo, hi, 0.0);
    for (int n = 0; n < n_users; ++n) x(n) = game1_share(s.utilities[n], a, load);
  }
  return {Profile{std::move(x)}, NashRegime::Unique, false};
}

NashOutcome nash_game2_linear(const Scenario& s) {
  require_valid(s);
  if (s.side) throw std::invalid_argument("Game 2 assumes zero-cost side links; drop a1/aN");
  if (!s.all_linear()) throw std::invalid_argument("nash_game2_linear requires linear utilities");

  const int n_users = s.n_users();
  const int last = s.last();
  const double a = s.a;
  const double beta = s.beta;
  const bool swapped = s.utilities[last].gamma() > s.utilities[0].gamma();
  const double g1 = std::max(s.utilities[0].gamma(), s.utilities[last].gamma());
  const double gN = std::min(s.utilities[0].gamma(), s.utilities[last].gamma());

  std::vector<double> slopes;
  for (int n = 1; n < last; ++n) slopes.push_back(s.utilities[n].gamma() / a);

  // Routing load when the bottleneck also carries coded rate x.
  auto routing_load = [slopes](double x) {
    std::vector<double> c(slopes);
    for (double& v : c) v -= x;
    return water_fill(std::move(c));
  };
  // Full profile, original user order, coders at (x1, xN) in relabelled order.
  auto assemble = [slopes, n_users, swapped](double x1, double xN, double q, double coded) {
    RateVector x(n_users);
    x(0) = x1;
    x(n_users - 1) = xN;
    for (int n = 1; n + 1 < n_users; ++n) x(n) = std::max(0.0, slopes[n - 1] - q - coded);
    return swapped ? swap_coders(std::move(x)) : x;
  };

  // Lowest equal rate the stronger coder accepts, highest the weaker accepts.
  const double xs_lo = search::bisect_decreasing(
      [&](double x) { return std::max(0.0, (g1 - a * routing_load(x)) / (a * (1.0 + beta))) - x; },
      0.0, g1 / (a * (1.0 + beta)), 0.0);
  const double xs_hi = search::bisect_decreasing(
      [&](double x) { return std::max(0.0, gN / (beta * a) - routing_load(x)) - x; }, 0.0,
      gN / (beta * a), 0.0);
  const double x1_single = search::bisect_decreasing(
      [&](double x) { return std::max(0.0, (g1 - a * routing_load(x)) / (2.0 * a)) - x; }, 0.0,
      g1 / (2.0 * a), 0.0);

  for (double tol : {1e-9, 1e-7}) {
    const double scale = tol * std::max(1.0, g1 / a);
    NashOutcome out;

    if (xs_hi - xs_lo > scale) {
      NashSegment seg;
      seg.axis = SegmentAxis::EqualRates;
      seg.lo = xs_lo;
      seg.hi = xs_hi;
      seg.sampler = [routing_load, assemble](double t) {
        return assemble(t, t, routing_load(t), t);
      };
      out.value = std::move(seg);
      out.regime = NashRegime::EqualRates;
      return out;
    }

    if (std::fabs(xs_hi - xs_lo) <= scale) {
      const double x = 0.5 * (xs_lo + xs_hi);
      const double q = routing_load(x);
      out.regime = NashRegime::EqualRates;
      out.boundary = true;
      if (beta == 1.0 && x > scale) {
        // The weaker coder is indifferent over every rate up to the stronger one's.
        NashSegment seg;
        seg.axis = SegmentAxis::PeerRate;
        seg.lo = 0.0;
        seg.hi = x;
        seg.sampler = [assemble, x, q](double t) { return assemble(x, t, q, x); };
        out.value = std::move(seg);
      } else {
        out.value = Profile{assemble(x, x, q, x)};
      }
      return out;
    }

    if (beta < 1.0 && xs_hi > 0.0) {
      const double x1 = xs_hi;
      const double q = routing_load(x1);
      const double xN = ((2.0 / beta) * gN - g1 - a * q) / (a * (1.0 - beta));
      if (xN >= -scale && xN <= x1 + scale) {
        out.value = Profile{assemble(x1, std::clamp(xN, 0.0, x1), q, x1)};
        out.regime = NashRegime::UnequalRates;
        out.boundary = xN <= scale || xN >= x1 - scale;
        return out;
      }
    }

    {
      const double x1 = x1_single;
      const double q = routing_load(x1);
      const double gap = gN - beta * a * (q + x1);
      if (gap <= scale) {
        out.value = Profile{assemble(x1, 0.0, q, x1)};
        out.regime = NashRegime::SingleCoder;
        out.boundary = gap >= -scale;
        return out;
      }
    }
  }
  throw std::runtime_error("nash_game2_linear: no equilibrium regime matched");
}

IterationReport nash_game2_iter(const Scenario& s, const IterOptions& opts) {
  require_valid(s);
  if (!(opts.damping > 0.0 && opts.damping <= 1.0))
    throw std::invalid_argument("damping must lie in (0,1]");
  const int n_users = s.n_users();
  const double cap = rate_bound(s);
  const double rho = opts.proximal * s.a;

  IterationReport rep;
  rep.x = RateVector::Zero(n_users);
  RateVector br(n_users);
  for (int it = 1; it <= opts.max_iter; ++it) {
    for (int n = 0; n < n_users; ++n) {
      const Prox p{rho, rep.x(n)};
      br(n) = s.is_coding_user(n) ? best_coder(s, n, rep.x, cap, p) : best_routing(s, n, rep.x, cap, p);
    }
    const RateVector next = (1.0 - opts.damping) * rep.x + opts.damping * br;
    rep.residual = (next - rep.x).lpNorm<Eigen::Infinity>();
    rep.x = next;
    rep.iterations = it;
    if (rep.residual < opts.tol) {
      rep.converged = true;
      break;
    }
  }
  return rep;
}

NashOutcome nash_game2(const Scenario& s, const IterOptions& opts) {
  if (s.all_linear()) return nash_game2_linear(s);
  if (s.side) throw std::invalid_argument("Game 2 assumes zero-cost side links; drop a1/aN");
  IterOptions o = opts;
  IterationReport rep;
  int total = 0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    rep = nash_game2_iter(s, o);
    total += rep.iterations;
    if (rep.converged) break;
    o.damping *= 0.4;
    o.max_iter *= 2;
  }
  NashOutcome out{Profile{std::move(rep.x)}, NashRegime::Iterative, false};
  out.converged = rep.converged;
  out.iterations = total;
  return out;
}

NashOutcome nash_game3(const Scenario& s) {
  require_valid(s);
  if (!s.side) throw std::invalid_argument("Game 3 requires side-link slopes a1, aN");
  Scenario plain = s;
  plain.side.reset();
  auto g1 = nash_game1(plain);
  auto f = FlowAllocation::zeros(s.n_users());
  f.y = std::get<RateVector>(g1.point());
  return {Profile{std::move(f)}, NashRegime::Unique, false};
}

NashOutcome solve_nash(Game game, const Scenario& s) {
  switch (game) {
    case Game::Routing: return nash_game1(s);
    case Game::Coding: return nash_game2(s);
    case Game::CostlySide: return nash_game3(s);
  }
  throw std::invalid_argument("unknown game");
}

namespace {

constexpr int kGrid = 17;
constexpr int kRefineRounds = 40;

double best_over_rates(const std::function<double(double)>& f, double cap, double current) {
  const double t = search::golden_section_max(f, 0.0, cap);
  return std::max({f(t), f(0.0), f(cap), f(current)});
}

// Best payoff of a coding user over (y, z, v), starting from a grid and from
// the current strategy, refined coordinate by coordinate.
double best_over_flows(const std::function<double(const std::array<double, 3>&)>& f, double cap,
                       const std::array<double, 3>& current) {
  std::array<double, 3> grid_best{};
  double grid_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i)
    for (int j = 0; j < kGrid; ++j)
      for (int k = 0; k < kGrid; ++k) {
        const double step = cap / (kGrid - 1);
        const std::array<double, 3> p{i * step, j * step, k * step};
        const double v = f(p);
        if (v > grid_value) {
          grid_value = v;
          grid_best = p;
        }
      }
  double best = std::max(grid_value, f(current));
  for (auto start : {grid_best, current}) {
    double value = f(start);
    for (int round = 0; round < kRefineRounds; ++round) {
      const double before = value;
      for (int c = 0; c < 3; ++c) {
        auto along = [&](double t) {
          auto p = start;
          p[c] = t;
          return f(p);
        };
        const double t = search::golden_section_max(along, 0.0, std::max(cap, start[c]));
        if (along(t) > value) {
          start[c] = t;
          value = along(t);
        }
        if (along(0.0) > value) {
          start[c] = 0.0;
          value = along(0.0);
        }
      }
      if (value - before < 1e-14) break;
    }
    best = std::max(best, value);
  }
  return best;
}

}  // namespace

VerifyReport verify_nash(const Scenario& s, Game game, const Profile& profile, double tol) {
  require_valid(s);
  const int n_users = s.n_users();
  const double cap = rate_bound(s);
  VerifyReport rep;
  auto record = [&](int n, double gain) {
    if (gain > rep.worst_gain || rep.worst_user < 0) {
      rep.worst_gain = std::max(0.0, gain);
      rep.worst_user = n;
    }
  };

  if (game != Game::CostlySide) {
    const auto& x = std::get<RateVector>(profile);
    for (int n = 0; n < n_users; ++n) {
      RateVector trial = x;
      auto f = [&](double t) {
        trial(n) = t;
        return payoff(game, s, n, trial);
      };
      const double current = payoff(game, s, n, x);
      record(n, best_over_rates(f, std::max(cap, x(n)), x(n)) - current);
    }
  } else {
    const auto& flows = std::get<FlowAllocation>(profile);
    for (int n = 0; n < n_users; ++n) {
      const double current = payoff(s, n, flows);
      FlowAllocation trial = flows;
      double gain = 0.0;
      if (!s.is_coding_user(n)) {
        auto f = [&](double t) {
          trial.y(n) = t;
          return payoff(s, n, trial);
        };
        gain = best_over_rates(f, std::max(cap, flows.y(n)), flows.y(n)) - current;
      } else {
        const bool first = n == 0;
        auto set = [&](const std::array<double, 3>& p) {
          trial.y(n) = p[0];
          (first ? trial.z1 : trial.zN) = p[1];
          (first ? trial.v1 : trial.vN) = p[2];
        };
        auto f = [&](const std::array<double, 3>& p) {
          set(p);
          return payoff(s, n, trial);
        };
        const std::array<double, 3> now{flows.y(n), first ? flows.z1 : flows.zN,
                                        first ? flows.v1 : flows.vN};
        gain = best_over_flows(f, std::max({cap, now[0], now[1], now[2]}), now) - current;
      }
      record(n, gain);
    }
  }
  rep.pass = rep.worst_gain <= tol;
  return rep;
}

}  // namespace ncpoa
