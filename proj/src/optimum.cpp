#include "ncpoa/optimum.hpp"

#include "ncpoa/detail/load_fixed_point.hpp"
#include "ncpoa/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ncpoa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using detail::Share;

// Stationarity gap for a variable held at `value`: the gradient itself when
// the variable is interior, only its positive part when clipped at zero.
double clipped_gap(double value, double grad) {
  if (value > 0.0) return std::fabs(grad);
  return std::max(0.0, grad);
}

double marginal_at(const UtilityFunction& u, double x) { return u.marginal(std::max(0.0, x)); }

// Price-taking response of a single utility to bottleneck price a*q.
// Linear responses compare q against gamma/a, the same expression the
// breakpoints use, so a breakpoint always lands exactly on the tie.
Share price_taking_share(const UtilityFunction& u, double a, double q) {
  if (q <= 0.0) return {kInf, kInf};
  if (u.is_linear()) {
    const double threshold = u.gamma() / a;
    if (q < threshold) return {kInf, kInf};
    if (q > threshold) return {0.0, 0.0};
    return {0.0, kInf};
  }
  const auto inv = u.inverse_marginal(a * q);
  switch (inv.kind) {
    case MarginalInverse::Kind::Finite: return {inv.rate, inv.rate};
    case MarginalInverse::Kind::Unbounded: return {kInf, kInf};
    case MarginalInverse::Kind::Indeterminate: return {0.0, kInf};
  }
  return {0.0, 0.0};
}

// Common rate t of the coding pair with U_0'(t) + U_N'(t) = price.
Share pair_share(const UtilityFunction& u0, const UtilityFunction& uN, double a, double q) {
  if (q <= 0.0) return {kInf, kInf};
  if (u0.is_linear() && uN.is_linear()) {
    const double threshold = (u0.gamma() + uN.gamma()) / a;
    if (q < threshold) return {kInf, kInf};
    if (q > threshold) return {0.0, 0.0};
    return {0.0, kInf};
  }
  const double price = a * q;
  double floor = 0.0;  // limit of the pair marginal as t -> inf
  if (u0.is_linear()) floor += u0.gamma();
  if (uN.is_linear()) floor += uN.gamma();
  if (floor >= price) return {kInf, kInf};
  auto excess = [&](double t) { return u0.marginal(t) + uN.marginal(t) - price; };
  double hi = 1.0;
  while (excess(hi) > 0.0 && hi < 1e15) hi *= 2.0;
  const double t = search::bisect_decreasing(excess, 0.0, hi, 0.0);
  return {t, t};
}

struct Argmax {
  double value = -kInf;
  std::vector<int> members;
};

}  // namespace

std::string to_string(OptimumMethod m) {
  switch (m) {
    case OptimumMethod::ClosedFormLinear: return "closed-form-linear";
    case OptimumMethod::FixedPoint: return "fixed-point";
    case OptimumMethod::CoordinateAscent: return "coordinate-ascent";
  }
  return "?";
}

double kkt_residual_p1(const Scenario& s, const RateVector& x) {
  const double price = s.a * x.sum();
  double worst = 0.0;
  for (int n = 0; n < s.n_users(); ++n)
    worst = std::max(worst, clipped_gap(x(n), s.utilities[n].marginal(x(n)) - price));
  return worst;
}

double kkt_residual_p2(const Scenario& s, const RateVector& x) {
  const int last = s.last();
  const double price = s.a * coded_load(s, x);
  double worst = 0.0;
  for (int n = 1; n < last; ++n)
    worst = std::max(worst, clipped_gap(x(n), s.utilities[n].marginal(x(n)) - price));
  const double t = std::max(x(0), x(last));
  const double pair = s.utilities[0].marginal(t) + s.utilities[last].marginal(t) - price;
  return std::max({worst, clipped_gap(t, pair), std::fabs(x(0) - x(last))});
}

double kkt_residual_p3(const Scenario& s, const FlowAllocation& f) {
  if (!s.side) throw std::invalid_argument("Problem 3 requires side-link slopes");
  const int last = s.last();
  const double w = f.z1;
  const double side = s.side->a1 + s.side->aN;
  const double price = s.a * (f.y.sum() + w);
  double worst = 0.0;
  for (int n = 1; n < last; ++n)
    worst = std::max(worst, clipped_gap(f.y(n), s.utilities[n].marginal(f.y(n)) - price));
  const double m0 = s.utilities[0].marginal(f.y(0) + w);
  const double mN = s.utilities[last].marginal(f.y(last) + w);
  worst = std::max(worst, clipped_gap(f.y(0), m0 - price));
  worst = std::max(worst, clipped_gap(f.y(last), mN - price));
  return std::max(worst, clipped_gap(w, m0 + mN - side * w - price));
}

OptimumResult solve_p1(const Scenario& s) {
  require_valid(s);
  const int n_users = s.n_users();
  OptimumResult out;
  RateVector x = RateVector::Zero(n_users);

  if (s.all_linear()) {
    Argmax best;
    for (int n = 0; n < n_users; ++n) {
      const double g = s.utilities[n].gamma();
      if (g > best.value) best = {g, {n}};
      else if (g == best.value) best.members.push_back(n);
    }
    const double share = best.value / (s.a * static_cast<double>(best.members.size()));
    for (int n : best.members) x(n) = share;
    out.method = OptimumMethod::ClosedFormLinear;
  } else {
    std::vector<double> breakpoints;
    for (const auto& u : s.utilities)
      if (u.is_linear()) breakpoints.push_back(u.gamma() / s.a);
    const auto fp = detail::solve_load_fixed_point(
        n_users, [&](int n, double q) { return price_taking_share(s.utilities[n], s.a, q); },
        breakpoints);
    for (int n = 0; n < n_users; ++n) x(n) = fp.shares[n];
    out.method = OptimumMethod::FixedPoint;
  }
  out.surplus = surplus(Game::Routing, s, x);
  out.kkt_residual = kkt_residual_p1(s, x);
  out.profile = std::move(x);
  return out;
}

OptimumResult solve_p2(const Scenario& s) {
  require_valid(s);
  if (s.side) throw std::invalid_argument("Problem 2 assumes zero-cost side links; drop a1/aN");
  const int n_users = s.n_users();
  const int last = s.last();
  OptimumResult out;
  RateVector x = RateVector::Zero(n_users);

  if (s.all_linear()) {
    // Candidate "pair" is encoded as index 0; routing users keep their index.
    Argmax best{s.utilities[0].gamma() + s.utilities[last].gamma(), {0}};
    for (int n = 1; n < last; ++n) {
      const double g = s.utilities[n].gamma();
      if (g > best.value) best = {g, {n}};
      else if (g == best.value) best.members.push_back(n);
    }
    const double share = best.value / (s.a * static_cast<double>(best.members.size()));
    for (int n : best.members) {
      if (n == 0) x(0) = x(last) = share;
      else x(n) = share;
    }
    out.method = OptimumMethod::ClosedFormLinear;
  } else {
    // Components 0..N-3 are routing users 1..N-2; the last one is the pair.
    const int routing = n_users - 2;
    std::vector<double> breakpoints;
    for (int n = 1; n < last; ++n)
      if (s.utilities[n].is_linear()) breakpoints.push_back(s.utilities[n].gamma() / s.a);
    if (s.utilities[0].is_linear() && s.utilities[last].is_linear())
      breakpoints.push_back((s.utilities[0].gamma() + s.utilities[last].gamma()) / s.a);
    const auto fp = detail::solve_load_fixed_point(
        routing + 1,
        [&](int i, double q) {
          if (i < routing) return price_taking_share(s.utilities[i + 1], s.a, q);
          return pair_share(s.utilities[0], s.utilities[last], s.a, q);
        },
        breakpoints);
    for (int i = 0; i < routing; ++i) x(i + 1) = fp.shares[i];
    x(0) = x(last) = fp.shares[routing];
    out.method = OptimumMethod::FixedPoint;
  }
  out.surplus = surplus(Game::Coding, s, x);
  out.kkt_residual = kkt_residual_p2(s, x);
  out.profile = std::move(x);
  return out;
}

OptimumResult solve_p3_linear(const Scenario& s) {
  require_valid(s);
  if (!s.side) throw std::invalid_argument("Problem 3 requires side-link slopes a1, aN");
  if (!s.all_linear()) throw std::invalid_argument("solve_p3_linear requires linear utilities");
  const int n_users = s.n_users();
  const int last = s.last();
  const double a = s.a;
  const double side = s.side->a1 + s.side->aN;
  const double pair = s.utilities[0].gamma() + s.utilities[last].gamma();

  Argmax best;
  for (int n = 0; n < n_users; ++n) {
    const double g = s.utilities[n].gamma();
    if (g > best.value) best = {g, {n}};
    else if (g == best.value) best.members.push_back(n);
  }
  const double gmax = best.value;
  const double m = static_cast<double>(best.members.size());

  auto f = FlowAllocation::zeros(n_users);
  double w = 0.0;
  if (pair >= (1.0 + side / a) * gmax) {
    w = pair / (a + side);
  } else if (pair >= gmax) {
    w = (pair - gmax) / side;
    const double share = ((a + side) * gmax - a * pair) / (a * m * side);
    for (int n : best.members) f.y(n) = share;
  } else {
    for (int n : best.members) f.y(n) = gmax / (a * m);
  }
  f.z1 = f.zN = f.v1 = f.vN = w;

  OptimumResult out;
  out.method = OptimumMethod::ClosedFormLinear;
  out.surplus = surplus(s, f);
  out.kkt_residual = kkt_residual_p3(s, f);
  out.profile = std::move(f);
  return out;
}

OptimumResult solve_p3(const Scenario& s, const AscentOptions& opts) {
  require_valid(s);
  if (!s.side) throw std::invalid_argument("Problem 3 requires side-link slopes a1, aN");
  const int n_users = s.n_users();
  const int last = s.last();
  const double a = s.a;
  const double side = s.side->a1 + s.side->aN;
  const double cap = rate_bound(s);
  const auto& u = s.utilities;

  RateVector y = RateVector::Zero(n_users);
  double w = 0.0;
  double load = 0.0;

  auto decoded = [&](int n) { return y(n) + ((n == 0 || n == last) ? w : 0.0); };
  auto line_max = [](auto&& deriv, double lo, double hi) {
    return search::maximize_concave(deriv, lo, hi, 0.0);
  };

  OptimumResult out;
  out.method = OptimumMethod::CoordinateAscent;
  out.converged = false;

  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    double moved = 0.0;
    for (int n = 0; n < n_users; ++n) {
      const double base = decoded(n);
      const double t = line_max(
          [&](double t) { return marginal_at(u[n], base + t) - a * (load + t); }, -y(n), cap - y(n));
      y(n) += t;
      load += t;
      moved = std::max(moved, std::fabs(t));
    }
    {
      const double b0 = decoded(0);
      const double bN = decoded(last);
      const double t = line_max(
          [&](double t) {
            return marginal_at(u[0], b0 + t) + marginal_at(u[last], bN + t) - side * (w + t) -
                   a * (load + t);
          },
          -w, cap - w);
      w += t;
      load += t;
      moved = std::max(moved, std::fabs(t));
    }
    // Exchange w against each routed flow with the bottleneck load held fixed.
    for (int n = 0; n < n_users; ++n) {
      if (y(n) <= 0.0 && w <= 0.0) continue;
      const double b0 = decoded(0);
      const double bN = decoded(last);
      const double yn = y(n);
      const double t = line_max(
          [&](double t) {
            double g = -side * (w + t);
            if (n != 0) g += marginal_at(u[0], b0 + t);
            if (n != last) g += marginal_at(u[last], bN + t);
            if (n != 0 && n != last) g -= marginal_at(u[n], yn - t);
            return g;
          },
          -w, yn);
      w += t;
      y(n) = std::max(0.0, yn - t);
      moved = std::max(moved, std::fabs(t));
    }
    load = y.sum() + w;
    out.sweeps = sweep;
    auto f = FlowAllocation::zeros(n_users);
    f.y = y;
    f.z1 = f.zN = f.v1 = f.vN = w;
    if (kkt_residual_p3(s, f) <= opts.tol) {
      out.converged = true;
      break;
    }
    if (moved == 0.0) break;  // no coordinate can improve in floating point
  }

  auto f = FlowAllocation::zeros(n_users);
  f.y = y;
  f.z1 = f.zN = f.v1 = f.vN = w;
  out.surplus = surplus(s, f);
  out.kkt_residual = kkt_residual_p3(s, f);
  out.profile = std::move(f);
  return out;
}

OptimumResult solve_optimum(Game problem, const Scenario& s) {
  switch (problem) {
    case Game::Routing: return solve_p1(s);
    case Game::Coding: return solve_p2(s);
    case Game::CostlySide: return s.all_linear() ? solve_p3_linear(s) : solve_p3(s);
  }
  throw std::invalid_argument("unknown problem");
}

}  // namespace ncpoa
