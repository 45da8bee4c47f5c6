#pragma once

// Independent reference computations for the tests: brute-force grids and
// scenario builders. Nothing here calls the solvers under test.

#include "ncpoa/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using ncpoa::Scenario;
using ncpoa::UtilityFunction;

inline Scenario linear(const std::vector<double>& gammas, double a = 1.0, double beta = 1.0) {
  Scenario s;
  for (double g : gammas) s.utilities.push_back(UtilityFunction::linear(g));
  s.a = a;
  s.beta = beta;
  return s;
}

inline Scenario with_side(Scenario s, double a1, double aN) {
  s.side = ncpoa::SideLinks{a1, aN};
  return s;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Largest x with f(x) >= a * x for a non-increasing marginal f.
template <class F>
double crossing(F&& f, double a) {
  double lo = 0.0;
  double hi = 1.0;
  while (f(hi) > a * hi) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > a * mid ? lo : hi) = mid;
  }
  return hi;
}

// No optimal routed rate of user n exceeds this: U'(x_n) >= a*load >= a*x_n.
inline double user_bound(const Scenario& s, int n) {
  const auto& u = s.utilities[n];
  return crossing([&](double x) { return x > 0 ? u.marginal(x) : 1e300; }, s.a);
}

// Same for the common rate of the coding pair.
inline double pair_bound(const Scenario& s) {
  const auto& u0 = s.utilities.front();
  const auto& uN = s.utilities.back();
  return crossing([&](double x) { return x > 0 ? u0.marginal(x) + uN.marginal(x) : 1e300; }, s.a);
}

struct Axis {
  double step;
  int points;
  std::vector<double> value;  // utility at i * step
};

inline Axis axis(const UtilityFunction& u, double step, double range, int extra = 0) {
  Axis ax{step, static_cast<int>(std::floor(range / step)) + 1, {}};
  for (int i = 0; i < ax.points + extra; ++i) ax.value.push_back(u.value(i * step));
  return ax;
}

// Exhaustive grid maximum of the Problem 1 objective, N <= 3.
inline double grid_p1(const Scenario& s, double step) {
  const int n = s.n_users();
  std::vector<Axis> ax;
  for (int i = 0; i < 3; ++i) {
    if (i < n) ax.push_back(axis(s.utilities[i], step, 3.0 * user_bound(s, i)));
    else ax.push_back({step, 1, {0.0}});
  }
  double best = -1e300;
  for (int i = 0; i < ax[0].points; ++i)
    for (int j = 0; j < ax[1].points; ++j)
      for (int k = 0; k < ax[2].points; ++k) {
        const double q = (i + j + k) * step;
        best = std::max(best, ax[0].value[i] + ax[1].value[j] + ax[2].value[k] - 0.5 * s.a * q * q);
      }
  return best;
}

// Problem 2 objective, coders on independent axes (no equal-rate assumption).
inline double grid_p2(const Scenario& s, double step) {
  const int n = s.n_users();
  const double reach = 3.0 * std::max(pair_bound(s), std::max(user_bound(s, 0), user_bound(s, n - 1)));
  const Axis c1 = axis(s.utilities.front(), step, reach);
  const Axis cN = axis(s.utilities.back(), step, reach);
  const Axis r = n == 3 ? axis(s.utilities[1], step, 3.0 * user_bound(s, 1)) : Axis{step, 1, {0.0}};
  double best = -1e300;
  for (int i = 0; i < c1.points; ++i)
    for (int k = 0; k < cN.points; ++k)
      for (int j = 0; j < r.points; ++j) {
        const double q = (j + std::max(i, k)) * step;
        best = std::max(best, c1.value[i] + cN.value[k] + r.value[j] - 0.5 * s.a * q * q);
      }
  return best;
}

// Problem 3 objective with z1 = zN = v1 = vN = w.
inline double grid_p3(const Scenario& s, double step) {
  const int n = s.n_users();
  const double side = s.side->a1 + s.side->aN;
  const Axis w_axis = axis(UtilityFunction::linear(1.0), step, 3.0 * pair_bound(s));
  const int wn = w_axis.points;
  const Axis y1 = axis(s.utilities.front(), step, 3.0 * user_bound(s, 0), wn);
  const Axis yN = axis(s.utilities.back(), step, 3.0 * user_bound(s, n - 1), wn);
  const Axis r = n == 3 ? axis(s.utilities[1], step, 3.0 * user_bound(s, 1)) : Axis{step, 1, {0.0}};
  double best = -1e300;
  for (int w = 0; w < wn; ++w) {
    const double side_cost = 0.5 * side * (w * step) * (w * step);
    for (int i = 0; i < y1.points; ++i)
      for (int k = 0; k < yN.points; ++k) {
        const double coders = y1.value[i + w] + yN.value[k + w] - side_cost;
        for (int j = 0; j < r.points; ++j) {
          const double q = (i + j + k + w) * step;
          best = std::max(best, coders + r.value[j] - 0.5 * s.a * q * q);
        }
      }
  }
  return best;
}

// Small random scenario for the grid oracles: a in [4, 8], slopes below 1,
// so every bound above stays under about 0.7.
inline Scenario small_random(std::mt19937_64& rng, int n_users) {
  Scenario s;
  s.a = uniform(rng, 4.0, 8.0);
  for (int n = 0; n < n_users; ++n) {
    if (uniform(rng, 0.0, 1.0) < 0.5) s.utilities.push_back(UtilityFunction::linear(uniform(rng, 0.1, 1.0)));
    else s.utilities.push_back(UtilityFunction::alpha_fair(uniform(rng, 0.2, 0.8), uniform(rng, 0.2, 1.0)));
  }
  return s;
}

}  // namespace oracle
