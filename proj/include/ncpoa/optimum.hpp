#pragma once

#include "ncpoa/model.hpp"

#include <string>

namespace ncpoa {

enum class OptimumMethod { ClosedFormLinear, FixedPoint, CoordinateAscent };

std::string to_string(OptimumMethod m);

struct OptimumResult {
  Profile profile;
  double surplus = 0.0;
  OptimumMethod method = OptimumMethod::FixedPoint;
  double kkt_residual = 0.0;
  bool converged = true;
  int sweeps = 0;

  const RateVector& rates() const { return std::get<RateVector>(profile); }
  const FlowAllocation& flows() const { return std::get<FlowAllocation>(profile); }
};

/// Max of sum U_n(x_n) - (a/2)(sum x_n)^2.
OptimumResult solve_p1(const Scenario& s);

/// Problem 2 with the coding pair held at equal rates; closed form when every
/// utility is linear.
OptimumResult solve_p2(const Scenario& s);

/// Exact three-regime optimum of Problem 3 for linear utilities.
OptimumResult solve_p3_linear(const Scenario& s);

struct AscentOptions {
  int max_sweeps = 10000;
  /// Stop once the KKT residual is at most this.
  double tol = 1e-10;
};

/// Problem 3 by coordinate ascent over (y_1..y_N, w) with z = v = w, plus
/// load-preserving exchange directions between w and each y_n. Every
/// direction gets an exact concave line search.
OptimumResult solve_p3(const Scenario& s, const AscentOptions& opts = {});

/// Problem matching the game index: 1, 2 or 3.
OptimumResult solve_optimum(Game problem, const Scenario& s);

/// Largest violation of the clipped stationarity conditions.
double kkt_residual_p1(const Scenario& s, const RateVector& x);
double kkt_residual_p2(const Scenario& s, const RateVector& x);
double kkt_residual_p3(const Scenario& s, const FlowAllocation& f);

}  // namespace ncpoa
