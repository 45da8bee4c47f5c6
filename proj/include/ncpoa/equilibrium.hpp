#pragma once

#include "ncpoa/model.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace ncpoa {

/// Which coordinate moves along an equilibrium segment.
///  EqualRates: x_1 = x_N = t, routing re-solved for each t.
///  PeerRate:   the larger coder is fixed, the smaller one takes t in [0, that rate];
///              routing is constant along the segment.
enum class SegmentAxis { EqualRates, PeerRate };

struct NashSegment {
  SegmentAxis axis = SegmentAxis::EqualRates;
  double lo = 0.0;
  double hi = 0.0;
  std::function<RateVector(double)> sampler;

  RateVector at(double t) const { return sampler(t); }
  /// lo, `interior` evenly spaced points, hi.
  std::vector<RateVector> samples(int interior) const;
};

enum class NashRegime {
  Unique,           // Games 1 and 3
  EqualRates,       // coders share a rate, possibly a continuum of them
  UnequalRates,     // both coders send, the stronger one more
  SingleCoder,      // the weaker coder sends nothing
  Iterative,        // produced by best-response iteration
};

std::string to_string(NashRegime r);
std::string to_string(SegmentAxis a);

struct NashOutcome {
  std::variant<Profile, NashSegment> value;
  NashRegime regime = NashRegime::Unique;
  /// Set when the regime tests were decided within tolerance of a boundary.
  bool boundary = false;
  /// False only for an iterative outcome that hit max_iter; the profile is
  /// then the last iterate.
  bool converged = true;
  int iterations = 0;

  bool is_segment() const { return std::holds_alternative<NashSegment>(value); }
  const Profile& point() const { return std::get<Profile>(value); }
  const NashSegment& segment() const { return std::get<NashSegment>(value); }
  /// The point itself, or segment samples (endpoints plus `interior`).
  std::vector<Profile> profiles(int interior = 9) const;
};

/// Game 1: argmax of U_n(x) - x*a(others + x).
double br_game1(const Scenario& s, int n, const RateVector& x);
/// Game 2 routing user (1 <= n <= N-2).
double br_routing(const Scenario& s, int n, const RateVector& x);
/// Game 2 coding user (n = 0 or N-1). The better of the piece above the
/// peer's rate and the piece below it; equal payoffs pick the upper piece.
/// A flat linear payoff on the lower piece resolves to the peer's rate.
double br_nc(const Scenario& s, int n, const RateVector& x);

/// Unique Game 1 equilibrium. `load_hint` seeds the bracket on total load.
NashOutcome nash_game1(const Scenario& s, double load_hint = 1.0);

/// Game 2 equilibrium set for linear utilities, in the caller's user order.
NashOutcome nash_game2_linear(const Scenario& s);

struct IterOptions {
  double damping = 0.5;
  int max_iter = 20000;
  /// Proximal weight, in units of a. Zero gives plain best responses.
  double proximal = 1.0;
  double tol = 1e-9;
};

struct IterationReport {
  RateVector x;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // sup-norm of the last step
};

/// Synchronous damped best-response iteration from x = 0. Each user plays
/// argmax Q_n(x) - (rho/2)(x - x_old)^2 with rho = proximal * a, whose fixed
/// points are exactly the equilibria.
IterationReport nash_game2_iter(const Scenario& s, const IterOptions& opts = {});

/// Game 3: no coding, no remedies, routing as in Game 1.
NashOutcome nash_game3(const Scenario& s);

/// Game 2 equilibrium: closed form for linear utilities, iteration otherwise.
/// A stalled iteration is retried with smaller damping before giving up.
NashOutcome nash_game2(const Scenario& s, const IterOptions& opts = {});
NashOutcome solve_nash(Game game, const Scenario& s);

struct VerifyReport {
  bool pass = true;
  double worst_gain = 0.0;
  int worst_user = -1;
};

/// Largest payoff gain any single user can obtain by deviating.
VerifyReport verify_nash(const Scenario& s, Game game, const Profile& profile, double tol = 1e-6);

}  // namespace ncpoa
