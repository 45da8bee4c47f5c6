#pragma once

#include <cmath>

namespace ncpoa {

namespace search {

inline constexpr double kBisectTol = 1e-12;
inline constexpr double kRateCap = 1e9;

/// Root of a non-increasing function on [lo, hi]. Returns lo when f(lo) <= 0
/// and hi when f(hi) >= 0.
template <class F>
double bisect_decreasing(F&& f, double lo, double hi, double tol = kBisectTol) {
  if (!(f(lo) > 0.0)) return lo;
  if (!(f(hi) < 0.0)) return hi;
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Maximizer on [lo, hi] of a concave function given its (non-increasing)
/// derivative. A derivative that is zero at hi resolves to hi.
template <class D>
double maximize_concave(D&& deriv, double lo, double hi, double tol = kBisectTol) {
  if (hi <= lo) return lo;
  if (deriv(hi) >= 0.0) return hi;
  if (deriv(lo) <= 0.0) return lo;
  return bisect_decreasing(deriv, lo, hi, tol);
}

/// Golden-section search for the maximizer of a unimodal function.
template <class F>
double golden_section_max(F&& f, double lo, double hi, double tol = 1e-11) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 300 && hi - lo > tol * (1.0 + std::fabs(lo) + std::fabs(hi)); ++it) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace search
}  // namespace ncpoa
