#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ncpoa::detail {

/// Set-valued response of one load component at a given link load. Linear
/// utilities at their threshold price respond with the whole interval
/// [0, inf); everything else is single-valued (lo == hi).
struct Share {
  double lo;
  double hi;
};

struct LoadFixedPoint {
  double load = 0.0;
  std::vector<double> shares;
  bool exact = false;  // landed on a breakpoint
};

/// Finds q with q in sum_i response_i(q), where every response is
/// non-increasing in q. Breakpoints are loads at which some response is
/// set-valued; they are tried exactly before bisecting the continuous part.
/// Slack at a breakpoint is split equally among the set-valued components.
template <class Response>
LoadFixedPoint solve_load_fixed_point(int count, Response&& response, std::vector<double> breakpoints) {
  std::vector<Share> buf(count);
  auto evaluate = [&](double q, double& lo, double& hi) {
    lo = 0.0;
    hi = 0.0;
    for (int i = 0; i < count; ++i) {
      buf[i] = response(i, q);
      lo += buf[i].lo;
      hi += buf[i].hi;
    }
  };
  auto finish = [&](double q, bool exact) {
    LoadFixedPoint out;
    out.load = q;
    out.exact = exact;
    out.shares.resize(count);
    double lo_sum = 0.0;
    int tied = 0;
    for (int i = 0; i < count; ++i) {
      out.shares[i] = buf[i].lo;
      lo_sum += buf[i].lo;
      if (buf[i].hi > buf[i].lo) ++tied;
    }
    const double slack = q - lo_sum;
    if (tied > 0 && slack > 0.0) {
      for (int i = 0; i < count; ++i)
        if (buf[i].hi > buf[i].lo) out.shares[i] = std::min(buf[i].hi, buf[i].lo + slack / tied);
    }
    return out;
  };

  double lo_sum = 0.0;
  double hi_sum = 0.0;
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double b : breakpoints) {
    if (!(b >= 0.0) || !std::isfinite(b)) continue;
    evaluate(b, lo_sum, hi_sum);
    if (lo_sum <= b && b <= hi_sum) return finish(b, true);
  }

  evaluate(0.0, lo_sum, hi_sum);
  if (hi_sum <= 0.0) return finish(0.0, true);

  double lo = 0.0;
  double hi = 1.0;
  for (evaluate(hi, lo_sum, hi_sum); lo_sum > hi && hi < 1e12; evaluate(hi, lo_sum, hi_sum)) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    evaluate(mid, lo_sum, hi_sum);
    if (lo_sum > mid) {
      lo = mid;
    } else if (hi_sum < mid) {
      hi = mid;
    } else {
      return finish(mid, false);
    }
  }
  const double q = 0.5 * (lo + hi);
  evaluate(q, lo_sum, hi_sum);
  return finish(q, false);
}

}  // namespace ncpoa::detail
