#pragma once

#include <cmath>
#include <stdexcept>

namespace codedge {

// Lower branch W_{-1} of the Lambert W function on (-1/e, 0): the solution
// w <= -1 of w * e^w = x.
//
// In log form the equation reads h(w) = w + ln(-w) = ln(-x), and h is
// strictly increasing on (-inf, -1], so a doubling bracket plus bisection is
// unconditionally safe even where e^w underflows. Two Halley steps on
// f(w) = w e^w - x then polish the root; near the branch point (w ~ -1,
// f' ~ 0) the polish is skipped and the bisection result stands.
inline double lambert_w_minus1(double x) {
  static const double kInvE = std::exp(-1.0);
  if (!(x > -kInvE) || !(x < 0.0)) {
    if (x == -kInvE) return -1.0;  // branch point
    throw std::domain_error("lambert_w_minus1: x must lie in (-1/e, 0)");
  }

  const double target = std::log(-x);
  auto h = [](double w) { return w + std::log(-w); };

  double hi = -1.0;  // h(-1) = -1 >= target for all x in (-1/e, 0)
  double lo = -2.0;
  while (h(lo) > target) lo *= 2.0;

  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (h(mid) > target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  double w = 0.5 * (lo + hi);

  if (1.0 + w < -1e-6) {
    for (int i = 0; i < 2; ++i) {
      const double ew = std::exp(w);
      const double f = w * ew - x;
      const double fp = ew * (1.0 + w);
      const double fpp = ew * (2.0 + w);
      const double denom = 2.0 * fp * fp - f * fpp;
      if (denom == 0.0) break;
      const double next = w - 2.0 * f * fp / denom;
      if (!(next < -1.0)) break;
      w = next;
    }
  }
  return w;
}

}  // namespace codedge
