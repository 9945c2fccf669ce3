#pragma once

// Lowest Bloch energy of -(1/pi^2) d^2/dx^2 + V0 sin^2(pi x) from the Mathieu
// recurrence, solved by continued fractions and bisection (no matrix algebra).
//
// With z = pi x the equation is y'' + (a - 2 q cos 2z) y = 0, a = E - V0/2,
// q = -V0/4. For y = exp(i k z) sum_m c_m exp(2 i m z):
//   ((k + 2m)^2 - a) c_m + q (c_{m-1} + c_{m+1}) = 0.

#include <cmath>
#include <stdexcept>

namespace oracle {

inline double mathieu_residual(double a, double k, double q, int depth = 200) {
  double up = 0.0;  // q c_{m+1} / c_m, built from m = depth downwards
  for (int m = depth; m >= 1; --m) {
    const double d = (k + 2.0 * m) * (k + 2.0 * m) - a - up;
    up = q * q / d;
  }
  double dn = 0.0;
  for (int m = -depth; m <= -1; ++m) {
    const double d = (k + 2.0 * m) * (k + 2.0 * m) - a - dn;
    dn = q * q / d;
  }
  return k * k - a - up - dn;
}

/// Lowest-band energy at quasimomentum k (k_R units). Scanning upwards from
/// below the spectrum, the first change of sign from + to - is the lowest
/// root: the residual only jumps from - to + across poles.
inline double lowest_band_energy(double V0, double k) {
  const double q = -V0 / 4.0;
  double lo = -2.0 * std::abs(q) - 1.0;
  if (!(mathieu_residual(lo, k, q) > 0.0)) throw std::runtime_error("mathieu oracle: bad lower bound");
  const double step = 1e-3;
  double hi = lo + step;
  while (mathieu_residual(hi, k, q) > 0.0) {
    lo = hi;
    hi += step;
    if (hi > k * k + 4.0 * std::abs(q) + 4.0) throw std::runtime_error("mathieu oracle: no root");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mathieu_residual(mid, k, q) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi) + V0 / 2.0;
}

}  // namespace oracle
