#pragma once

// Closed-form evolutions in rescaled units (hbar = 1, kinetic -(1/pi^2) d^2).

#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

/// Free Gaussian with initial |psi|^2 variance sigma^2 and mean wavenumber kappa0
/// (rad per d_L), evaluated at time t.
inline std::complex<double> free_gaussian(double x, double t, double sigma, double kappa0) {
  const double pi = std::numbers::pi;
  const double D = 1.0 / (pi * pi);
  const std::complex<double> I(0.0, 1.0);
  const std::complex<double> s = 1.0 + I * D * t / (sigma * sigma);
  const double xc = 2.0 * D * kappa0 * t;  // group velocity 2 D kappa0
  const std::complex<double> phase =
      std::exp(I * kappa0 * (x - xc) + I * D * kappa0 * kappa0 * t);
  return std::pow(2.0 * pi * sigma * sigma, -0.25) / std::sqrt(s) *
         std::exp(-(x - xc) * (x - xc) / (4.0 * sigma * sigma * s)) * phase;
}

/// Harmonic trap (pi^2/4) w^2 x^2 with mass pi^2/2: ground-state length^2
/// 2/(pi^2 w) and energy w/2.
inline double oscillator_length_sq(double w) {
  const double pi = std::numbers::pi;
  return 2.0 / (pi * pi * w);
}

}  // namespace oracle
