#pragma once

// Magnetic-noise estimators for the walk: step-size jitter, shift-phase
// dephasing and coin process fidelity, plus a Monte-Carlo noisy walk.

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "bzwalk/idealwalk.hpp"
#include "bzwalk/units.hpp"

namespace bzwalk {

/// One-sided spectral density on a strictly increasing angular-frequency grid,
/// interpolated linearly in ln(omega) and zero outside [omega_c, omega.back()].
/// The variance of the underlying quantity is the integral of S from omega_c up.
class NoiseSpectrum {
 public:
  NoiseSpectrum() = default;
  NoiseSpectrum(std::vector<double> omega, std::vector<double> density, double omega_c,
                bool single_tone = false);

  double operator()(double omega) const;
  double variance() const;
  double omega_c() const { return omega_c_; }
  double omega_max() const { return omega_.empty() ? 0.0 : omega_.back(); }
  const std::vector<double>& omega() const { return omega_; }
  const std::vector<double>& density() const { return density_; }
  bool single_tone() const { return single_tone_; }
  bool empty() const { return omega_.empty(); }

  NoiseSpectrum scaled(double factor) const;

  /// Lorentzian S = (2 var / pi) w_c / (w^2 + w_c^2), rescaled so the grid
  /// integral from omega_c equals `variance`.
  static NoiseSpectrum lorentzian(double variance, double corner, double omega_c,
                                  double omega_max, int points_per_decade = 200);
  /// Flat density on [lo, hi] with the given variance.
  static NoiseSpectrum band_limited(double variance, double lo, double hi,
                                    int points_per_decade = 200);
  /// Narrow peak at omega0 (relative width 1e-3), flagged as non-Gaussian.
  static NoiseSpectrum single_tone_peak(double variance, double omega0);
  static NoiseSpectrum zero(double omega_c = 1.0, double omega_max = 1e6);

  /// integral of S(w) k(w) dw over the grid, adaptive in ln(w).
  template <class Kernel>
  double integrate(Kernel&& kernel) const;

 private:
  double integrate_impl(const std::function<double(double)>& kernel) const;

  std::vector<double> omega_, density_;
  double omega_c_ = 0.0;
  bool single_tone_ = false;
};

template <class Kernel>
double NoiseSpectrum::integrate(Kernel&& kernel) const {
  return integrate_impl(std::function<double(double)>(std::forward<Kernel>(kernel)));
}

/// S_{B'x} = S_{B0} + B'^2 S_xi + xi^2 S_{B'} on the union of the grids.
NoiseSpectrum compose_shift_spectrum(const NoiseSpectrum& s_b0, double gradient,
                                     const NoiseSpectrum& s_xi, double xi,
                                     const NoiseSpectrum& s_gradient);

/// f(omega) = tau sinc^2(omega tau / 2) / pi.
double window_function(double omega, double tau);

/// <dk^2> = int pi f(w) S_F(w) tau / hbar^2 dw, divided by k_unit^2. With F
/// in E_R/d_L, tau in hbar/E_R and hbar = 1, k_unit = pi gives k_R units.
double step_size_variance(const NoiseSpectrum& s_force, double tau, double hbar = 1.0,
                          double k_unit = 1.0);

/// Width of a site peak, 2 / (beta n) in k_R units.
double site_peak_width(double beta, int n_sites);

/// p = <dk^2> / (4 sigma_k^2), clipped to [0, 1].
double dephasing_per_step(double var_k, double sigma_k);

struct PhaseDephasing {
  double variance = 0.0;       // <dphi^2>, rad^2
  double coherence = 1.0;      // exp(-variance / 2)
  double coherent_steps = std::numeric_limits<double>::infinity();  // 1/sqrt(variance)
};

/// <dphi^2> = int pi f(w) S(w) tau (2 mu_B m_F g_F / hbar)^2 dw for the field
/// spectrum S of B' x_bar (T^2 per rad/s), tau in seconds.
PhaseDephasing shift_phase_variance(const NoiseSpectrum& s_field, double tau,
                                    const PhysicalConstants& constants);

/// g(r) = (1 + r^2 - 2 r sin(pi r / 2)) / (1 - r^2)^2, series near r = 1.
double coin_noise_kernel(double r);

struct CoinFidelity {
  double process_sq = 1.0;  // F_pro^2
  double average_sq = 1.0;  // (1 + 2 F_pro^2) / 3
  double error = 0.0;       // 1 - F_pro^2
};

/// F_pro^2 = 1 - 2 (mu_B m_F g_F / (hbar Omega))^2 int S_B(w) g(w / Omega) dw.
CoinFidelity coin_process_fidelity(const NoiseSpectrum& s_field, double omega_rabi,
                                   const PhysicalConstants& constants);

struct DephasingReport {
  double p = 0.0;
  double var_k = 0.0;
  double var_phi = 0.0;
  double coherence = 1.0;
  double coherent_steps = std::numeric_limits<double>::infinity();
  double coin_error = 0.0;
  bool gaussian_phase_assumption_questionable = false;
};

struct MonteCarloNoise {
  double phase_variance = 0.0;  // per-step variance of the relative up/down phase
  double step_variance = 0.0;   // per-step variance of the step size, k_R^2
  double sigma_k = 0.0;         // peak width for the step-size model, k_R (0: no envelope)
};

struct MonteCarloOptions {
  long realizations = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
  int batches = 20;
  bool track_coherence = true;  // O(n^2) per step and realization
};

struct MonteCarloResult {
  std::vector<double> distribution;      // ensemble-averaged, final step
  std::vector<double> coherence;         // per step j = 0..steps, normalized to j = 0
  std::vector<double> coherence_error;   // standard error from batch spread
  std::vector<double> site_variance;     // per step, variance of (site - origin)
};

/// Ensemble of walks with per-step Gaussian phase kicks exp(i dphi) on spin up
/// and step-size errors. A step error dk acts on a realization with envelope
/// coordinate x0 ~ N(0, (1/(2 pi sigma_k))^2) as exp(i pi dk x0 sigma_z).
/// Site variance is measured on the unwrapped line, so the ring must be large
/// enough that the walker does not wrap.
MonteCarloResult monte_carlo_noisy_walk(const WalkState& initial, const WalkOperatorSpec& spec,
                                        int steps, const MonteCarloNoise& noise,
                                        const MonteCarloOptions& options = {});

}  // namespace bzwalk
