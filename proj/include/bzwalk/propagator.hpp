#pragma once

// Split-step Fourier propagation of the two-component field in rescaled units:
//
//   i d/dt psi = [ -(1/pi^2) d^2/dx^2 + V(t) sin^2(pi x) - (x - x_bar) F(t) sigma_z
//                  + (pi^2/4) omega(t)^2 x^2 + g(t) (|psi_1|^2 + |psi_2|^2) ] psi
//
// psi_1 is the component pushed towards +k by the force.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bzwalk/fft.hpp"

namespace bzwalk {

/// Uniform periodic grid x_i = (i - n/2) dx, n a power of two.
class Grid {
 public:
  Grid(std::size_t n, double length);

  std::size_t size() const { return n_; }
  double length() const { return length_; }
  double dx() const { return length_ / static_cast<double>(n_); }
  double x(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(n_ / 2)) * dx();
  }
  /// Angular wavenumber (rad per d_L) of DFT bin j; k in units of k_R is kappa/pi.
  double kappa(std::size_t j) const;

  bool operator==(const Grid&) const = default;

 private:
  std::size_t n_;
  double length_;
};

struct SpinorField {
  explicit SpinorField(Grid g)
      : grid(g), psi1(g.size(), cplx{}), psi2(g.size(), cplx{}) {}

  Grid grid;
  std::vector<cplx> psi1;
  std::vector<cplx> psi2;
  double time = 0.0;

  double norm() const;  // sum (|psi1|^2 + |psi2|^2) dx
  void normalize();
  std::vector<double> density() const;
  double peak_density() const;
};

/// Zero-pad the field symmetrically onto a larger grid with the same dx.
SpinorField embed(const SpinorField& field, std::size_t new_size);

enum class RampShape { constant, linear, smoothstep };

struct RampSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  RampShape shape = RampShape::constant;
  double start_value = 0.0;
  double end_value = 0.0;
  bool jump = false;  // allow a discontinuity with the preceding segment
};

/// Piecewise profile. Before the first segment it holds the first start
/// value, between segments and after the last it holds the last end value.
class Ramp {
 public:
  Ramp() = default;
  explicit Ramp(double constant_value);
  explicit Ramp(std::vector<RampSegment> segments);

  double operator()(double t) const;
  const std::vector<RampSegment>& segments() const { return segments_; }
  /// Integral of the profile over [a, b] (exact for all shapes).
  double integral(double a, double b) const;

  /// Append a segment starting where the previous one ended.
  Ramp& then(double duration, RampShape shape, double end_value);
  Ramp& hold(double duration);

 private:
  void validate() const;
  std::vector<RampSegment> segments_;
  double initial_ = 0.0;
};

/// Coin pulse. duration == 0 applies the unitary instantaneously; otherwise a
/// square Rabi pulse of angular frequency alpha / duration is switched on.
struct CoinPulse {
  double time = 0.0;
  double alpha = 0.0;
  double axis_phase = 0.0;
  double duration = 0.0;
};

struct DriveSchedule {
  Ramp lattice{0.0};
  Ramp force{0.0};
  Ramp omega{0.0};  // rescaled trap frequency hbar omega_x / E_R
  Ramp g{0.0};
  double x_bar = 0.0;
  std::vector<CoinPulse> pulses;

  void validate() const;
};

/// U = [[cos a/2, i sin a/2 e^{-i p}], [i sin a/2 e^{i p}, cos a/2]] at every
/// grid point; time does not advance.
void apply_coin(SpinorField& state, double alpha, double rel_phase = 0.0);

struct PropagationOptions {
  /// Observer is called with the state every `observe_every` steps (0: never).
  std::function<void(const SpinorField&)> observer;
  long observe_every = 0;
  long nan_check_every = 100;
  double collapse_factor = 100.0;
};

class SplitStepPropagator {
 public:
  explicit SplitStepPropagator(Grid grid);

  const Grid& grid() const { return grid_; }

  /// Linear Strang evolution of n_steps steps of size dt. The nonlinear term
  /// of the schedule is ignored. Pulses with time in [t, t + n dt) fire.
  void step_real(SpinorField& state, const DriveSchedule& schedule, double dt, long n_steps,
                 const PropagationOptions& options = {}) const;

  /// Same splitting including g(t) rho. The nonlinear phase uses the
  /// time-centred density predicted by the first kinetic half-step.
  void step_gpe(SpinorField& state, const DriveSchedule& schedule, double dt, long n_steps,
                const PropagationOptions& options = {}) const;

  /// Evolve to t_end with steps no larger than dt_max, landing exactly on
  /// every pulse time and on t_end.
  void evolve_to(SpinorField& state, const DriveSchedule& schedule, double t_end, double dt_max,
                 bool nonlinear, const PropagationOptions& options = {}) const;

 private:
  void run_segment(SpinorField& state, const DriveSchedule& schedule, double dt, long n_steps,
                   bool nonlinear, double collapse_limit, const PropagationOptions& options,
                   long& step_counter) const;

  Grid grid_;
  Fft fft_;
  std::vector<double> k2_;       // kinetic energy per DFT bin, (kappa/pi)^2
  std::vector<double> lattice_;  // sin^2(pi x)
};

struct GroundStateOptions {
  double dtau = 0.02;
  double tolerance = 1e-12;  // energy change per step, E_R
  long max_steps = 2'000'000;
  long check_every = 10;
  std::optional<std::vector<cplx>> initial_guess;
};

struct GroundStateResult {
  SpinorField state;
  double energy = 0.0;
  double chemical_potential = 0.0;
  long steps = 0;
};

/// Lowest state of the single-component Hamiltonian (psi_1 only) with the
/// schedule frozen at time t0, by normalized imaginary-time split-step.
GroundStateResult ground_state_imaginary_time(const Grid& grid, const DriveSchedule& schedule,
                                              double t0, const GroundStateOptions& options = {});

/// Mean-field energy functional of a single-component state, and its
/// chemical potential, for the schedule frozen at time t.
std::pair<double, double> energy_functional(const SpinorField& state,
                                            const DriveSchedule& schedule, double t);

/// Warning sink for non-fatal diagnostics; an empty handler restores stderr.
void set_warning_handler(std::function<void(const std::string&)> handler);
void warn(const std::string& message);

}  // namespace bzwalk
