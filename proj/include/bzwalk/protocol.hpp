#pragma once

// End-to-end experimental sequence on the continuum simulator:
//   1 ground state in the shallow trap       5 walk: coin pulses every tau0
//   2 free expansion + harmonic lens          6 force and lattice ramp-down
//   3 lattice and force ramp-up               7 quarter period in the trap
//   4 spin preparation pulse
// The walk references are ideal walks with the same coin and step count.

#include <functional>
#include <string>
#include <vector>

#include "bzwalk/observables.hpp"
#include "bzwalk/propagator.hpp"
#include "bzwalk/units.hpp"

namespace bzwalk {

struct ProtocolConfig {
  LatticeConfig lattice;  // V0, F0, omega_x (rad/s), g1d, tau0 are used
  PhysicalConstants constants;
  int n_sites = 20;
  int steps = 10;
  double alpha = kPi / 2.0;
  double coin_phase = 0.0;
  double prep_alpha = kPi / 2.0;  // spin preparation pulse on (1, 0)
  double prep_phase = -kPi / 2.0;  // (1, 0) -> (1, 1)/sqrt(2)

  std::size_t grid_points = 4096;
  double grid_length = 256.0;
  std::size_t readout_points = 16384;  // grid for the quarter-period map (same dx)

  double dt = 0.004;              // steps while the lattice is on
  double dt_free = 0.1;           // steps with only the trap or nothing
  double expansion_time = -1.0;   // < 0: sqrt(8) / omega
  double kick_time = -1.0;        // < 0: lens condition from the expanded state
  double lattice_ramp_time = -1.0;  // < 0: one Bloch period 2 pi / F0
  double force_delay_fraction = 0.1;
  bool nonlinear = false;
  bool quarter_period_readout = true;
  bool reference_dynamical_phases = false;  // selects which reference tv_reference uses

  long observe_every = 0;         // > 0: record snapshots during the walk stage
  std::function<void(const std::string& stage, const SpinorField&)> frame_sink;
  long frame_every = 0;

  void validate() const;
};

struct StageRecord {
  std::string name;
  double t_end = 0.0;
  double norm = 0.0;
  double x_rms = 0.0;
  double k_rms = 0.0;
};

struct ProtocolResult {
  std::vector<StageRecord> stages;
  RescaledParams params;
  double expansion_time = 0.0;
  double kick_time = 0.0;
  double lattice_ramp_time = 0.0;
  double force_ramp_time = 0.0;
  double force_hold_time = 0.0;

  SiteDistribution before_ramp_down;  // quasimomentum bins at the end of the walk
  SiteDistribution after_ramp_down;   // free momentum folded into the zone
  SiteDistribution mapped;            // position density after the quarter period
  SiteDistribution final_distribution;  // mapped if enabled, else after_ramp_down
  SiteDistribution reference;          // ideal walk, no link phases
  SiteDistribution reference_dynamical;  // ideal walk with the band's Peierls phases
  double tv_plain = 0.0;
  double tv_dynamical = 0.0;
  double tv_reference = 0.0;           // one of the two, per the config
  double tv_readout_chain = 0.0;       // before_ramp_down vs final
  double band0_after_ramp_up = 0.0;
  double spatial_freeze = 0.0;         // over walk-stage snapshots
  std::vector<SpinorField> walk_snapshots;
  SpinorField final_state{Grid(4, 1.0)};
};

ProtocolResult run_protocol(const ProtocolConfig& config);

/// Harmonic-trap phase-space rotation time that removes the position-momentum
/// correlation and minimizes the momentum spread (mass pi^2 / 2).
double lens_kick_duration(const SpinorField& state, double omega);

/// Free expansion for t_expand followed by the harmonic trap for t_kick
/// (t_kick < 0: use lens_kick_duration). Lattice and force off.
SpinorField delta_kick_cool(const SpinorField& state, double omega, double t_expand,
                            double t_kick, double dt = 0.1);

/// Evolve a quarter period (pi/2)/omega in the trap on a grid of `grid_points`
/// (same dx) and return the position density mapped to momentum,
/// k = x pi omega / 2, as samples (k_R, weight).
struct MappedDistribution {
  std::vector<double> k;
  std::vector<double> weight;
  SpinorField state{Grid(4, 1.0)};
};
MappedDistribution quarter_period_map(const SpinorField& state, double omega,
                                      std::size_t grid_points, double dt = 0.1,
                                      double fraction_of_period = 0.25);

/// Interaction comparison: ground state in lattice + trap for each g, then a
/// walk from (1, 1)/sqrt(2) with the trap kept on; returns site
/// distributions and peak widths.
struct NonlinearWalkConfig {
  double V0 = 10.0;
  double F0 = 0.2;
  double omega = 0.0;  // rescaled trap frequency
  int n_sites = 20;
  int steps = 10;
  double alpha = kPi / 2.0;
  std::size_t grid_points = 2048;
  double grid_length = 256.0;
  double dt = 0.005;
  double dtau = 0.05;
  double ground_tolerance = 1e-13;
  bool force_linear_solver = false;  // g = 0 through the plain Schroedinger path
};

struct NonlinearWalkResult {
  double g = 0.0;
  SiteDistribution distribution;
  double central_width = 0.0;  // rms k within the origin bin, k_R
  double mean_width = 0.0;     // probability-weighted rms over bins with p > 1%
  double initial_width = 0.0;  // rms momentum of the prepared ground state, k_R
  double chemical_potential = 0.0;
  long ground_steps = 0;
};

NonlinearWalkResult run_nonlinear_walk(const NonlinearWalkConfig& config, double g);

}  // namespace bzwalk
