#pragma once

// Readout and comparison: quasimomentum site distributions, walk fidelity,
// the Zeeman-distortion overlap and position-space freezing.

#include <vector>

#include "bzwalk/idealwalk.hpp"
#include "bzwalk/propagator.hpp"
#include "bzwalk/units.hpp"

namespace bzwalk {

struct SiteDistribution {
  std::vector<double> k;            // site centres, k_R
  std::vector<double> probability;  // per site
  double residual = 0.0;            // 1 - sum(probability)

  std::size_t size() const { return probability.size(); }
};

enum class SpinSelection { both, up, down };

/// Momentum density folded into the first zone and integrated exactly over
/// bins of width dk0 centred on the walk sites. The bin integrals of the
/// discrete-time Fourier transform are evaluated in closed form, so the
/// result does not depend on the grid's momentum spacing.
SiteDistribution site_distribution(const SpinorField& state, const WalkGeometry& geometry,
                                   SpinSelection spins = SpinSelection::both);

SiteDistribution site_distribution(const WalkState& state);

/// Bin a distribution sampled on arbitrary (k, weight) pairs into walk sites
/// after folding k into (-1, 1].
SiteDistribution bin_samples(const std::vector<double>& k, const std::vector<double>& weight,
                             const WalkGeometry& geometry);

/// Momentum density |psi(k)|^2 on the grid's DFT points, spin summed, sorted by k
/// (k_R units), normalized so sum density * dk = norm.
struct MomentumDensity {
  std::vector<double> k;
  std::vector<double> density;
};
MomentumDensity momentum_density(const SpinorField& state);

double total_variation(const std::vector<double>& a, const std::vector<double>& b);
double total_variation(const SiteDistribution& a, const SiteDistribution& b);

/// |<a|b>|^2 over the n x 2 amplitude space.
double walk_fidelity(const WalkState& a, const WalkState& b);

struct InfidelityOptions {
  int n_sites = 20;
  double F0 = 0.2;
  double x_bar = 0.0;
  double alpha = kPi / 2.0;
  int m_max = 32;
  int n_k = 512;
  bool flat_band = false;
  bool include_geometric = true;
};

struct InfidelityPoint {
  double V0 = 0.0;
  int steps = 0;
  double infidelity = 0.0;
};

/// For each V0: Peierls table from the band, evolve decorated and zero-phase
/// walks from the symmetric spinor at the origin, record 1 - F at each j.
std::vector<InfidelityPoint> infidelity_curve(const std::vector<double>& V0_list,
                                              const std::vector<int>& j_list,
                                              const InfidelityOptions& options = {});

struct ZeemanOverlapOptions {
  int m_max = 24;
  double ramp_time = 0.0;  // 0: choose from F0
  double dt = 0.01;
};

struct ZeemanOverlap {
  double overlap_sq = 1.0;
  double deviation = 0.0;         // 1 - |I|^2
  double trap_shift_estimate = 0.0;  // F0 / (pi^2 V0), d_L
};

/// Adiabatically switch on +F0 and -F0 for two copies of the lowest Bloch
/// state, arranged to arrive at the same quasimomentum, and overlap them.
ZeemanOverlap zeeman_overlap(double V0, double F0, const ZeemanOverlapOptions& options = {});

/// Largest total-variation distance between the normalized position density
/// of any snapshot and the first one.
double spatial_freeze_metric(const std::vector<SpinorField>& trajectory);

/// Population of Bloch bands 0..n_bands-1 (spin summed); the last entry is
/// everything outside those bands. Requires a grid length that is an even
/// integer number of lattice constants.
std::vector<double> band_populations(const SpinorField& state, double V0, int n_bands,
                                     int m_max = 24);

struct FieldMoments {
  double norm = 0.0;
  double x_mean = 0.0, x_rms = 0.0;   // d_L
  double k_mean = 0.0, k_rms = 0.0;   // k_R (unfolded momentum)
  double xk_cov = 0.0;                // symmetrized <x k> - <x><k>
};
FieldMoments moments(const SpinorField& state);

}  // namespace bzwalk
