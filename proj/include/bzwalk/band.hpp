#pragma once

// Bloch bands of the lattice V0 sin^2(pi (x - shift)) in rescaled units:
//   H = -(1/pi^2) d^2/dx^2 + V0 sin^2(pi (x - shift)),
// diagonalized in the plane-wave basis exp(i pi (k + 2m) x), |m| <= m_max.

#include <Eigen/Dense>
#include <vector>

#include "bzwalk/fft.hpp"
#include "bzwalk/spline.hpp"
#include "bzwalk/units.hpp"

namespace bzwalk {

struct BandOptions {
  int m_max = 32;
  int n_k = 512;
  int n_bands = 4;
  int tracked_band = 0;
  /// Lattice origin offset in d_L; nonzero values give a nonzero Zak phase.
  double lattice_shift = 0.0;
};

struct BandData {
  double V0 = 0.0;
  int m_max = 0;
  int band_index = 0;
  double lattice_shift = 0.0;
  std::vector<double> k;           // (-1, 1], uniform, k_R units
  Eigen::MatrixXd energies;        // n_k x n_bands, E_R
  /// Per k: plane-wave coefficients (2 m_max + 1) x n_bands. The tracked band
  /// is in a smooth periodic gauge; the others carry the solver's phases.
  std::vector<Eigen::MatrixXcd> bloch_states;
  std::vector<double> connection;  // A(k) of the tracked band, units d_L
  double zak_phase = 0.0;          // in (-pi, pi]

  int n_k() const { return static_cast<int>(k.size()); }
  int n_bands() const { return static_cast<int>(energies.cols()); }
  double dk() const { return 2.0 / static_cast<double>(k.size()); }
  double bandwidth(int band) const;

  PeriodicCubicSpline energy_spline(int band) const;
  PeriodicCubicSpline connection_spline() const;

  /// Synthetic dispersionless band with zero connection, for controls.
  static BandData flat(double energy, int n_k = 64);
};

Eigen::MatrixXcd bloch_hamiltonian(double k, double V0, int m_max, double lattice_shift = 0.0);

BandData compute_bands(double V0, const BandOptions& options = {});

struct BerryZak {
  std::vector<double> connection;  // d_L units, one per k sample
  double zak_phase = 0.0;          // (-pi, pi]
};

/// Discrete log-overlap (Wilson loop) connection of one band. The loop closes
/// through the periodic-gauge relation u_{k+2}(m) = u_k(m+1).
BerryZak berry_zak_connection(const BandData& bands, int band);

/// Plane-wave coefficients of band `band` at arbitrary k (solver gauge).
Eigen::VectorXcd bloch_vector(double k, double V0, int m_max, int band,
                              double lattice_shift = 0.0);

struct PeierlsOptions {
  bool include_energy = true;
  bool include_zeeman = true;
  bool include_geometric = true;
  int simpson_intervals = 64;
};

/// Link phases of the walk operator, one entry per site, each part wrapped
/// to (-pi, pi]. plus[i] decorates |k_i + dk><k_i| for spin up, minus[i]
/// decorates |k_i - dk><k_i| for spin down.
struct PeierlsTable {
  int n_sites = 0;
  std::vector<double> plus_dynamical, plus_geometric;
  std::vector<double> minus_dynamical, minus_geometric;

  std::vector<double> phi_plus() const;
  std::vector<double> phi_minus() const;

  static PeierlsTable zero(int n_sites);
  static PeierlsTable from_totals(std::vector<double> phi_plus, std::vector<double> phi_minus);
};

/// phi^D_pm(k) = -+ F0 x_bar tau0 -+ (tau0/dk0) int_0^{+-dk0} E(k+k') dk'
/// phi^G_pm(k) = pi int_0^{+-dk0} A(k+k') dk'
/// (rescaled; tau0/dk0 = pi/F0 is the time spent per unit quasimomentum).
PeierlsTable peierls_phases(const BandData& bands, const WalkGeometry& geometry, double F0,
                            double tau0, double x_bar, const PeierlsOptions& options = {});

struct LandauZenerMargin {
  double ratio = 0.0;  // V0 / sqrt(32 F0 / pi^2); +inf for F0 = 0
  bool safe = true;    // ratio >= 5
};

LandauZenerMargin landau_zener_check(double V0, double F0);

/// Wrap an angle to (-pi, pi].
double wrap_phase(double phi);

}  // namespace bzwalk
