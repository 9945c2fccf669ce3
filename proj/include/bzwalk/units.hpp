#pragma once

// Physical constants and the rescaled unit system used by every simulation
// module: lengths in lattice constants d_L, quasimomenta in k_R = pi/d_L,
// energies in the recoil energy E_R and times in hbar/E_R.

#include <numbers>

namespace bzwalk {

inline constexpr double kPi = std::numbers::pi;

struct PhysicalConstants {
  double hbar = 1.054571817e-34;         // J s
  double mass = 1.443160648e-25;         // kg, 87Rb
  double bohr_magneton = 9.2740100783e-24;  // J/T
  // m_F g_F of the walk states; the pair |F=1,m_F=-1>, |F=2,m_F=-1> of 87Rb
  // has opposite Zeeman shifts of magnitude 1/2.
  double mf_gf = 0.5;

  void validate() const;

  static PhysicalConstants rubidium87() { return {}; }
};

/// Laboratory-facing lattice parameters. V0 and F0 are already dimensionless;
/// frequencies are in rad/s.
struct LatticeConfig {
  double d_lattice = 532e-9;
  double V0 = 20.0;
  double F0 = 0.2;
  double x_bar = 0.0;    // Zeeman zero point, units of d_L
  double omega_x = 2.0 * kPi * 10.0;
  double omega_r = 2.0 * kPi * 100.0;
  double g1d = 0.0;      // rescaled: E_R d_L
  double tau0 = kPi / 2.0;

  void validate() const;
};

/// Everything in rescaled units.
struct RescaledParams {
  double V0 = 0.0;
  double F0 = 0.0;
  double tau0 = 0.0;
  double delta_k0 = 0.0;
  double x_bar = 0.0;
  double omega_x0 = 0.0;  // hbar omega_x / E_R
  double omega_r0 = 0.0;
  double g1d = 0.0;
};

double recoil_wavenumber(double d_lattice);
double recoil_energy(double d_lattice, const PhysicalConstants& c);
/// E_R / hbar in rad/s; converts rescaled frequencies to physical ones.
double recoil_frequency(double d_lattice, const PhysicalConstants& c);

RescaledParams to_rescaled(const LatticeConfig& config, const PhysicalConstants& c);
LatticeConfig from_rescaled(const RescaledParams& p, double d_lattice,
                            const PhysicalConstants& c);

/// 1-D coupling 2 hbar a_s omega_r N in units of E_R d_L.
double g1d_rescaled(double scattering_length, double omega_r, double atom_number,
                    double d_lattice, const PhysicalConstants& c);

/// Ring of n quasimomentum sites filling the Brillouin zone (-1, 1] in units
/// of k_R. The step size is derived from n so n * delta_k0 == 2 holds by
/// construction.
class WalkGeometry {
 public:
  WalkGeometry(int n_sites, int steps);

  int n_sites() const { return n_sites_; }
  int steps() const { return steps_; }
  double delta_k0() const { return 2.0 / n_sites_; }
  /// Total quasimomentum covered by one spin component, j * delta_k0.
  double reach() const { return steps_ * delta_k0(); }

  /// Site i sits at k = -1 + (i + 1) delta_k0, so i runs over (-1, 1] and
  /// origin() is the site at k = 0.
  double site_k(int i) const { return -1.0 + (i + 1) * delta_k0(); }
  int origin() const { return n_sites_ / 2 - 1; }
  int wrap(int i) const {
    const int m = i % n_sites_;
    return m < 0 ? m + n_sites_ : m;
  }

  bool operator==(const WalkGeometry&) const = default;

 private:
  int n_sites_;
  int steps_;
};

/// Geometry with step size 2/n. With confine_to_zone the walk must not reach
/// past the zone edge (j <= n/2).
WalkGeometry walk_geometry_for(int n_sites, int full_coverage_steps,
                               bool confine_to_zone = false);

}  // namespace bzwalk
