#include "bzwalk/units.hpp"

#include <cmath>
#include <string>

#include "bzwalk/error.hpp"

namespace bzwalk {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

}  // namespace

void PhysicalConstants::validate() const {
  require(hbar > 0.0, "hbar must be positive");
  require(mass > 0.0, "mass must be positive");
  require(bohr_magneton > 0.0, "bohr_magneton must be positive");
  require(mf_gf != 0.0 && std::isfinite(mf_gf), "mf_gf must be a nonzero real");
}

void LatticeConfig::validate() const {
  require(d_lattice > 0.0, "d_lattice must be positive");
  require(tau0 > 0.0, "tau0 must be positive");
  require(V0 >= 0.0, "V0 must be non-negative");
  require(omega_x >= 0.0, "omega_x must be non-negative");
  require(omega_r >= omega_x, "omega_r must be >= omega_x");
  require(std::isfinite(F0) && std::isfinite(x_bar) && std::isfinite(g1d),
          "F0, x_bar and g1d must be finite");
}

double recoil_wavenumber(double d_lattice) { return kPi / d_lattice; }

double recoil_energy(double d_lattice, const PhysicalConstants& c) {
  const double k = recoil_wavenumber(d_lattice);
  return c.hbar * c.hbar * k * k / (2.0 * c.mass);
}

double recoil_frequency(double d_lattice, const PhysicalConstants& c) {
  return recoil_energy(d_lattice, c) / c.hbar;
}

RescaledParams to_rescaled(const LatticeConfig& config, const PhysicalConstants& c) {
  config.validate();
  c.validate();
  const double w_r = recoil_frequency(config.d_lattice, c);
  RescaledParams p;
  p.V0 = config.V0;
  p.F0 = config.F0;
  p.tau0 = config.tau0;
  p.delta_k0 = config.F0 * config.tau0 / kPi;
  p.x_bar = config.x_bar;
  p.omega_x0 = config.omega_x / w_r;
  p.omega_r0 = config.omega_r / w_r;
  p.g1d = config.g1d;
  return p;
}

LatticeConfig from_rescaled(const RescaledParams& p, double d_lattice,
                            const PhysicalConstants& c) {
  require(d_lattice > 0.0, "d_lattice must be positive");
  require(p.tau0 > 0.0, "tau0 must be positive");
  c.validate();
  const double w_r = recoil_frequency(d_lattice, c);
  LatticeConfig config;
  config.d_lattice = d_lattice;
  config.V0 = p.V0;
  config.F0 = p.F0;
  config.tau0 = p.tau0;
  config.x_bar = p.x_bar;
  config.omega_x = p.omega_x0 * w_r;
  config.omega_r = p.omega_r0 * w_r;
  config.g1d = p.g1d;
  return config;
}

double g1d_rescaled(double scattering_length, double omega_r, double atom_number,
                    double d_lattice, const PhysicalConstants& c) {
  require(d_lattice > 0.0, "d_lattice must be positive");
  const double g = 2.0 * c.hbar * scattering_length * omega_r * atom_number;
  return g / (recoil_energy(d_lattice, c) * d_lattice);
}

WalkGeometry::WalkGeometry(int n_sites, int steps) : n_sites_(n_sites), steps_(steps) {
  require(n_sites > 0 && n_sites % 2 == 0, "n_sites must be even and positive");
  require(steps >= 0, "steps must be non-negative");
}

WalkGeometry walk_geometry_for(int n_sites, int full_coverage_steps, bool confine_to_zone) {
  WalkGeometry g(n_sites, full_coverage_steps);
  if (confine_to_zone && 2 * full_coverage_steps > n_sites) {
    throw InvalidParameter("walk of " + std::to_string(full_coverage_steps) +
                           " steps leaves the Brillouin zone of " +
                           std::to_string(n_sites) + " sites");
  }
  return g;
}

}  // namespace bzwalk
