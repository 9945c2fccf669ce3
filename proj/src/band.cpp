#include "bzwalk/band.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "bzwalk/error.hpp"

namespace bzwalk {

namespace {

constexpr cplx I{0.0, 1.0};

Eigen::VectorXcd shift_down(const Eigen::VectorXcd& v) {
  // (S v)_m = v_{m+1}: the periodic-gauge image of u_k at k + 2.
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  out.head(v.size() - 1) = v.tail(v.size() - 1);
  return out;
}

void solve_at(double k, double V0, const BandOptions& o, Eigen::MatrixXd& all, int row,
              Eigen::MatrixXcd& states) {
  auto energies = all.row(row);
  const int dim = 2 * o.m_max + 1;
  if (o.lattice_shift == 0.0) {
    Eigen::MatrixXd h = bloch_hamiltonian(k, V0, o.m_max).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "Bloch eigen-solver failed at k=" << k << " V0=" << V0 << " dim=" << dim;
      throw NumericalError(msg.str());
    }
    energies = es.eigenvalues().head(o.n_bands).transpose();
    states = es.eigenvectors().leftCols(o.n_bands).cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        bloch_hamiltonian(k, V0, o.m_max, o.lattice_shift));
    if (es.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "Bloch eigen-solver failed at k=" << k << " V0=" << V0 << " dim=" << dim;
      throw NumericalError(msg.str());
    }
    energies = es.eigenvalues().head(o.n_bands).transpose();
    states = es.eigenvectors().leftCols(o.n_bands);
  }
}

}  // namespace

double wrap_phase(double phi) {
  double r = std::fmod(phi + kPi, 2.0 * kPi);
  if (r <= 0.0) r += 2.0 * kPi;
  return r - kPi;
}

Eigen::MatrixXcd bloch_hamiltonian(double k, double V0, int m_max, double lattice_shift) {
  const int dim = 2 * m_max + 1;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  const cplx hop = -0.25 * V0 * std::exp(-2.0 * kPi * I * lattice_shift);
  for (int a = 0; a < dim; ++a) {
    const double q = k + 2.0 * (a - m_max);
    h(a, a) = q * q + 0.5 * V0;
    if (a + 1 < dim) {
      h(a + 1, a) = hop;
      h(a, a + 1) = std::conj(hop);
    }
  }
  return h;
}

Eigen::VectorXcd bloch_vector(double k, double V0, int m_max, int band, double lattice_shift) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      bloch_hamiltonian(k, V0, m_max, lattice_shift));
  if (es.info() != Eigen::Success) throw NumericalError("Bloch eigen-solver failed");
  return es.eigenvectors().col(band);
}

BandData compute_bands(double V0, const BandOptions& o) {
  if (o.m_max < 8) throw InvalidParameter("m_max must be >= 8");
  if (o.n_k < 16) throw InvalidParameter("n_k must be >= 16");
  if (o.n_bands < 1 || o.n_bands > o.m_max) throw InvalidParameter("n_bands must be in [1, m_max]");
  if (o.tracked_band < 0 || o.tracked_band >= o.n_bands)
    throw InvalidParameter("tracked_band out of range");
  if (!(V0 >= 0.0)) throw InvalidParameter("V0 must be non-negative");

  BandData b;
  b.V0 = V0;
  b.m_max = o.m_max;
  b.band_index = o.tracked_band;
  b.lattice_shift = o.lattice_shift;
  b.k.resize(o.n_k);
  b.energies.resize(o.n_k, o.n_bands);
  b.bloch_states.resize(o.n_k);
  const double dk = 2.0 / o.n_k;
  for (int i = 0; i < o.n_k; ++i) {
    b.k[i] = -1.0 + (i + 1) * dk;
    solve_at(b.k[i], V0, o, b.energies, i, b.bloch_states[i]);
  }

  // Free particle: plane waves with zero connection. The bands touch at the
  // zone edge, where parallel transport is undefined.
  if (V0 == 0.0) {
    b.connection.assign(o.n_k, 0.0);
    b.zak_phase = 0.0;
    return b;
  }

  // Parallel transport of the tracked band, then spread the loop phase evenly
  // over the links so the gauge is smooth and periodic.
  const int t = o.tracked_band;
  for (int i = 1; i < o.n_k; ++i) {
    const cplx ov = b.bloch_states[i - 1].col(t).dot(b.bloch_states[i].col(t));
    if (std::abs(ov) < 1e-3) {
      std::ostringstream msg;
      msg << "adjacent Bloch states nearly orthogonal at k=" << b.k[i] << " (|<u|u'>|="
          << std::abs(ov) << ")";
      throw GaugeSingularity(msg.str());
    }
    b.bloch_states[i].col(t) *= std::conj(ov) / std::abs(ov);
  }
  const cplx closure =
      b.bloch_states[o.n_k - 1].col(t).dot(shift_down(b.bloch_states[0].col(t)));
  const double theta = std::arg(closure);
  for (int i = 0; i < o.n_k; ++i)
    b.bloch_states[i].col(t) *= std::exp(I * (theta * i / o.n_k));

  auto bz = berry_zak_connection(b, t);
  b.connection = std::move(bz.connection);
  b.zak_phase = bz.zak_phase;
  return b;
}

BerryZak berry_zak_connection(const BandData& bands, int band) {
  const int n = bands.n_k();
  if (n < 2 || static_cast<int>(bands.bloch_states.size()) != n)
    throw InvalidParameter("berry_zak_connection needs Bloch states on a closed k grid");
  if (band < 0 || band >= bands.n_bands()) throw InvalidParameter("band out of range");

  std::vector<double> link(n);
  cplx loop = 1.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXcd& u = bands.bloch_states[i].col(band);
    const Eigen::VectorXcd next = (i + 1 < n) ? Eigen::VectorXcd(bands.bloch_states[i + 1].col(band))
                                              : shift_down(bands.bloch_states[0].col(band));
    const cplx ov = u.dot(next);
    if (std::abs(ov) < 1e-3) {
      std::ostringstream msg;
      msg << "gauge singularity: |<u_k|u_k+dk>| = " << std::abs(ov) << " at k=" << bands.k[i];
      throw GaugeSingularity(msg.str());
    }
    link[i] = -std::arg(ov) / (kPi * bands.dk());
    loop *= ov / std::abs(ov);
  }
  BerryZak out;
  out.connection.resize(n);
  for (int i = 0; i < n; ++i) out.connection[i] = 0.5 * (link[i] + link[(i + n - 1) % n]);
  out.zak_phase = wrap_phase(-std::arg(loop));
  return out;
}

double BandData::bandwidth(int band) const {
  return energies.col(band).maxCoeff() - energies.col(band).minCoeff();
}

PeriodicCubicSpline BandData::energy_spline(int band) const {
  std::vector<double> e(energies.rows());
  for (int i = 0; i < energies.rows(); ++i) e[i] = energies(i, band);
  return PeriodicCubicSpline(k.front(), 2.0, e);
}

PeriodicCubicSpline BandData::connection_spline() const {
  if (connection.empty()) {
    std::vector<double> zero(std::max<std::size_t>(k.size(), 4), 0.0);
    return PeriodicCubicSpline(k.empty() ? 0.0 : k.front(), 2.0, zero);
  }
  return PeriodicCubicSpline(k.front(), 2.0, connection);
}

BandData BandData::flat(double energy, int n_k) {
  BandData b;
  b.k.resize(n_k);
  b.energies = Eigen::MatrixXd::Constant(n_k, 1, energy);
  for (int i = 0; i < n_k; ++i) b.k[i] = -1.0 + (i + 1) * (2.0 / n_k);
  b.connection.assign(n_k, 0.0);
  return b;
}

std::vector<double> PeierlsTable::phi_plus() const {
  std::vector<double> out(n_sites);
  for (int i = 0; i < n_sites; ++i) out[i] = wrap_phase(plus_dynamical[i] + plus_geometric[i]);
  return out;
}

std::vector<double> PeierlsTable::phi_minus() const {
  std::vector<double> out(n_sites);
  for (int i = 0; i < n_sites; ++i) out[i] = wrap_phase(minus_dynamical[i] + minus_geometric[i]);
  return out;
}

PeierlsTable PeierlsTable::zero(int n_sites) {
  PeierlsTable t;
  t.n_sites = n_sites;
  t.plus_dynamical.assign(n_sites, 0.0);
  t.plus_geometric.assign(n_sites, 0.0);
  t.minus_dynamical.assign(n_sites, 0.0);
  t.minus_geometric.assign(n_sites, 0.0);
  return t;
}

PeierlsTable PeierlsTable::from_totals(std::vector<double> phi_plus, std::vector<double> phi_minus) {
  if (phi_plus.size() != phi_minus.size()) throw InvalidParameter("phase table size mismatch");
  PeierlsTable t = zero(static_cast<int>(phi_plus.size()));
  for (int i = 0; i < t.n_sites; ++i) {
    t.plus_dynamical[i] = wrap_phase(phi_plus[i]);
    t.minus_dynamical[i] = wrap_phase(phi_minus[i]);
  }
  return t;
}

PeierlsTable peierls_phases(const BandData& bands, const WalkGeometry& geometry, double F0,
                            double tau0, double x_bar, const PeierlsOptions& o) {
  const double dk = geometry.delta_k0();
  if (!(tau0 > 0.0)) throw InvalidParameter("tau0 must be positive");
  if (std::abs(F0 * tau0 / kPi - dk) > 1e-9 * std::max(1.0, dk)) {
    std::ostringstream msg;
    msg << "F0*tau0/pi = " << F0 * tau0 / kPi << " does not match the site spacing " << dk;
    throw InvalidParameter(msg.str());
  }
  if (bands.n_k() < 4) throw InvalidParameter("band data has too few k samples");

  const int n = geometry.n_sites();
  PeierlsTable t = PeierlsTable::zero(n);
  const auto energy = bands.energy_spline(bands.band_index < bands.n_bands() ? bands.band_index : 0);
  const auto conn = bands.connection_spline();
  const double time_per_k = tau0 / dk;  // = pi / F0
  const int m = o.simpson_intervals;

  for (int i = 0; i < n; ++i) {
    const double k = geometry.site_k(i);
    const double zeeman = o.include_zeeman ? F0 * x_bar * tau0 : 0.0;
    double e_plus = 0.0, e_minus = 0.0, a_plus = 0.0, a_minus = 0.0;
    if (o.include_energy) {
      e_plus = simpson([&](double q) { return energy(q); }, k, k + dk, m);
      e_minus = simpson([&](double q) { return energy(q); }, k, k - dk, m);
    }
    if (o.include_geometric) {
      a_plus = simpson([&](double q) { return conn(q); }, k, k + dk, m);
      a_minus = simpson([&](double q) { return conn(q); }, k, k - dk, m);
    }
    t.plus_dynamical[i] = wrap_phase(-zeeman - time_per_k * e_plus);
    t.minus_dynamical[i] = wrap_phase(+zeeman + time_per_k * e_minus);
    t.plus_geometric[i] = wrap_phase(kPi * a_plus);
    t.minus_geometric[i] = wrap_phase(kPi * a_minus);
  }
  return t;
}

LandauZenerMargin landau_zener_check(double V0, double F0) {
  if (V0 < 0.0 || F0 < 0.0) throw InvalidParameter("V0 and F0 must be non-negative");
  if (F0 == 0.0) return {std::numeric_limits<double>::infinity(), true};
  const double ratio = V0 / std::sqrt(32.0 * F0 / (kPi * kPi));
  return {ratio, ratio >= 5.0};
}

}  // namespace bzwalk
