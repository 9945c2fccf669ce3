#include "bzwalk/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bzwalk/band.hpp"
#include "bzwalk/error.hpp"
#include "bzwalk/fft.hpp"

namespace bzwalk {

namespace {

constexpr cplx I{0.0, 1.0};

double fold_k(double k) {
  double r = std::fmod(k + 1.0, 2.0);
  if (r <= 0.0) r += 2.0;
  return r - 1.0;
}

// Autocorrelation R_d = dx^2 sum_i psi_{i+d} conj(psi_i), d = 0..N-1.
std::vector<cplx> autocorrelation(const std::vector<cplx>& psi, double dx) {
  const std::size_t n = psi.size();
  Fft fft(2 * n);
  std::vector<cplx> a(2 * n, cplx{});
  std::copy(psi.begin(), psi.end(), a.begin());
  fft.forward(a);
  for (auto& v : a) v = std::norm(v);
  fft.backward(a);
  std::vector<cplx> r(n);
  const double f = dx * dx / static_cast<double>(2 * n);
  for (std::size_t d = 0; d < n; ++d) r[d] = a[d] * f;
  return r;
}

// (1/2pi) int_{c-h}^{c+h} sum_d R_d exp(-i kappa y_d) d kappa, y_d = d dx.
double interval_probability(const std::vector<cplx>& r, double dx, double c, double h) {
  const std::size_t n = r.size();
  double s = r[0].real();
  // Rotations exp(-i c dx) and exp(i h dx), reseeded to bound round-off.
  const cplx rot_c = std::exp(-I * (c * dx));
  const cplx rot_h = std::exp(I * (h * dx));
  cplx ec = 1.0, eh = 1.0;
  for (std::size_t d = 1; d < n; ++d) {
    if (d % 256 == 0) {
      const double y = static_cast<double>(d) * dx;
      ec = std::exp(-I * (c * y));
      eh = std::exp(I * (h * y));
    } else {
      ec *= rot_c;
      eh *= rot_h;
    }
    const double hy = h * static_cast<double>(d) * dx;
    const double j0 = std::abs(hy) < 1e-8 ? 1.0 - hy * hy / 6.0 : eh.imag() / hy;
    s += 2.0 * (r[d] * ec).real() * j0;
  }
  return 2.0 * h * s / (2.0 * kPi);
}

void accumulate_bins(const std::vector<cplx>& psi, double dx, const WalkGeometry& g,
                     std::vector<double>& out) {
  const auto r = autocorrelation(psi, dx);
  const int n = g.n_sites();
  const double dk = g.delta_k0();
  const double k_top = 1.0 / dx;  // the DTFT is periodic in k with period 2/dx
  const int m_lo = static_cast<int>(std::floor((-k_top - 1.0) / 2.0)) - 1;
  const int m_hi = static_cast<int>(std::ceil((k_top + 1.0) / 2.0)) + 1;
  for (int m = m_lo; m <= m_hi; ++m) {
    for (int i = 0; i < n; ++i) {
      const double a = std::max(g.site_k(i) - 0.5 * dk + 2.0 * m, -k_top);
      const double b = std::min(g.site_k(i) + 0.5 * dk + 2.0 * m, k_top);
      if (b <= a) continue;
      const double c = 0.5 * kPi * (a + b);
      const double h = 0.5 * kPi * (b - a);
      out[i] += interval_probability(r, dx, c, h);
    }
  }
}

SiteDistribution make_distribution(const WalkGeometry& g, std::vector<double> p) {
  SiteDistribution d;
  d.k.resize(g.n_sites());
  for (int i = 0; i < g.n_sites(); ++i) d.k[i] = g.site_k(i);
  d.residual = 1.0 - std::accumulate(p.begin(), p.end(), 0.0);
  d.probability = std::move(p);
  return d;
}

}  // namespace

SiteDistribution site_distribution(const SpinorField& state, const WalkGeometry& geometry,
                                   SpinSelection spins) {
  const double dx = state.grid.dx();
  if (geometry.delta_k0() * kPi < 2.0 * kPi / state.grid.length())
    throw InvalidParameter("walk bins are narrower than the grid's momentum spacing");
  std::vector<double> p(geometry.n_sites(), 0.0);
  if (spins != SpinSelection::down) accumulate_bins(state.psi1, dx, geometry, p);
  if (spins != SpinSelection::up) accumulate_bins(state.psi2, dx, geometry, p);
  for (auto& v : p) v = std::max(v, 0.0);
  return make_distribution(geometry, std::move(p));
}

SiteDistribution site_distribution(const WalkState& state) {
  return make_distribution(state.geometry, state.probabilities());
}

SiteDistribution bin_samples(const std::vector<double>& k, const std::vector<double>& weight,
                             const WalkGeometry& geometry) {
  if (k.size() != weight.size()) throw InvalidParameter("k and weight sizes differ");
  const int n = geometry.n_sites();
  std::vector<double> p(n, 0.0);
  for (std::size_t s = 0; s < k.size(); ++s) {
    const double kf = fold_k(k[s]);
    const int i = geometry.wrap(static_cast<int>(std::lround((kf + 1.0) / geometry.delta_k0())) - 1);
    p[i] += weight[s];
  }
  return make_distribution(geometry, std::move(p));
}

MomentumDensity momentum_density(const SpinorField& state) {
  const std::size_t n = state.grid.size();
  Fft fft(n);
  std::vector<cplx> a = state.psi1, b = state.psi2;
  fft.forward(a);
  fft.forward(b);
  const double dx = state.grid.dx();
  std::vector<std::pair<double, double>> rows(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = state.grid.kappa(j) / kPi;
    // |psi(kappa)|^2 / 2 with psi(kappa) = dx sum psi_x exp(-i kappa x)
    rows[j] = {k, 0.5 * dx * dx * (std::norm(a[j]) + std::norm(b[j]))};
  }
  std::sort(rows.begin(), rows.end());
  MomentumDensity m;
  m.k.reserve(n);
  m.density.reserve(n);
  for (auto& [k, d] : rows) {
    m.k.push_back(k);
    m.density.push_back(d);
  }
  return m;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidParameter("distributions have different sizes");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

double total_variation(const SiteDistribution& a, const SiteDistribution& b) {
  return total_variation(a.probability, b.probability);
}

double walk_fidelity(const WalkState& a, const WalkState& b) {
  if (!(a.geometry == b.geometry)) throw InvalidParameter("walk states have different geometries");
  return std::norm(a.amplitudes.cwiseProduct(b.amplitudes.conjugate()).sum());
}

std::vector<InfidelityPoint> infidelity_curve(const std::vector<double>& V0_list,
                                              const std::vector<int>& j_list,
                                              const InfidelityOptions& o) {
  if (!(o.F0 > 0.0)) throw InvalidParameter("infidelity_curve needs F0 > 0");
  for (int j : j_list)
    if (j < 0) throw InvalidParameter("step counts must be non-negative");
  const WalkGeometry geom(o.n_sites, 0);
  const double tau0 = kPi * geom.delta_k0() / o.F0;
  const int j_max = j_list.empty() ? 0 : *std::max_element(j_list.begin(), j_list.end());

  std::vector<InfidelityPoint> out;
  for (double V0 : V0_list) {
    BandData bands;
    if (o.flat_band) {
      bands = BandData::flat(0.5 * V0, o.n_k);
    } else {
      BandOptions bo;
      bo.m_max = o.m_max;
      bo.n_k = o.n_k;
      bo.n_bands = 2;
      bands = compute_bands(V0, bo);
    }
    PeierlsOptions po;
    po.include_geometric = o.include_geometric;
    WalkOperatorSpec decorated;
    decorated.alpha = o.alpha;
    decorated.phases = peierls_phases(bands, geom, o.F0, tau0, o.x_bar, po);
    WalkOperatorSpec reference;
    reference.alpha = o.alpha;

    const WalkOperator op_d(geom, decorated), op_r(geom, reference);
    WalkState a = WalkState::symmetric(geom), b = a;
    Eigen::MatrixXcd scratch;
    std::vector<double> at(j_max + 1);
    at[0] = 1.0 - walk_fidelity(a, b);
    for (int j = 1; j <= j_max; ++j) {
      op_d.apply(a.amplitudes, scratch);
      op_r.apply(b.amplitudes, scratch);
      at[j] = std::max(0.0, 1.0 - walk_fidelity(a, b));
    }
    for (int j : j_list) out.push_back({V0, j, at[j]});
  }
  return out;
}

ZeemanOverlap zeeman_overlap(double V0, double F0, const ZeemanOverlapOptions& o) {
  if (V0 < 5.0) throw InvalidParameter("zeeman_overlap needs V0 >= 5 for a bound lowest band");
  if (F0 < 0.0) throw InvalidParameter("F0 must be non-negative");
  if (o.m_max < 8) throw InvalidParameter("m_max must be >= 8");
  ZeemanOverlap res;
  res.trap_shift_estimate = F0 / (kPi * kPi * V0);
  if (F0 == 0.0) return res;

  const double T = o.ramp_time > 0.0 ? o.ramp_time : std::max(5.0, 4.0 / F0);
  const long steps = std::max(1L, static_cast<long>(std::ceil(T / o.dt)));
  const double dt = T / static_cast<double>(steps);
  const double reach = F0 * T / (2.0 * kPi);  // smoothstep averages to 1/2

  auto run = [&](double sign) {
    const double k0 = -sign * reach;
    Eigen::VectorXcd c = bloch_vector(k0, V0, o.m_max, 0);
    for (long s = 0; s < steps; ++s) {
      const double u = (static_cast<double>(s) + 0.5) / static_cast<double>(steps);
      // k(t) = k0 + (sign F0 T / pi) int_0^u smoothstep
      const double k = k0 + sign * F0 * T / kPi * (u * u * u - 0.5 * u * u * u * u);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bloch_hamiltonian(k, V0, o.m_max).real());
      if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failed in zeeman_overlap");
      const Eigen::MatrixXcd v = es.eigenvectors().cast<cplx>();
      Eigen::VectorXcd ph(v.cols());
      for (Eigen::Index i = 0; i < v.cols(); ++i) ph[i] = std::exp(-I * es.eigenvalues()[i] * dt);
      c = v * (ph.asDiagonal() * (v.adjoint() * c));
    }
    return c;
  };
  const Eigen::VectorXcd plus = run(+1.0);
  const Eigen::VectorXcd minus = run(-1.0);
  res.overlap_sq = std::norm(plus.dot(minus)) / (plus.squaredNorm() * minus.squaredNorm());
  res.deviation = 1.0 - res.overlap_sq;
  return res;
}

double spatial_freeze_metric(const std::vector<SpinorField>& trajectory) {
  if (trajectory.size() < 2) throw InvalidParameter("spatial_freeze_metric needs at least two snapshots");
  auto normalized = [](const SpinorField& s) {
    auto rho = s.density();
    const double norm = std::accumulate(rho.begin(), rho.end(), 0.0);
    for (auto& v : rho) v /= norm;
    return rho;
  };
  const auto ref = normalized(trajectory.front());
  double worst = 0.0;
  for (std::size_t i = 1; i < trajectory.size(); ++i)
    worst = std::max(worst, total_variation(ref, normalized(trajectory[i])));
  return worst;
}

std::vector<double> band_populations(const SpinorField& state, double V0, int n_bands, int m_max) {
  const double L = state.grid.length();
  const long Li = std::lround(L);
  const auto n = static_cast<long>(state.grid.size());
  if (std::abs(L - static_cast<double>(Li)) > 1e-9 || Li % 2 != 0 || n % Li != 0)
    throw InvalidParameter("band_populations needs an even integer grid length dividing the grid size");
  if (n_bands < 1 || n_bands > 2 * m_max + 1) throw InvalidParameter("n_bands out of range");
  Fft fft(state.grid.size());
  std::vector<cplx> a = state.psi1, b = state.psi2;
  fft.forward(a);
  fft.forward(b);
  auto at = [&](const std::vector<cplx>& v, long j) {
    const long idx = j < 0 ? j + n : j;
    return v[static_cast<std::size_t>(idx)];
  };
  const double scale = state.grid.dx() / static_cast<double>(n);
  std::vector<double> pop(n_bands + 1, 0.0);
  double total = 0.0;
  for (const auto& v : {std::cref(a), std::cref(b)})
    for (const auto& z : v.get()) total += std::norm(z);
  total *= scale;

  const long half_m = n / Li / 2;  // available images m in [-half_m, half_m)
  for (long r = -Li / 2; r < Li / 2; ++r) {
    const double k = 2.0 * static_cast<double>(r) / L;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bloch_hamiltonian(k, V0, m_max).real());
    for (int band = 0; band < n_bands; ++band) {
      const Eigen::VectorXd u = es.eigenvectors().col(band);
      cplx pa = 0.0, pb = 0.0;
      for (long m = -half_m; m < half_m; ++m) {
        if (m < -m_max || m > m_max) continue;
        const double w = u[m + m_max];
        pa += w * at(a, r + Li * m);
        pb += w * at(b, r + Li * m);
      }
      pop[band] += scale * (std::norm(pa) + std::norm(pb));
    }
  }
  double in_bands = 0.0;
  for (int band = 0; band < n_bands; ++band) in_bands += pop[band];
  pop[n_bands] = std::max(0.0, total - in_bands);
  return pop;
}

FieldMoments moments(const SpinorField& state) {
  const std::size_t n = state.grid.size();
  const double dx = state.grid.dx();
  Fft fft(n);
  FieldMoments m;
  double sx = 0.0, sxx = 0.0, sk = 0.0, skk = 0.0, sxk = 0.0;
  for (const auto* psi : {&state.psi1, &state.psi2}) {
    std::vector<cplx> f = *psi;
    fft.forward(f);
    for (std::size_t j = 0; j < n; ++j) {
      const double k = state.grid.kappa(j) / kPi;
      const double w = std::norm(f[j]);
      sk += k * w * dx / static_cast<double>(n);
      skk += k * k * w * dx / static_cast<double>(n);
      f[j] *= k / static_cast<double>(n);
    }
    fft.backward(f);  // f = k psi
    for (std::size_t i = 0; i < n; ++i) {
      const double x = state.grid.x(i);
      const double rho = std::norm((*psi)[i]);
      m.norm += rho * dx;
      sx += x * rho * dx;
      sxx += x * x * rho * dx;
      sxk += x * (std::conj((*psi)[i]) * f[i]).real() * dx;
    }
  }
  if (!(m.norm > 0.0)) throw NumericalError("moments of a zero field");
  m.x_mean = sx / m.norm;
  m.k_mean = sk / m.norm;
  m.x_rms = std::sqrt(std::max(0.0, sxx / m.norm - m.x_mean * m.x_mean));
  m.k_rms = std::sqrt(std::max(0.0, skk / m.norm - m.k_mean * m.k_mean));
  m.xk_cov = sxk / m.norm - m.x_mean * m.k_mean;
  return m;
}

}  // namespace bzwalk
