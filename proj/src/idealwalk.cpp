#include "bzwalk/idealwalk.hpp"

#include <cmath>
#include <sstream>

#include "bzwalk/error.hpp"
#include "bzwalk/fft.hpp"

namespace bzwalk {

namespace {

constexpr cplx I{0.0, 1.0};

double circular_mean(const std::vector<double>& a) {
  cplx z = 0.0;
  for (double v : a) z += std::exp(I * v);
  if (std::abs(z) < 1e-300) return 0.0;
  return std::arg(z);
}

}  // namespace

WalkState WalkState::localized(WalkGeometry g, int site, cplx up, cplx down) {
  if (site < 0 || site >= g.n_sites()) throw InvalidParameter("site out of range");
  WalkState s(g);
  s.amplitudes(site, 0) = up;
  s.amplitudes(site, 1) = down;
  return s;
}

WalkState WalkState::symmetric(WalkGeometry g) {
  const double r = 1.0 / std::sqrt(2.0);
  return localized(g, g.origin(), r, r);
}

std::vector<double> WalkState::probabilities() const {
  std::vector<double> p(amplitudes.rows());
  for (Eigen::Index i = 0; i < amplitudes.rows(); ++i)
    p[i] = std::norm(amplitudes(i, 0)) + std::norm(amplitudes(i, 1));
  return p;
}

Eigen::Matrix2cd coin_matrix(double alpha, double phase) {
  const double c = std::cos(0.5 * alpha);
  const double s = std::sin(0.5 * alpha);
  Eigen::Matrix2cd u;
  u << c, I * s * std::exp(-I * phase), I * s * std::exp(I * phase), c;
  return u;
}

WalkOperator::WalkOperator(const WalkGeometry& geometry, const WalkOperatorSpec& spec)
    : n_(geometry.n_sites()), coin_(coin_matrix(spec.alpha, spec.coin_phase)),
      fwd_(n_, cplx{1.0}), bwd_(n_, cplx{1.0}),
      open_(spec.boundary == BoundaryMode::open_subregion), first_(spec.open_first),
      last_(spec.open_last < 0 ? n_ - 1 : spec.open_last) {
  if (spec.phases) {
    if (spec.phases->n_sites != n_)
      throw InvalidParameter("Peierls table does not match the walk geometry");
    const auto pp = spec.phases->phi_plus();
    const auto pm = spec.phases->phi_minus();
    for (int i = 0; i < n_; ++i) {
      fwd_[i] = std::exp(I * pp[i]);
      bwd_[i] = std::exp(I * pm[i]);
    }
  }
  fwd_[n_ - 1] *= std::exp(I * spec.twist);
  bwd_[0] *= std::exp(-I * spec.twist);
  if (open_ && (first_ < 0 || last_ >= n_ || first_ > last_))
    throw InvalidParameter("open subregion bounds out of range");
}

void WalkOperator::apply(Eigen::MatrixXcd& a, Eigen::MatrixXcd& scratch) const {
  if (a.rows() != n_ || a.cols() != 2) throw InvalidParameter("walk state does not match the operator");
  a = a * coin_.transpose();
  scratch.setZero(n_, 2);
  for (int i = 0; i < n_; ++i) {
    const cplx up = a(i, 0);
    const cplx dn = a(i, 1);
    if (open_) {
      const bool leaves_up = (i + 1 == n_) || i + 1 > last_;
      const bool leaves_dn = (i == 0) || i - 1 < first_;
      if ((leaves_up && up != cplx{}) || (leaves_dn && dn != cplx{})) {
        std::ostringstream msg;
        msg << "walker reached the boundary of the open subregion at site " << i;
        throw BoundaryViolation(msg.str());
      }
    }
    scratch(i + 1 == n_ ? 0 : i + 1, 0) += fwd_[i] * up;
    scratch(i == 0 ? n_ - 1 : i - 1, 1) += bwd_[i] * dn;
  }
  a.swap(scratch);
}

WalkState walk_evolve(const WalkState& initial, const WalkOperatorSpec& spec, int steps) {
  if (steps < 0) throw InvalidParameter("steps must be non-negative");
  if (std::abs(initial.norm() - 1.0) > 1e-10) throw InvalidParameter("initial walk state is not normalized");
  const WalkOperator op(initial.geometry, spec);
  WalkState s = initial;
  s.twist = spec.twist;
  Eigen::MatrixXcd scratch;
  for (int j = 0; j < steps; ++j) op.apply(s.amplitudes, scratch);
  return s;
}

GaugeReduction gauge_reduce(const PeierlsTable& table, double tolerance) {
  const int n = table.n_sites;
  if (n < 1) throw InvalidParameter("empty Peierls table");
  const auto pp = table.phi_plus();
  const auto pm = table.phi_minus();
  GaugeReduction g;
  g.sum.resize(n);
  for (int i = 0; i < n; ++i) g.sum[i] = wrap_phase(pp[i] + pm[(i + 1) % n]);
  const double mean = circular_mean(g.sum);
  g.gamma = 0.5 * mean;
  g.residual.resize(n);
  double twist = 0.0;
  for (int i = 0; i < n; ++i) {
    g.residual[i] = wrap_phase(g.sum[i] - mean);
    g.max_residual = std::max(g.max_residual, std::abs(g.residual[i]));
    twist += wrap_phase(pp[i] - g.gamma - 0.5 * g.residual[i]);
  }
  g.removable = g.max_residual < tolerance;
  g.twist = wrap_phase(twist);
  g.globally_removable = g.removable && std::abs(g.twist) < tolerance;
  std::vector<double> half(n), half_m(n);
  for (int i = 0; i < n; ++i) {
    half[i] = 0.5 * g.residual[i];
    half_m[(i + 1) % n] = 0.5 * g.residual[i];
  }
  g.residual_table = PeierlsTable::from_totals(half, half_m);
  return g;
}

double twist_phase(const WalkGeometry& geometry, double x_bar, double zak_phase) {
  return wrap_phase(-kPi * geometry.n_sites() * geometry.delta_k0() * x_bar + zak_phase);
}

double DiracState::norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < up.size(); ++i) s += std::norm(up[i]) + std::norm(down[i]);
  return s;
}

DiracState dirac_propagate(const DiracState& initial, double F0, double omega_rabi, double t,
                           int n_steps) {
  const std::size_t m = initial.size();
  if (m < 2 || initial.down.size() != m) throw InvalidParameter("Dirac state components must have equal size >= 2");
  if (n_steps < 1) throw InvalidParameter("n_steps must be positive");
  DiracState s = initial;
  const double dt = t / n_steps;
  Fft fft(m);
  // Conjugate variable of k on the period-2 grid: q_j = pi j (FFT ordering).
  std::vector<cplx> up_half(m), dn_half(m);
  const double shift = 0.5 * dt * F0 / kPi;
  for (std::size_t j = 0; j < m; ++j) {
    const long jj = static_cast<long>(j) < static_cast<long>(m / 2) ? static_cast<long>(j)
                                                                      : static_cast<long>(j) - static_cast<long>(m);
    const double q = kPi * static_cast<double>(jj);
    up_half[j] = std::exp(-I * q * shift) / static_cast<double>(m);
    dn_half[j] = std::exp(I * q * shift) / static_cast<double>(m);
  }
  const double c = std::cos(0.5 * omega_rabi * dt);
  const cplx is = -I * std::sin(0.5 * omega_rabi * dt);
  auto translate = [&]() {
    fft.forward(s.up);
    fft.forward(s.down);
    for (std::size_t j = 0; j < m; ++j) {
      s.up[j] *= up_half[j];
      s.down[j] *= dn_half[j];
    }
    fft.backward(s.up);
    fft.backward(s.down);
  };
  for (int step = 0; step < n_steps; ++step) {
    translate();
    for (std::size_t i = 0; i < m; ++i) {
      const cplx a = s.up[i], b = s.down[i];
      s.up[i] = c * a + is * b;
      s.down[i] = is * a + c * b;
    }
    translate();
  }
  return s;
}

}  // namespace bzwalk
