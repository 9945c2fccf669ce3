#include "bzwalk/decoherence.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "bzwalk/error.hpp"

namespace bzwalk {

namespace {

constexpr cplx I{0.0, 1.0};

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi > lo)) throw InvalidParameter("spectrum grid needs 0 < lo < hi");
  if (per_decade < 2) throw InvalidParameter("points_per_decade must be >= 2");
  const int n = std::max(2, static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)) + 1);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  w.back() = hi;
  return w;
}

}  // namespace

NoiseSpectrum::NoiseSpectrum(std::vector<double> omega, std::vector<double> density,
                             double omega_c, bool single_tone)
    : omega_(std::move(omega)), density_(std::move(density)), omega_c_(omega_c),
      single_tone_(single_tone) {
  if (omega_.size() != density_.size()) throw InvalidParameter("spectrum omega and density sizes differ");
  if (omega_.size() < 2) throw InvalidParameter("spectrum needs at least two points");
  for (std::size_t i = 0; i < omega_.size(); ++i) {
    if (!(omega_[i] > 0.0)) throw InvalidParameter("spectrum frequencies must be positive");
    if (i > 0 && !(omega_[i] > omega_[i - 1])) throw InvalidParameter("spectrum frequencies must increase");
    if (!(density_[i] >= 0.0) || !std::isfinite(density_[i]))
      throw InvalidParameter("spectral density must be finite and non-negative");
  }
  if (!(omega_c > 0.0)) throw InvalidParameter("omega_c must be positive");
  if (omega_c < omega_.front() * (1.0 - 1e-12))
    throw InvalidParameter("spectrum grid does not cover the cutoff omega_c");
}

double NoiseSpectrum::operator()(double w) const {
  if (omega_.empty() || w < omega_c_ || w < omega_.front() || w > omega_.back()) return 0.0;
  auto it = std::upper_bound(omega_.begin(), omega_.end(), w);
  if (it == omega_.end()) return density_.back();
  const std::size_t i = static_cast<std::size_t>(it - omega_.begin()) - 1;
  const double t = std::log(w / omega_[i]) / std::log(omega_[i + 1] / omega_[i]);
  return density_[i] + t * (density_[i + 1] - density_[i]);
}

double NoiseSpectrum::integrate_impl(const std::function<double(double)>& kernel) const {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < omega_.size(); ++i) {
    const double a = std::max(omega_[i], omega_c_);
    const double b = omega_[i + 1];
    if (b <= a) continue;
    if (density_[i] == 0.0 && density_[i + 1] == 0.0) continue;
    auto f = [&](double u) {
      const double w = std::exp(u);
      return (*this)(w) * kernel(w) * w;
    };
    total += gauss_kronrod<double, 31>::integrate(f, std::log(a), std::log(b), 12, 1e-10);
  }
  return total;
}

double NoiseSpectrum::variance() const {
  return integrate_impl([](double) { return 1.0; });
}

NoiseSpectrum NoiseSpectrum::scaled(double factor) const {
  if (!(factor >= 0.0)) throw InvalidParameter("spectrum scale must be non-negative");
  NoiseSpectrum s = *this;
  for (auto& v : s.density_) v *= factor;
  return s;
}

NoiseSpectrum NoiseSpectrum::lorentzian(double variance, double corner, double omega_c,
                                        double omega_max, int per_decade) {
  if (!(variance >= 0.0) || !(corner > 0.0)) throw InvalidParameter("lorentzian needs variance >= 0, corner > 0");
  auto w = log_grid(omega_c, omega_max, per_decade);
  std::vector<double> s(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) s[i] = 2.0 / kPi * corner / (w[i] * w[i] + corner * corner);
  NoiseSpectrum out(std::move(w), std::move(s), omega_c);
  const double v = out.variance();
  return variance == 0.0 ? out.scaled(0.0) : out.scaled(variance / v);
}

NoiseSpectrum NoiseSpectrum::band_limited(double variance, double lo, double hi, int per_decade) {
  if (!(variance >= 0.0)) throw InvalidParameter("variance must be non-negative");
  auto w = log_grid(lo, hi, per_decade);
  std::vector<double> s(w.size(), variance / (hi - lo));
  NoiseSpectrum out(std::move(w), std::move(s), lo);
  const double v = out.variance();
  return variance == 0.0 ? out : out.scaled(variance / v);
}

NoiseSpectrum NoiseSpectrum::single_tone_peak(double variance, double omega0) {
  if (!(omega0 > 0.0)) throw InvalidParameter("tone frequency must be positive");
  const double lo = omega0 * (1.0 - 1e-3), hi = omega0 * (1.0 + 1e-3);
  std::vector<double> w{lo, omega0, hi};
  std::vector<double> s{0.0, 1.0, 0.0};
  NoiseSpectrum out(std::move(w), std::move(s), lo, true);
  return out.scaled(variance / out.variance());
}

NoiseSpectrum NoiseSpectrum::zero(double omega_c, double omega_max) {
  return NoiseSpectrum({omega_c, omega_max}, {0.0, 0.0}, omega_c);
}

NoiseSpectrum compose_shift_spectrum(const NoiseSpectrum& s_b0, double gradient,
                                     const NoiseSpectrum& s_xi, double xi,
                                     const NoiseSpectrum& s_gradient) {
  std::vector<double> w;
  for (const auto* s : {&s_b0, &s_xi, &s_gradient}) w.insert(w.end(), s->omega().begin(), s->omega().end());
  std::sort(w.begin(), w.end());
  w.erase(std::unique(w.begin(), w.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }),
          w.end());
  std::vector<double> d(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    d[i] = s_b0(w[i]) + gradient * gradient * s_xi(w[i]) + xi * xi * s_gradient(w[i]);
  const double wc = std::min({s_b0.omega_c(), s_xi.omega_c(), s_gradient.omega_c()});
  return NoiseSpectrum(std::move(w), std::move(d), wc,
                       s_b0.single_tone() || s_xi.single_tone() || s_gradient.single_tone());
}

double window_function(double omega, double tau) {
  if (!(tau > 0.0)) throw InvalidParameter("tau must be positive");
  const double x = 0.5 * omega * tau;
  const double sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return tau * sinc * sinc / kPi;
}

double step_size_variance(const NoiseSpectrum& s, double tau, double hbar, double k_unit) {
  if (!(tau > 0.0) || !(hbar > 0.0) || !(k_unit > 0.0))
    throw InvalidParameter("tau, hbar and k_unit must be positive");
  const double v = s.integrate([&](double w) { return kPi * window_function(w, tau) * tau; });
  return v / (hbar * hbar * k_unit * k_unit);
}

double site_peak_width(double beta, int n_sites) {
  if (!(beta > 0.0) || n_sites < 1) throw InvalidParameter("beta and n_sites must be positive");
  return 2.0 / (beta * n_sites);
}

double dephasing_per_step(double var_k, double sigma_k) {
  if (!(sigma_k > 0.0)) throw InvalidParameter("sigma_k must be positive");
  if (!(var_k >= 0.0)) throw InvalidParameter("variance must be non-negative");
  return std::clamp(var_k / (4.0 * sigma_k * sigma_k), 0.0, 1.0);
}

PhaseDephasing shift_phase_variance(const NoiseSpectrum& s, double tau, const PhysicalConstants& c) {
  c.validate();
  if (!(tau > 0.0)) throw InvalidParameter("tau must be positive");
  const double rate = 2.0 * c.bohr_magneton * c.mf_gf / c.hbar;
  PhaseDephasing out;
  out.variance = s.integrate([&](double w) { return kPi * window_function(w, tau) * tau; }) * rate * rate;
  out.coherence = std::exp(-0.5 * out.variance);
  out.coherent_steps = out.variance > 0.0 ? 1.0 / std::sqrt(out.variance)
                                          : std::numeric_limits<double>::infinity();
  return out;
}

double coin_noise_kernel(double r) {
  const double e = r - 1.0;
  if (std::abs(e) < 1e-3) {
    const double p2 = kPi * kPi / 4.0;
    const double p4 = std::pow(kPi, 4) / 192.0;
    return ((1.0 + p2) + p2 * e - p4 * e * e - p4 * e * e * e) / (4.0 + 4.0 * e + e * e);
  }
  const double d = 1.0 - r * r;
  return (1.0 + r * r - 2.0 * r * std::sin(0.5 * kPi * r)) / (d * d);
}

CoinFidelity coin_process_fidelity(const NoiseSpectrum& s, double omega_rabi, const PhysicalConstants& c) {
  c.validate();
  if (!(omega_rabi > 0.0)) throw InvalidParameter("Omega_R must be positive");
  const double a = c.bohr_magneton * c.mf_gf / (c.hbar * omega_rabi);
  const double integral = s.integrate([&](double w) { return coin_noise_kernel(w / omega_rabi); });
  CoinFidelity f;
  f.process_sq = 1.0 - 2.0 * a * a * integral;
  f.average_sq = (1.0 + 2.0 * f.process_sq) / 3.0;
  f.error = 1.0 - f.process_sq;
  return f;
}

MonteCarloResult monte_carlo_noisy_walk(const WalkState& initial, const WalkOperatorSpec& spec,
                                        int steps, const MonteCarloNoise& noise,
                                        const MonteCarloOptions& o) {
  if (o.realizations < 1) throw InvalidParameter("realizations must be >= 1");
  if (steps < 0) throw InvalidParameter("steps must be non-negative");
  if (noise.phase_variance < 0.0 || noise.step_variance < 0.0 || noise.sigma_k < 0.0)
    throw InvalidParameter("noise variances must be non-negative");
  if (noise.step_variance > 0.0 && noise.sigma_k <= 0.0)
    throw InvalidParameter("step-size noise needs sigma_k > 0");
  const int n = initial.geometry.n_sites();
  const int batches = static_cast<int>(std::clamp<long>(o.batches, 1, o.realizations));
  const std::size_t coh_size = static_cast<std::size_t>(n) * n;
  if (o.track_coherence && coh_size * (steps + 1) * batches > 50'000'000)
    throw InvalidParameter("coherence tracking too large; reduce sites, steps or batches");

  const WalkOperator op(initial.geometry, spec);
  const Eigen::Matrix2cd C = op.coin();
  const auto& fwd = op.forward_factors();
  const auto& bwd = op.backward_factors();
  const bool open = spec.boundary == BoundaryMode::open_subregion;

  // Occupied range in unwrapped coordinates relative to site 0.
  int lo0 = n, hi0 = -1;
  for (int i = 0; i < n; ++i)
    if (std::norm(initial.amplitudes(i, 0)) + std::norm(initial.amplitudes(i, 1)) > 0.0) {
      lo0 = std::min(lo0, i);
      hi0 = std::max(hi0, i);
    }
  if (hi0 < 0) throw InvalidParameter("initial walk state is empty");
  const int origin = initial.geometry.origin();

  struct BatchAcc {
    std::vector<double> dist;
    std::vector<double> m1, m2;
    std::vector<cplx> coh;  // (steps+1) x n x n
    long count = 0;
  };
  std::vector<BatchAcc> acc(batches);

  auto run_batch = [&](int b) {
    BatchAcc& A = acc[b];
    A.dist.assign(n, 0.0);
    A.m1.assign(steps + 1, 0.0);
    A.m2.assign(steps + 1, 0.0);
    if (o.track_coherence) A.coh.assign(coh_size * (steps + 1), cplx{});
    const long r0 = o.realizations * b / batches;
    const long r1 = o.realizations * (b + 1) / batches;
    std::vector<cplx> up(n), dn(n), nup(n), ndn(n);
    for (long r = r0; r < r1; ++r) {
      std::seed_seq seq{static_cast<std::uint32_t>(o.seed), static_cast<std::uint32_t>(o.seed >> 32),
                        static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> gauss(0.0, 1.0);
      const double x0 = noise.sigma_k > 0.0 ? gauss(rng) / (2.0 * kPi * noise.sigma_k) : 0.0;
      const double sd_phi = std::sqrt(noise.phase_variance);
      const double sd_k = std::sqrt(noise.step_variance);
      for (int i = 0; i < n; ++i) {
        up[i] = initial.amplitudes(i, 0);
        dn[i] = initial.amplitudes(i, 1);
      }
      std::fill(nup.begin(), nup.end(), cplx{});
      std::fill(ndn.begin(), ndn.end(), cplx{});
      int lo = lo0, hi = hi0;

      auto record = [&](int j) {
        double s1 = 0.0, s2 = 0.0;
        for (int p = lo; p <= hi; ++p) {
          const int i = initial.geometry.wrap(p);
          const double w = std::norm(up[i]) + std::norm(dn[i]);
          const double d = p - origin;
          s1 += d * w;
          s2 += d * d * w;
        }
        A.m1[j] += s1;
        A.m2[j] += s2;
        if (o.track_coherence) {
          cplx* M = A.coh.data() + coh_size * j;
          for (int a = 0; a < n; ++a) {
            if (up[a] == cplx{}) continue;
            for (int c = 0; c < n; ++c) M[a * n + c] += up[a] * std::conj(dn[c]);
          }
        }
      };
      record(0);
      for (int j = 1; j <= steps; ++j) {
        const bool full = hi - lo + 3 > n;
        const int nlo = full ? 0 : lo - 1, nhi = full ? n - 1 : hi + 1;
        for (int p = nlo; p <= nhi; ++p) {
          const int i = initial.geometry.wrap(p);
          nup[i] = 0.0;
          ndn[i] = 0.0;
        }
        for (int p = lo; p <= hi; ++p) {
          const int i = initial.geometry.wrap(p);
          const cplx u = C(0, 0) * up[i] + C(0, 1) * dn[i];
          const cplx d = C(1, 0) * up[i] + C(1, 1) * dn[i];
          if (open && ((i + 1 == n && u != cplx{}) || (i == 0 && d != cplx{})))
            throw BoundaryViolation("noisy walker reached the zone edge in open-subregion mode");
          nup[i + 1 == n ? 0 : i + 1] += fwd[i] * u;
          ndn[i == 0 ? n - 1 : i - 1] += bwd[i] * d;
        }
        up.swap(nup);
        dn.swap(ndn);
        if (full) {
          lo = 0;
          hi = n - 1;
        } else {
          lo = nlo;
          hi = nhi;
        }
        const double dphi = sd_phi > 0.0 ? sd_phi * gauss(rng) : 0.0;
        const double dk = sd_k > 0.0 ? sd_k * gauss(rng) : 0.0;
        if (dphi != 0.0 || dk != 0.0) {
          const cplx fu = std::exp(I * (dphi + kPi * dk * x0));
          const cplx fd = std::exp(-I * (kPi * dk * x0));
          for (int p = lo; p <= hi; ++p) {
            const int i = initial.geometry.wrap(p);
            up[i] *= fu;
            dn[i] *= fd;
          }
        }
        record(j);
      }
      for (int i = 0; i < n; ++i) A.dist[i] += std::norm(up[i]) + std::norm(dn[i]);
      ++A.count;
    }
  };

  const int threads = std::max(1, std::min(o.threads, batches));
  if (threads == 1) {
    for (int b = 0; b < batches; ++b) run_batch(b);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (int b = next++; b < batches; b = next++) run_batch(b);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  MonteCarloResult res;
  const double R = static_cast<double>(o.realizations);
  res.distribution.assign(n, 0.0);
  res.site_variance.assign(steps + 1, 0.0);
  std::vector<double> m1(steps + 1, 0.0), m2(steps + 1, 0.0);
  for (const auto& A : acc) {
    for (int i = 0; i < n; ++i) res.distribution[i] += A.dist[i] / R;
    for (int j = 0; j <= steps; ++j) {
      m1[j] += A.m1[j] / R;
      m2[j] += A.m2[j] / R;
    }
  }
  for (int j = 0; j <= steps; ++j) res.site_variance[j] = m2[j] - m1[j] * m1[j];

  if (o.track_coherence) {
    res.coherence.assign(steps + 1, 0.0);
    res.coherence_error.assign(steps + 1, 0.0);
    std::vector<double> batch_norm(batches);
    double ref = 0.0;
    for (int j = 0; j <= steps; ++j) {
      double full = 0.0;
      for (std::size_t e = 0; e < coh_size; ++e) {
        cplx s = 0.0;
        for (const auto& A : acc) s += A.coh[coh_size * j + e];
        full += std::norm(s / R);
      }
      for (int b = 0; b < batches; ++b) {
        double nb = 0.0;
        for (std::size_t e = 0; e < coh_size; ++e)
          nb += std::norm(acc[b].coh[coh_size * j + e] / static_cast<double>(acc[b].count));
        batch_norm[b] = std::sqrt(nb);
      }
      const double value = std::sqrt(full);
      if (j == 0) ref = value;
      double mean = 0.0, var = 0.0;
      for (double v : batch_norm) mean += v / batches;
      for (double v : batch_norm) var += (v - mean) * (v - mean);
      var = batches > 1 ? var / (batches - 1) : 0.0;
      res.coherence[j] = ref > 0.0 ? value / ref : 0.0;
      res.coherence_error[j] = ref > 0.0 ? std::sqrt(var / batches) / ref : 0.0;
    }
  }
  return res;
}

}  // namespace bzwalk
