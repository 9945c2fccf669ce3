#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "bzwalk/band.hpp"
#include "bzwalk/error.hpp"
#include "bzwalk/observables.hpp"
#include "oracles/free_particle.hpp"

using namespace bzwalk;

namespace {

SpinorField gaussian(const Grid& g, double sigma, double kappa0) {
  SpinorField s(g);
  for (std::size_t i = 0; i < g.size(); ++i) s.psi1[i] = oracle::free_gaussian(g.x(i), 0.0, sigma, kappa0);
  s.normalize();
  return s;
}

// Lowest-band Bloch wave at k0 under a Gaussian envelope of rms width sigma.
SpinorField bloch_packet(const Grid& g, double V0, double k0, double sigma) {
  const int m_max = 16;
  const auto u = bloch_vector(k0, V0, m_max, 0);
  SpinorField s(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    cplx v = 0.0;
    for (int m = -m_max; m <= m_max; ++m) v += u[m + m_max] * std::exp(cplx(0.0, kPi * (k0 + 2.0 * m) * x));
    s.psi1[i] = v * std::exp(-x * x / (4.0 * sigma * sigma));
  }
  s.normalize();
  return s;
}

}  // namespace

TEST_CASE("Gaussian bin probabilities against the error function") {
  const Grid g(2048, 256.0);
  const double sigma = 2.0, k0 = 0.13;
  const auto s = gaussian(g, sigma, kPi * k0);
  const WalkGeometry geom(20, 0);
  const auto d = site_distribution(s, geom);
  // |psi(k)|^2 is normal with rms 1/(2 pi sigma) in k_R
  const double sk = 1.0 / (2.0 * kPi * sigma);
  double worst = 0.0;
  for (int i = 0; i < geom.n_sites(); ++i) {
    double p = 0.0;
    for (int m = -2; m <= 2; ++m) {
      const double a = geom.site_k(i) - 0.05 + 2.0 * m, b = a + 0.1;
      p += 0.5 * (std::erf((b - k0) / (std::sqrt(2.0) * sk)) - std::erf((a - k0) / (std::sqrt(2.0) * sk)));
    }
    worst = std::max(worst, std::abs(d.probability[i] - p));
  }
  CHECK(worst < 1e-10);
  CHECK(std::abs(d.residual) < 1e-10);
}

TEST_CASE("a Bloch wave lands in a single site") {
  const Grid g(4096, 256.0);
  const WalkGeometry geom(20, 0);
  for (int site : {geom.origin(), 3, 19}) {
    const auto s = bloch_packet(g, 20.0, geom.site_k(site), 20.0);
    const auto d = site_distribution(s, geom);
    CAPTURE(site);
    CHECK(d.probability[site] > 1.0 - 1e-6);
  }
}

TEST_CASE("binning does not depend on zero padding") {
  const Grid g(1024, 128.0);
  const auto s = bloch_packet(g, 10.0, 0.27, 6.0);
  const WalkGeometry geom(20, 0);
  const auto a = site_distribution(s, geom);
  const auto b = site_distribution(embed(s, 4096), geom);
  CHECK(total_variation(a, b) < 1e-12);
}

TEST_CASE("bins narrower than the grid resolution are rejected") {
  const Grid g(64, 8.0);
  CHECK_THROWS_AS(site_distribution(gaussian(g, 1.0, 0.0), WalkGeometry(20, 0)), InvalidParameter);
}

TEST_CASE("uniform samples bin to a flat distribution") {
  const WalkGeometry geom(20, 0);
  std::vector<double> k, w;
  const int per = 50;
  for (int i = 0; i < 20 * per; ++i) {
    k.push_back(-1.0 + (i + 0.5) * 2.0 / (20 * per));
    w.push_back(1.0 / (20 * per));
  }
  const auto d = bin_samples(k, w, geom);
  for (double p : d.probability) CHECK(p == doctest::Approx(1.0 / 20).epsilon(1e-9));
  // folding: k + 2 lands in the same bin
  for (auto& v : k) v += 2.0;
  CHECK(total_variation(bin_samples(k, w, geom), d) < 1e-12);
}

TEST_CASE("total variation and fidelity") {
  CHECK(total_variation(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 1.0);
  CHECK_THROWS_AS(total_variation(std::vector<double>{1}, std::vector<double>{0, 1}), InvalidParameter);
  const WalkGeometry g(10, 1);
  const auto a = WalkState::symmetric(g);
  auto b = a;
  b.amplitudes *= std::exp(cplx(0.0, 0.7));
  CHECK(walk_fidelity(a, b) == doctest::Approx(1.0));
  const auto c = WalkState::localized(g, 2, 1.0, 0.0);
  CHECK(walk_fidelity(a, c) == 0.0);
  const auto d = WalkState::localized(g, g.origin(), 1.0, 0.0);
  CHECK(walk_fidelity(a, d) == doctest::Approx(0.5));
  CHECK(walk_fidelity(d, a) == doctest::Approx(0.5));
}

TEST_CASE("infidelity curve controls") {
  InfidelityOptions o;
  o.flat_band = true;
  const auto flat = infidelity_curve({10.0, 40.0}, {0, 10, 2000}, o);
  for (const auto& p : flat) CHECK(p.infidelity < 1e-12);
  o.flat_band = false;
  o.n_k = 128;
  const auto zero_steps = infidelity_curve({20.0}, {0}, o);
  CHECK(zero_steps[0].infidelity < 1e-15);
  CHECK_THROWS_AS(infidelity_curve({20.0}, {-1}, o), InvalidParameter);
}

TEST_CASE("infidelity converges in the band sampling") {
  InfidelityOptions a, b;
  a.n_k = 256;
  b.n_k = 512;
  const double fa = infidelity_curve({20.0}, {200}, a)[0].infidelity;
  const double fb = infidelity_curve({20.0}, {200}, b)[0].infidelity;
  CHECK(fb > 0.0);
  CHECK(std::abs(fa - fb) < 0.1 * fb);
}

TEST_CASE("infidelity drops with lattice depth") {
  InfidelityOptions o;
  const auto c = infidelity_curve({20.0, 30.0, 40.0}, {1000}, o);
  CHECK(c[0].infidelity > c[1].infidelity);
  CHECK(c[1].infidelity > c[2].infidelity);
}

TEST_CASE("Zeeman overlap") {
  const auto none = zeeman_overlap(20.0, 0.0);
  CHECK(none.deviation == 0.0);
  CHECK(none.overlap_sq == 1.0);
  CHECK_THROWS_AS(zeeman_overlap(2.0, 0.2), InvalidParameter);
  const auto weak = zeeman_overlap(20.0, 0.2);
  const auto strong = zeeman_overlap(20.0, 2.0);
  CHECK(weak.deviation > 0.0);
  CHECK(strong.deviation > 10.0 * weak.deviation);
  CHECK(weak.trap_shift_estimate == doctest::Approx(0.2 / (kPi * kPi * 20.0)));
}

TEST_CASE("spatial freeze metric") {
  const Grid g(256, 32.0);
  const auto s = gaussian(g, 2.0, 0.0);
  CHECK(spatial_freeze_metric({s, s, s}) == 0.0);
  auto shifted = s;
  std::rotate(shifted.psi1.begin(), shifted.psi1.begin() + 128, shifted.psi1.end());
  CHECK(spatial_freeze_metric({s, shifted}) > 0.99);
  CHECK_THROWS_AS(spatial_freeze_metric({s}), InvalidParameter);
}

TEST_CASE("band populations") {
  const Grid g(4096, 256.0);
  // an unmodulated Bloch wave is entirely in the lowest band
  const auto wave = bloch_packet(g, 20.0, 2.0 * 3.0 / g.length(), 1e9);
  const auto exact = band_populations(wave, 20.0, 2);
  CHECK(exact[0] > 1.0 - 1e-12);
  // an envelope admixes other bands at second order in its momentum width
  const auto s = bloch_packet(g, 20.0, 0.0, 20.0);
  const auto pop = band_populations(s, 20.0, 2);
  CHECK(pop[0] > 1.0 - 1e-4);
  CHECK(std::accumulate(pop.begin(), pop.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
  const auto plane = gaussian(g, 20.0, 0.0);
  const auto free_pop = band_populations(plane, 0.0, 1);
  CHECK(free_pop[0] > 1.0 - 1e-8);
  CHECK_THROWS_AS(band_populations(gaussian(Grid(256, 25.0), 2.0, 0.0), 20.0, 1), InvalidParameter);
}

TEST_CASE("moments of a moving Gaussian") {
  const Grid g(1024, 128.0);
  const double sigma = 3.0, kappa0 = 0.4 * kPi;
  const auto s = gaussian(g, sigma, kappa0);
  const auto m = moments(s);
  CHECK(m.norm == doctest::Approx(1.0));
  CHECK(std::abs(m.x_mean) < 1e-12);
  CHECK(m.x_rms == doctest::Approx(sigma).epsilon(1e-10));
  CHECK(m.k_mean == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(m.k_rms == doctest::Approx(1.0 / (2.0 * kPi * sigma)).epsilon(1e-10));
  CHECK(std::abs(m.xk_cov) < 1e-12);
}

TEST_CASE("momentum density is normalized") {
  const Grid g(512, 64.0);
  const auto s = gaussian(g, 2.0, 1.0);
  const auto md = momentum_density(s);
  const double dk = 2.0 / g.length();
  CHECK(std::accumulate(md.density.begin(), md.density.end(), 0.0) * dk == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::is_sorted(md.k.begin(), md.k.end()));
}
