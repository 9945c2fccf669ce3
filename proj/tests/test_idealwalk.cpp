#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bzwalk/band.hpp"
#include "bzwalk/error.hpp"
#include "bzwalk/idealwalk.hpp"
#include "bzwalk/observables.hpp"
#include "oracles/dense_walk.hpp"

using namespace bzwalk;

namespace {

Eigen::VectorXcd flatten(const WalkState& s) {
  const int n = s.geometry.n_sites();
  Eigen::VectorXcd v(2 * n);
  for (int i = 0; i < n; ++i) {
    v[2 * i] = s.amplitudes(i, 0);
    v[2 * i + 1] = s.amplitudes(i, 1);
  }
  return v;
}

WalkState random_state(const WalkGeometry& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  WalkState s(g);
  for (int i = 0; i < g.n_sites(); ++i)
    for (int c = 0; c < 2; ++c) s.amplitudes(i, c) = cplx(nd(rng), nd(rng));
  s.amplitudes /= std::sqrt(s.norm());
  return s;
}

PeierlsTable random_table(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::vector<double> p(n), m(n);
  for (int i = 0; i < n; ++i) {
    p[i] = u(rng);
    m[i] = u(rng);
  }
  return PeierlsTable::from_totals(p, m);
}

}  // namespace

TEST_CASE("walk matches the dense oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  double worst = 0.0;
  for (int n : {2, 4, 6, 10, 20, 32}) {
    for (int trial = 0; trial < 3; ++trial) {
      const WalkGeometry g(n, 0);
      WalkOperatorSpec spec;
      spec.alpha = u(rng);
      spec.coin_phase = u(rng);
      spec.phases = random_table(n, rng);
      spec.twist = u(rng);
      const Eigen::MatrixXcd W = oracle::dense_walk_matrix(
          n, spec.alpha, spec.coin_phase, spec.phases->phi_plus(), spec.phases->phi_minus(), spec.twist);
      const WalkState init = random_state(g, rng);
      Eigen::VectorXcd v = flatten(init);
      for (int j : {1, 7, 64}) {
        Eigen::VectorXcd ref = v;
        for (int s = 0; s < j; ++s) ref = W * ref;
        const auto out = walk_evolve(init, spec, j);
        worst = std::max(worst, (flatten(out) - ref).cwiseAbs().maxCoeff());
      }
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("walk operator is unitary") {
  std::mt19937_64 rng(11);
  const int n = 24;
  const WalkGeometry g(n, 0);
  WalkOperatorSpec spec;
  spec.alpha = 1.1;
  spec.coin_phase = 0.4;
  spec.phases = random_table(n, rng);
  spec.twist = 0.9;
  const WalkOperator op(g, spec);
  Eigen::MatrixXcd U(2 * n, 2 * n);
  Eigen::MatrixXcd scratch;
  for (int col = 0; col < 2 * n; ++col) {
    WalkState e(g);
    e.amplitudes(col / 2, col % 2) = 1.0;
    op.apply(e.amplitudes, scratch);
    U.col(col) = flatten(e);
  }
  CHECK((U.adjoint() * U - Eigen::MatrixXcd::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("norm is conserved over long walks") {
  std::mt19937_64 rng(3);
  const WalkGeometry g(40, 2000);
  WalkOperatorSpec spec;
  spec.phases = random_table(40, rng);
  spec.twist = 2.0;
  const auto out = walk_evolve(WalkState::symmetric(g), spec, 2000);
  CHECK(std::abs(out.norm() - 1.0) < 1e-12);
}

TEST_CASE("coin matrix") {
  const auto u = coin_matrix(kPi / 2.0, 0.0);
  CHECK((u.adjoint() * u - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(std::abs(u(0, 0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(u(1, 0) - cplx(0.0, 1.0 / std::sqrt(2.0))) < 1e-15);
  CHECK((coin_matrix(0.0, 1.3) - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::Vector2cd sym(1.0, 1.0);
  const Eigen::Vector2cd out = u * sym;
  CHECK(std::abs(out[0] - out[1]) < 1e-15);
}

TEST_CASE("zero coin angle translates the spin components") {
  const WalkGeometry g(20, 3);
  WalkOperatorSpec spec;
  spec.alpha = 0.0;
  const auto out = walk_evolve(WalkState::localized(g, 5, 0.6, 0.8), spec, 3);
  CHECK(std::abs(out.amplitudes(8, 0) - 0.6) < 1e-15);
  CHECK(std::abs(out.amplitudes(2, 1) - 0.8) < 1e-15);
  CHECK(walk_evolve(WalkState::symmetric(g), spec, 0).amplitudes == WalkState::symmetric(g).amplitudes);
}

TEST_CASE("symmetric start gives a mirror-symmetric distribution") {
  const WalkGeometry g(80, 30);
  const auto p = walk_evolve(WalkState::symmetric(g), WalkOperatorSpec{}, 30).probabilities();
  const int o = g.origin();
  for (int d = 1; d <= 30; ++d) CHECK(p[o + d] == doctest::Approx(p[o - d]).epsilon(1e-12));
}

TEST_CASE("Hadamard-type walk after a few steps") {
  // two steps from (1,1)/sqrt(2) computed by hand: 1/4, 1/2, 1/4 at sites -2, 0, +2
  const WalkGeometry g(10, 2);
  const auto p = walk_evolve(WalkState::symmetric(g), WalkOperatorSpec{}, 2).probabilities();
  const int o = g.origin();
  CHECK(p[o - 2] == doctest::Approx(0.25));
  CHECK(p[o] == doctest::Approx(0.5));
  CHECK(p[o + 2] == doctest::Approx(0.25));
}

TEST_CASE("unnormalized input and wrong tables are rejected") {
  const WalkGeometry g(10, 2);
  WalkState s(g);
  CHECK_THROWS_AS(walk_evolve(s, WalkOperatorSpec{}, 1), InvalidParameter);
  WalkOperatorSpec spec;
  spec.phases = PeierlsTable::zero(12);
  CHECK_THROWS_AS(walk_evolve(WalkState::symmetric(g), spec, 1), InvalidParameter);
  CHECK_THROWS_AS(WalkState::localized(g, 10, 1.0, 0.0), InvalidParameter);
}

TEST_CASE("open subregion stops at the zone edge") {
  const WalkGeometry g(20, 10);
  WalkOperatorSpec spec;
  spec.boundary = BoundaryMode::open_subregion;
  CHECK_NOTHROW(walk_evolve(WalkState::symmetric(g), spec, 9));
  CHECK_THROWS_AS(walk_evolve(WalkState::symmetric(g), spec, 11), BoundaryViolation);
  spec.open_first = 5;
  spec.open_last = 14;
  CHECK_NOTHROW(walk_evolve(WalkState::symmetric(g), spec, 4));
  CHECK_THROWS_AS(walk_evolve(WalkState::symmetric(g), spec, 6), BoundaryViolation);
}

TEST_CASE("gauge reduction of removable tables") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  const int n = 16;
  // phi_+(i) = chi(i+1) - chi(i) + gamma, phi_-(i+1) = chi(i) - chi(i+1) + gamma
  std::vector<double> chi(n + 1), p(n), m(n);
  for (auto& c : chi) c = u(rng);
  chi[n] = chi[0] + 0.8;  // leaves a loop phase of 0.8
  const double gamma = 0.3;
  for (int i = 0; i < n; ++i) {
    p[i] = wrap_phase(chi[i + 1] - chi[i] + gamma);
    m[(i + 1) % n] = wrap_phase(chi[i] - chi[i + 1] + gamma);
  }
  const auto t = PeierlsTable::from_totals(p, m);
  const auto r = gauge_reduce(t);
  CHECK(r.removable);
  CHECK_FALSE(r.globally_removable);
  CHECK(r.gamma == doctest::Approx(gamma));
  CHECK(r.twist == doctest::Approx(0.8));

  const WalkGeometry g(n, 40);
  WalkOperatorSpec full, reduced;
  full.phases = t;
  reduced.phases = r.residual_table;
  reduced.twist = r.twist;
  const auto a = walk_evolve(WalkState::symmetric(g), full, 40);
  const auto b = walk_evolve(WalkState::symmetric(g), reduced, 40);
  CHECK(total_variation(a.probabilities(), b.probabilities()) < 1e-12);
}

TEST_CASE("gauge reduction keeps non-removable parts") {
  std::mt19937_64 rng(9);
  const auto t = random_table(12, rng);
  const auto r = gauge_reduce(t);
  CHECK_FALSE(r.removable);
  const WalkGeometry g(12, 30);
  WalkOperatorSpec full, reduced;
  full.phases = t;
  reduced.phases = r.residual_table;
  reduced.twist = r.twist;
  const auto a = walk_evolve(WalkState::symmetric(g), full, 30);
  const auto b = walk_evolve(WalkState::symmetric(g), reduced, 30);
  // equal up to site-local gauge phases, which are shared by both spins
  CHECK((a.amplitudes.cwiseAbs() - b.amplitudes.cwiseAbs()).maxCoeff() < 1e-12);
  CHECK((a.amplitudes.cwiseAbs() - b.amplitudes.cwiseAbs()).minCoeff() > -1e-12);
  for (int i = 0; i < 12; ++i) {
    if (std::abs(a.amplitudes(i, 0)) < 1e-6 || std::abs(a.amplitudes(i, 1)) < 1e-6) continue;
    const cplx ra = a.amplitudes(i, 0) / a.amplitudes(i, 1);
    const cplx rb = b.amplitudes(i, 0) / b.amplitudes(i, 1);
    CHECK(std::abs(ra - rb) < 1e-9 * std::abs(ra));
  }
}

TEST_CASE("twist: invisible inside the zone, visible after wrapping") {
  const WalkGeometry g(20, 0);
  auto dist = [&](double twist, int j) {
    WalkOperatorSpec s;
    s.twist = twist;
    return walk_evolve(WalkState::symmetric(g), s, j).probabilities();
  };
  for (int j = 0; j <= 10; ++j) CHECK(total_variation(dist(0.0, j), dist(1.7, j)) < 1e-14);
  CHECK(total_variation(dist(0.0, 16), dist(1.7, 16)) > 1e-3);
}

TEST_CASE("Zeeman loop phase equals the twist formula") {
  const WalkGeometry g(20, 10);
  const double F0 = 0.2, tau0 = kPi / 2.0;
  for (double x_bar : {0.0, 0.1, -0.35, 2.0}) {
    const auto t = peierls_phases(BandData::flat(0.0), g, F0, tau0, x_bar);
    const auto r = gauge_reduce(t);
    CHECK(r.removable);
    CHECK(wrap_phase(r.twist - twist_phase(g, x_bar, 0.0)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(wrap_phase(twist_phase(g, x_bar, 0.0) + 2.0 * kPi * x_bar) == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(twist_phase(g, 0.0, 0.4) == doctest::Approx(0.4));
}

TEST_CASE("small coin angles follow the Dirac equation") {
  const int n = 400;
  const int steps = 100;
  const double alpha = 0.05, F0 = 0.2;
  const WalkGeometry g(n, steps);
  const double tau0 = kPi * g.delta_k0() / F0;
  WalkState w(g);
  DiracState d;
  d.up.resize(n);
  d.down.resize(n);
  const double sigma = 0.05;
  for (int i = 0; i < n; ++i) {
    const double k = g.site_k(i);
    CHECK(DiracState::k_of(i, n) == doctest::Approx(k));
    const double a = std::exp(-k * k / (4.0 * sigma * sigma));
    w.amplitudes(i, 0) = a;
    d.up[i] = a;
  }
  const double norm = std::sqrt(w.norm());
  w.amplitudes /= norm;
  for (auto& v : d.up) v /= norm;

  WalkOperatorSpec spec;
  spec.alpha = alpha;
  const auto wo = walk_evolve(w, spec, steps);
  const auto dout = dirac_propagate(d, F0, -alpha / tau0, steps * tau0, 4 * steps);
  CHECK(std::abs(dout.norm() - 1.0) < 1e-12);
  std::vector<double> pd(n), pu_w(n), pu_d(n);
  for (int i = 0; i < n; ++i) {
    pu_w[i] = std::norm(wo.amplitudes(i, 0));
    pu_d[i] = std::norm(dout.up[i]);
  }
  // spin-resolved distributions agree to the splitting error
  CHECK(total_variation(pu_w, pu_d) < 0.01);
  CHECK(total_variation(wo.probabilities(), [&] {
          for (int i = 0; i < n; ++i) pd[i] = std::norm(dout.up[i]) + std::norm(dout.down[i]);
          return pd;
        }()) < 0.01);
}
