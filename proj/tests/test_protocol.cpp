#include <doctest.h>

#include <cmath>

#include "bzwalk/error.hpp"
#include "bzwalk/observables.hpp"
#include "bzwalk/protocol.hpp"
#include "oracles/free_particle.hpp"

using namespace bzwalk;

namespace {

SpinorField gaussian(const Grid& g, double sigma, double kappa0) {
  SpinorField s(g);
  for (std::size_t i = 0; i < g.size(); ++i) s.psi1[i] = oracle::free_gaussian(g.x(i), 0.0, sigma, kappa0);
  s.normalize();
  return s;
}

}  // namespace

TEST_CASE("delta-kick cooling with zero durations is the identity") {
  const Grid g(256, 64.0);
  const auto s = gaussian(g, 3.0, 0.2);
  const auto out = delta_kick_cool(s, 0.01, 0.0, 0.0);
  const auto a = moments(s), b = moments(out);
  CHECK(b.k_rms == doctest::Approx(a.k_rms).epsilon(1e-10));
  CHECK(b.x_rms == doctest::Approx(a.x_rms).epsilon(1e-10));
  CHECK_THROWS_AS(delta_kick_cool(s, 0.01, -1.0, 0.0), InvalidParameter);
}

TEST_CASE("lens kick removes the position-momentum correlation") {
  const double w = 0.005;
  const Grid g(4096, 1024.0);
  DriveSchedule trap;
  trap.omega = Ramp(w);
  GroundStateOptions o;
  o.dtau = 0.5;
  o.initial_guess = gaussian(g, std::sqrt(oracle::oscillator_length_sq(w) / 2.0), 0.0).psi1;
  const auto gs = ground_state_imaginary_time(g, trap, 0.0, o).state;
  const double k_ground = moments(gs).k_rms;
  const double t_exp = std::sqrt(8.0) / w;
  const auto expanded = delta_kick_cool(gs, w, t_exp, 0.0);
  CHECK(moments(expanded).xk_cov > 0.0);
  const double tk = lens_kick_duration(expanded, w);
  CHECK(tk > 0.0);
  CHECK(tk < 0.5 * kPi / w);
  const auto cooled = delta_kick_cool(gs, w, t_exp, -1.0);
  const auto m = moments(cooled);
  CHECK(std::abs(m.xk_cov) < 1e-3 * m.x_rms * m.k_rms);
  // free expansion by t multiplies the width by sqrt(1 + (w t)^2) = 3 for a trap
  // ground state; the lens then divides the momentum spread by the same factor
  CHECK(m.k_rms == doctest::Approx(k_ground / 3.0).epsilon(1e-3));
  for (double f : {0.9, 1.1}) CHECK(moments(delta_kick_cool(gs, w, t_exp, f * tk)).k_rms > m.k_rms);
}

TEST_CASE("quarter period maps momentum onto position") {
  const double w = 0.005;
  const Grid g(4096, 512.0);
  const double k0 = 0.3, sigma = 8.0;
  const auto s = gaussian(g, sigma, kPi * k0);
  const auto mapped = quarter_period_map(s, w, 4096, 0.05);
  double sum = 0.0, mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < mapped.k.size(); ++i) {
    sum += mapped.weight[i];
    mean += mapped.weight[i] * mapped.k[i];
  }
  mean /= sum;
  for (std::size_t i = 0; i < mapped.k.size(); ++i) var += mapped.weight[i] * std::pow(mapped.k[i] - mean, 2);
  var /= sum;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(k0).epsilon(1e-4));
  CHECK(std::sqrt(var) == doctest::Approx(1.0 / (2.0 * kPi * sigma)).epsilon(1e-3));
}

TEST_CASE("protocol configuration checks") {
  ProtocolConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_sites = 21;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = {};
  c.lattice.tau0 = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = {};
  c.readout_points = 1024;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = {};
  c.lattice.omega_x = 0.0;
  c.lattice.omega_r = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
}

TEST_CASE("protocol without walk steps returns to the origin") {
  ProtocolConfig c;
  c.steps = 0;
  const auto r = run_protocol(c);
  const WalkGeometry g(20, 0);
  CHECK(r.final_distribution.probability[g.origin()] > 0.98);
  CHECK(r.tv_plain < 0.02);
  CHECK(r.band0_after_ramp_up > 0.999);
  CHECK(r.spatial_freeze == 0.0);
  CHECK(r.stages.front().name == "ground_state");
  CHECK(r.stages.back().name == "quarter_period");
  for (const auto& st : r.stages) CHECK(st.norm == doctest::Approx(1.0).epsilon(1e-9));
  // the force integral over ramp-up is one full zone sweep
  CHECK(0.5 * c.lattice.F0 * r.force_ramp_time + c.lattice.F0 * r.force_hold_time ==
        doctest::Approx(2.0 * kPi));
}

TEST_CASE("interaction widens or narrows the initial peak") {
  NonlinearWalkConfig c;
  c.omega = 2.0 * kPi * 10.0 / recoil_frequency(532e-9, PhysicalConstants{});
  c.steps = 0;
  const PhysicalConstants pc;
  const double g100 = g1d_rescaled(5.3e-9, 2.0 * kPi * 100.0, 100.0, 532e-9, pc);
  const auto linear = run_nonlinear_walk(c, 0.0);
  const auto n100 = run_nonlinear_walk(c, g100);
  const auto n200 = run_nonlinear_walk(c, 2.0 * g100);
  CHECK(n100.initial_width < linear.initial_width);
  CHECK(n200.initial_width < n100.initial_width);
  CHECK(n200.chemical_potential > n100.chemical_potential);
  NonlinearWalkConfig no_trap;
  CHECK_THROWS_AS(run_nonlinear_walk(no_trap, 0.0), InvalidParameter);
}
