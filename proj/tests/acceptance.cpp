// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bzwalk/band.hpp"
#include "bzwalk/decoherence.hpp"
#include "bzwalk/idealwalk.hpp"
#include "bzwalk/observables.hpp"
#include "bzwalk/propagator.hpp"
#include "bzwalk/protocol.hpp"
#include "bzwalk/units.hpp"
#include "oracles/dense_walk.hpp"

using namespace bzwalk;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [failed]");
  }
};

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1: infidelity curve
void fig2(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> V0s;
  for (double v = 20.0; v <= 50.0 + 1e-9; v += 2.5) V0s.push_back(v);
  const auto curve = infidelity_curve(V0s, {2000});
  const double secs = seconds_since(t0);
  double at40 = -1.0;
  bool monotone = true;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].V0 == 40.0) at40 = curve[i].infidelity;
    if (i > 0 && !(curve[i].infidelity < curve[i - 1].infidelity)) monotone = false;
  }
  o.require(at40 >= 0.0 && at40 < 1e-5, "1-F(V0=40, j=2000) = " + fmt(at40) + " < 1e-5");
  o.require(monotone, "monotone decreasing over V0 = 20..50");
  o.require(secs < 300.0, "runtime " + fmt(secs, "%.1f") + " s < 300 s");
}

// ---- 2, 3: continuum protocol
void protocol_deep(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  ProtocolConfig c;
  c.lattice.V0 = 20.0;
  const auto r = run_protocol(c);
  const double secs = seconds_since(t0);
  o.require(r.tv_plain < 0.05, "TV(protocol, Hadamard reference) = " + fmt(r.tv_plain) + " < 0.05");
  o.require(secs < 600.0, "runtime " + fmt(secs, "%.1f") + " s < 600 s");
}

void protocol_shallow(Outcome& o) {
  set_warning_handler([](const std::string&) {});
  ProtocolConfig c;
  c.lattice.V0 = 2.0;
  const auto r = run_protocol(c);
  set_warning_handler(nullptr);
  o.require(r.tv_dynamical < 0.05, "TV with dynamical phases = " + fmt(r.tv_dynamical) + " < 0.05");
  o.require(r.tv_plain >= 0.05, "TV without = " + fmt(r.tv_plain) + " >= 0.05");
}

// ---- 4: Zeeman overlaps
void zeeman(Outcome& o) {
  for (auto [F0, expect] : {std::pair{0.2, 4e-5}, std::pair{2.0, 3e-3}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto z = zeeman_overlap(20.0, F0);
    const double secs = seconds_since(t0);
    const double ratio = z.deviation / expect;
    o.require(ratio >= 0.5 && ratio <= 2.0,
              "F0=" + fmt(F0) + ": 1-|I|^2 = " + fmt(z.deviation) + " vs " + fmt(expect));
    o.require(secs < 60.0, "runtime " + fmt(secs, "%.2f") + " s");
  }
}

// ---- 5: noise budget numbers
void appendix(Outcome& o) {
  const PhysicalConstants pc;
  const double tau = 100e-6;
  const double wc = 2.0 * kPi * 0.01, wmax = 2.0 * kPi * 1e6;
  const double corner = 2.0 * kPi * 10.0;
  const int n = 20;
  const double dk0 = 2.0 / n;

  // (a) relative gradient noise 0.4%; beta chosen so that the quoted bound is p = 1e-5
  auto t0 = std::chrono::steady_clock::now();
  const double rel = 0.004;
  const double beta = 2.0 * std::sqrt(1e-5 / (rel * rel));
  const auto s_force = NoiseSpectrum::lorentzian(rel * rel, corner, wc, wmax);
  const double var_k = step_size_variance(s_force, tau) * (dk0 / tau) * (dk0 / tau);
  const double p = dephasing_per_step(var_k, site_peak_width(beta, n));
  double secs = seconds_since(t0);
  o.require(std::abs(p / 1e-5 - 1.0) < 0.05, "(a) p = " + fmt(p) + " at beta = " + fmt(beta, "%.4f"));
  o.require(secs < 1.0, "(a) " + fmt(secs, "%.3f") + " s");

  // (b) 1 uG rms of B' x_bar
  t0 = std::chrono::steady_clock::now();
  const auto s_shift = NoiseSpectrum::lorentzian(1e-20, corner, wc, wmax);
  const auto ph = shift_phase_variance(s_shift, tau, pc);
  secs = seconds_since(t0);
  o.require(ph.coherent_steps >= 500.0 && ph.coherent_steps <= 2000.0,
            "(b) coherent steps = " + fmt(ph.coherent_steps, "%.0f"));
  o.require(secs < 1.0, "(b) " + fmt(secs, "%.3f") + " s");

  // (c) coin error at Omega_R = 2 pi x 200 kHz
  t0 = std::chrono::steady_clock::now();
  const auto cf = coin_process_fidelity(s_shift, 2.0 * kPi * 200e3, pc);
  secs = seconds_since(t0);
  o.require(cf.error <= 1e-10, "(c) coin error = " + fmt(cf.error));
  o.require(secs < 1.0, "(c) " + fmt(secs, "%.3f") + " s");

  // (d) kernel integral
  t0 = std::chrono::steady_clock::now();
  const double R = 4000.0;
  const double area = simpson(coin_noise_kernel, 0.0, R, 4000000) + 1.0 / R;
  secs = seconds_since(t0);
  o.require(std::abs(area - kPi * kPi / 4.0) < 1e-6, "(d) |int g - pi^2/4| = " + fmt(std::abs(area - kPi * kPi / 4.0)));
  o.require(secs < 1.0, "(d) " + fmt(secs, "%.3f") + " s");
}

// ---- 6: twist phase
void twist(Outcome& o) {
  const int n = 20;
  const double F0 = 0.2, V0 = 20.0;
  const WalkGeometry g(n, 0);
  const double tau0 = kPi * g.delta_k0() / F0;
  BandOptions bo;
  bo.n_bands = 2;
  const auto bands = compute_bands(V0, bo);
  auto dist = [&](double x_bar, int j) {
    WalkOperatorSpec s;
    s.phases = peierls_phases(bands, g, F0, tau0, x_bar);
    return walk_evolve(WalkState::symmetric(g), s, j).probabilities();
  };
  double inside = 0.0;
  for (double x_bar : {0.13, 0.5, -0.77, 3.2})
    for (int j = 0; j <= n / 2; ++j) {
      const auto a = dist(0.0, j), b = dist(x_bar, j);
      for (int i = 0; i < n; ++i) inside = std::max(inside, std::abs(a[i] - b[i]));
    }
  o.require(inside < 1e-12, "max |dp| for j <= n/2 = " + fmt(inside));

  double witness = 0.0;
  {
    const auto a = dist(0.0, 16), b = dist(0.25, 16);
    for (int i = 0; i < n; ++i) witness = std::max(witness, std::abs(a[i] - b[i]));
  }
  o.require(witness > 1e-3, "witness j=16, x_bar=0.25: max |dp| = " + fmt(witness));

  double worst = 0.0;
  const double base = gauge_reduce(peierls_phases(bands, g, F0, tau0, 0.0)).twist;
  for (double x_bar : {0.05, 0.13, 0.31, -0.2}) {
    const double phi = wrap_phase(gauge_reduce(peierls_phases(bands, g, F0, tau0, x_bar)).twist - base);
    worst = std::max(worst, std::abs(wrap_phase(phi + 2.0 * kPi * x_bar)));
    worst = std::max(worst, std::abs(wrap_phase(phi - twist_phase(g, x_bar, bands.zak_phase))));
  }
  o.require(std::abs(bands.zak_phase) < 1e-10, "zak = " + fmt(bands.zak_phase));
  o.require(worst < 1e-10, "loop phase = -2 pi x_bar (forward walker orientation), error " + fmt(worst));
}

// ---- 7: interaction ordering
void fig4(Outcome& o) {
  const PhysicalConstants pc;
  LatticeConfig lc;
  lc.omega_x = 2.0 * kPi * 2.5;
  NonlinearWalkConfig c;
  c.V0 = 10.0;
  c.omega = to_rescaled(lc, pc).omega_x0;
  const double g_rep = g1d_rescaled(5.3e-9, lc.omega_r, 100.0, lc.d_lattice, pc);
  const double g_att = g1d_rescaled(-5.3e-9, lc.omega_r, 10.0, lc.d_lattice, pc);
  const auto rep = run_nonlinear_walk(c, g_rep);
  const auto lin = run_nonlinear_walk(c, 0.0);
  const auto att = run_nonlinear_walk(c, g_att);
  o.require(rep.central_width < lin.central_width && lin.central_width < att.central_width,
            "central widths " + fmt(rep.central_width) + " < " + fmt(lin.central_width) + " < " +
                fmt(att.central_width));
  NonlinearWalkConfig plain = c;
  plain.force_linear_solver = true;
  const auto sch = run_nonlinear_walk(plain, 0.0);
  const double tv = total_variation(lin.distribution, sch.distribution);
  o.require(tv < 0.1, "TV(GPE g=0, Schroedinger) = " + fmt(tv));
}

// ---- 8: property suites
void properties(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-kPi, kPi);

  double oracle_err = 0.0, unit_err = 0.0, walk_norm = 0.0;
  for (int n : {2, 8, 20, 32}) {
    const WalkGeometry g(n, 0);
    std::vector<double> pp(n), pm(n);
    for (int i = 0; i < n; ++i) {
      pp[i] = u(rng);
      pm[i] = u(rng);
    }
    WalkOperatorSpec spec;
    spec.alpha = u(rng);
    spec.coin_phase = u(rng);
    spec.twist = u(rng);
    spec.phases = PeierlsTable::from_totals(pp, pm);
    const Eigen::MatrixXcd W = oracle::dense_walk_matrix(n, spec.alpha, spec.coin_phase, pp, pm, spec.twist);
    unit_err = std::max(unit_err, (W.adjoint() * W - Eigen::MatrixXcd::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff());
    WalkState s(g);
    for (int i = 0; i < n; ++i) s.amplitudes.row(i) << cplx(u(rng), u(rng)), cplx(u(rng), u(rng));
    s.amplitudes /= std::sqrt(s.norm());
    Eigen::VectorXcd v(2 * n);
    for (int i = 0; i < n; ++i) v.segment(2 * i, 2) = s.amplitudes.row(i).transpose();
    for (int j = 1; j <= 64; ++j) {
      v = W * v;
      const auto w = walk_evolve(s, spec, j);
      for (int i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) oracle_err = std::max(oracle_err, std::abs(w.amplitudes(i, c) - v[2 * i + c]));
      walk_norm = std::max(walk_norm, std::abs(w.norm() - 1.0));
    }
  }
  o.require(oracle_err < 1e-12, "dense oracle error " + fmt(oracle_err));
  o.require(unit_err < 1e-12 && walk_norm < 1e-12, "unitarity " + fmt(std::max(unit_err, walk_norm)));

  // continuum norm and dt order
  set_warning_handler([](const std::string&) {});
  const Grid grid(512, 32.0);
  SpinorField init(grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    init.psi1[i] = std::exp(-grid.x(i) * grid.x(i) / 8.0 + cplx(0.0, 0.5 * grid.x(i)));
  init.normalize();
  DriveSchedule d;
  d.lattice = Ramp(0.0);
  d.lattice.then(2.0, RampShape::smoothstep, 10.0);
  d.force = Ramp(0.2);
  d.omega = Ramp(0.02);
  d.g = Ramp(0.3);
  d.pulses.push_back({0.5, kPi / 2.0, 0.0, 0.0});
  const SplitStepPropagator prop(grid);
  auto run = [&](double dt, bool nl) {
    SpinorField s = init;
    prop.evolve_to(s, d, 2.0, dt, nl);
    return s;
  };
  const auto long_run = run(0.01, true);
  const double norm_err = std::abs(long_run.norm() - 1.0);
  o.require(norm_err < 1e-12, "continuum norm error " + fmt(norm_err));
  auto diff = [](const SpinorField& a, const SpinorField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.psi1.size(); ++i)
      m = std::max({m, std::abs(a.psi1[i] - b.psi1[i]), std::abs(a.psi2[i] - b.psi2[i])});
    return m;
  };
  const auto ref = run(1e-4, false);
  const double order = std::log2(diff(run(0.02, false), ref) / diff(run(0.01, false), ref));
  set_warning_handler(nullptr);
  o.require(order > 1.8 && order < 2.2, "dt order " + fmt(order, "%.3f"));

  // Monte-Carlo dephasing against exp(-j v / 2)
  const WalkGeometry g(60, 20);
  WalkOperatorSpec spec;
  spec.alpha = 0.0;
  MonteCarloNoise noise;
  noise.phase_variance = 0.05;
  MonteCarloOptions mo;
  mo.realizations = 4000;
  mo.seed = 7;
  const auto mc = monte_carlo_noisy_walk(WalkState::symmetric(g), spec, 20, noise, mo);
  double worst_sigma = 0.0;
  for (int j = 1; j <= 20; ++j) {
    const double dev = std::abs(mc.coherence[j] - std::exp(-0.5 * j * noise.phase_variance));
    worst_sigma = std::max(worst_sigma, dev / std::max(mc.coherence_error[j], 1e-15));
  }
  o.require(worst_sigma < 3.0, "Monte-Carlo deviation " + fmt(worst_sigma, "%.2f") + " sigma");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"infidelity curve", fig2},
      {"protocol at V0=20", protocol_deep},
      {"protocol at V0=2", protocol_shallow},
      {"Zeeman overlaps", zeeman},
      {"noise budget", appendix},
      {"twist phase", twist},
      {"interaction ordering", fig4},
      {"property suites", properties},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::printf("CRITERION %zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
