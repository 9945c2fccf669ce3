#include "bzwalk/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bzwalk/band.hpp"
#include "bzwalk/error.hpp"
#include "bzwalk/idealwalk.hpp"

namespace bzwalk {

namespace {

constexpr double kMass = kPi * kPi / 2.0;  // rescaled mass: H = kappa^2 / (2 m)

StageRecord record(const std::string& name, const SpinorField& s, double t_end) {
  const auto m = moments(s);
  return {name, t_end, m.norm, m.x_rms, m.k_rms};
}

PropagationOptions stage_options(const ProtocolConfig& c, const std::string& stage) {
  PropagationOptions o;
  if (c.frame_sink && c.frame_every > 0) {
    o.observe_every = c.frame_every;
    o.observer = [&c, stage](const SpinorField& s) { c.frame_sink(stage, s); };
  }
  return o;
}

double fold(double k) {
  double r = std::fmod(k + 1.0, 2.0);
  if (r <= 0.0) r += 2.0;
  return r - 1.0;
}

// rms of k - k_site within each walk bin, from a zero-padded momentum density.
std::vector<double> bin_widths(const SpinorField& state, const WalkGeometry& g,
                               std::vector<double>& weight) {
  const SpinorField padded = embed(state, state.grid.size() * 4);
  const auto md = momentum_density(padded);
  const int n = g.n_sites();
  std::vector<double> w(n, 0.0), s2(n, 0.0);
  for (std::size_t j = 0; j < md.k.size(); ++j) {
    const double kf = fold(md.k[j]);
    const int i = g.wrap(static_cast<int>(std::lround((kf + 1.0) / g.delta_k0())) - 1);
    double d = kf - g.site_k(i);
    if (d > 1.0) d -= 2.0;
    if (d < -1.0) d += 2.0;
    w[i] += md.density[j];
    s2[i] += md.density[j] * d * d;
  }
  std::vector<double> rms(n, 0.0);
  for (int i = 0; i < n; ++i) rms[i] = w[i] > 0.0 ? std::sqrt(s2[i] / w[i]) : 0.0;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  weight.resize(n);
  for (int i = 0; i < n; ++i) weight[i] = w[i] / total;
  return rms;
}

}  // namespace

void ProtocolConfig::validate() const {
  lattice.validate();
  constants.validate();
  if (n_sites < 2 || n_sites % 2) throw InvalidParameter("n_sites must be even and >= 2");
  if (steps < 0) throw InvalidParameter("steps must be non-negative");
  if (!(lattice.F0 > 0.0)) throw InvalidParameter("F0 must be positive for the protocol");
  if (!(lattice.omega_x > 0.0)) throw InvalidParameter("omega_x must be positive for the protocol");
  if (!(dt > 0.0) || !(dt_free > 0.0)) throw InvalidParameter("time steps must be positive");
  if (readout_points < grid_points) throw InvalidParameter("readout_points must be >= grid_points");
  if (force_delay_fraction < 0.0 || force_delay_fraction >= 1.0)
    throw InvalidParameter("force_delay_fraction must be in [0, 1)");
  const double dk = 2.0 / n_sites;
  if (std::abs(lattice.F0 * lattice.tau0 / kPi - dk) > 1e-9)
    throw InvalidParameter("tau0 must satisfy F0 tau0 / pi = 2 / n_sites");
}

double lens_kick_duration(const SpinorField& state, double omega) {
  if (!(omega > 0.0)) throw InvalidParameter("omega must be positive");
  const auto m = moments(state);
  const double mw = kMass * omega;
  const double sxx = m.x_rms * m.x_rms * mw;
  const double spp = kPi * kPi * m.k_rms * m.k_rms / mw;
  const double sxp = kPi * m.xk_cov;
  double theta = 0.5 * std::atan2(sxp, 0.5 * (sxx - spp));
  if (theta < 0.0) theta += 0.5 * kPi;
  return theta / omega;
}

SpinorField delta_kick_cool(const SpinorField& state, double omega, double t_expand,
                            double t_kick, double dt) {
  if (t_expand < 0.0) throw InvalidParameter("expansion time must be non-negative");
  SpinorField s = state;
  SplitStepPropagator prop(s.grid);
  const double t0 = s.time;
  if (t_expand > 0.0) {
    DriveSchedule free;
    prop.evolve_to(s, free, t0 + t_expand, t_expand, false);
  }
  if (t_kick < 0.0) t_kick = lens_kick_duration(s, omega);
  if (t_kick > 0.0) {
    DriveSchedule trap;
    trap.omega = Ramp(omega);
    prop.evolve_to(s, trap, s.time + t_kick, dt, false);
  }
  return s;
}

MappedDistribution quarter_period_map(const SpinorField& state, double omega,
                                      std::size_t grid_points, double dt,
                                      double fraction_of_period) {
  if (!(omega > 0.0)) throw InvalidParameter("omega must be positive");
  SpinorField s = grid_points > state.grid.size() ? embed(state, grid_points) : state;
  SplitStepPropagator prop(s.grid);
  DriveSchedule trap;
  trap.omega = Ramp(omega);
  prop.evolve_to(s, trap, s.time + fraction_of_period * 2.0 * kPi / omega, dt, false);
  MappedDistribution out{{}, {}, s};
  const auto rho = s.density();
  out.k.resize(rho.size());
  out.weight.resize(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    out.k[i] = s.grid.x(i) * kPi * omega / 2.0;
    out.weight[i] = rho[i] * s.grid.dx();
  }
  return out;
}

ProtocolResult run_protocol(const ProtocolConfig& c) {
  c.validate();
  ProtocolResult res;
  const RescaledParams p = to_rescaled(c.lattice, c.constants);
  res.params = p;
  const double V0 = p.V0, F0 = p.F0, w = p.omega_x0;
  const double g = c.nonlinear ? p.g1d : 0.0;
  const WalkGeometry geom(c.n_sites, c.steps);
  const double tau0 = p.tau0;

  const auto lz = landau_zener_check(V0, F0);
  if (!lz.safe) {
    std::ostringstream msg;
    msg << "Landau-Zener margin " << lz.ratio << " below 5 at V0=" << V0 << ", F0=" << F0;
    warn(msg.str());
  }

  const Grid grid(c.grid_points, c.grid_length);
  SplitStepPropagator prop(grid);
  double clock = 0.0;
  auto stage = [&](const std::string& name, SpinorField& s, const DriveSchedule& sched,
                   double duration, double dt) {
    s.time = 0.0;
    try {
      if (duration > 0.0) prop.evolve_to(s, sched, duration, dt, g != 0.0, stage_options(c, name));
    } catch (const CollapseError& e) {
      throw CollapseError("stage '" + name + "': " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("stage '" + name + "': " + e.what());
    }
    clock += duration;
    res.stages.push_back(record(name, s, clock));
  };

  // (1) ground state in the shallow trap
  DriveSchedule trap_only;
  trap_only.omega = Ramp(w);
  trap_only.g = Ramp(g);
  GroundStateOptions gso;
  gso.dtau = 0.5;
  {
    const double ell = 1.0 / std::sqrt(kMass * w);
    std::vector<cplx> guess(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.x(i);
      guess[i] = std::exp(-0.5 * x * x / (ell * ell));
    }
    gso.initial_guess = std::move(guess);
  }
  SpinorField state = ground_state_imaginary_time(grid, trap_only, 0.0, gso).state;
  res.stages.push_back(record("ground_state", state, clock));

  // (2) delta-kick cooling
  res.expansion_time = c.expansion_time >= 0.0 ? c.expansion_time : std::sqrt(8.0) / w;
  {
    DriveSchedule free;
    free.g = Ramp(g);
    stage("expansion", state, free, res.expansion_time, g != 0.0 ? c.dt_free : res.expansion_time);
    res.kick_time = c.kick_time >= 0.0 ? c.kick_time : lens_kick_duration(state, w);
    stage("lens", state, trap_only, res.kick_time, c.dt_free);
  }

  // (3) ramp-up: lattice over one Bloch period, force delayed then held so the
  // force integral is exactly 2 pi (one sweep of the zone)
  const double TL = c.lattice_ramp_time > 0.0 ? c.lattice_ramp_time : 2.0 * kPi / F0;
  const double delay = c.force_delay_fraction * TL;
  const double TF = TL - delay;
  const double hold = (2.0 * kPi - 0.5 * F0 * TF) / F0;
  if (hold < 0.0) throw InvalidParameter("lattice ramp too long: the force sweep exceeds one zone");
  res.lattice_ramp_time = TL;
  res.force_ramp_time = TF;
  res.force_hold_time = hold;
  {
    DriveSchedule up;
    up.lattice = Ramp(0.0);
    up.lattice.then(TL, RampShape::smoothstep, V0);
    up.force = Ramp(0.0);
    up.force.hold(delay).then(TF, RampShape::smoothstep, F0).hold(hold);
    up.g = Ramp(g);
    up.x_bar = p.x_bar;
    stage("ramp_up", state, up, TL + hold, c.dt);
    res.band0_after_ramp_up = band_populations(state, V0, 1)[0] / state.norm();
  }

  // (4) spin preparation
  apply_coin(state, c.prep_alpha, c.prep_phase);
  res.stages.push_back(record("spin_prep", state, clock));

  // (5) walk
  {
    DriveSchedule walk;
    walk.lattice = Ramp(V0);
    walk.force = Ramp(F0);
    walk.g = Ramp(g);
    walk.x_bar = p.x_bar;
    for (int s = 0; s < c.steps; ++s) walk.pulses.push_back({s * tau0, c.alpha, c.coin_phase, 0.0});
    state.time = 0.0;
    res.walk_snapshots.push_back(state);
    const auto opts = stage_options(c, "walk");
    for (int s = 0; s < c.steps; ++s) {
      try {
        prop.evolve_to(state, walk, (s + 1) * tau0, c.dt, g != 0.0, opts);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string("stage 'walk': ") + e.what());
      }
      res.walk_snapshots.push_back(state);
    }
    clock += c.steps * tau0;
    res.stages.push_back(record("walk", state, clock));
    res.spatial_freeze = res.walk_snapshots.size() > 1 ? spatial_freeze_metric(res.walk_snapshots) : 0.0;
    res.before_ramp_down = site_distribution(state, geom);
  }

  // (6) ramp-down, mirror of the ramp-up
  {
    DriveSchedule down;
    down.force = Ramp(F0);
    down.force.hold(hold).then(TF, RampShape::smoothstep, 0.0);
    down.lattice = Ramp(V0);
    down.lattice.hold(hold).then(TL, RampShape::smoothstep, 0.0);
    down.g = Ramp(g);
    down.x_bar = p.x_bar;
    stage("ramp_down", state, down, hold + TL, c.dt);
    res.after_ramp_down = site_distribution(state, geom);
  }

  // (7) quarter period in the trap
  if (c.quarter_period_readout) {
    auto mapped = quarter_period_map(state, w, c.readout_points, c.dt_free);
    clock += 0.5 * kPi / w;
    res.stages.push_back(record("quarter_period", mapped.state, clock));
    res.mapped = bin_samples(mapped.k, mapped.weight, geom);
    res.final_distribution = res.mapped;
    res.final_state = std::move(mapped.state);
  } else {
    res.final_distribution = res.after_ramp_down;
    res.final_state = state;
  }

  const WalkState init = WalkState::localized(
      geom, geom.origin(), std::cos(0.5 * c.prep_alpha),
      cplx(0.0, 1.0) * std::sin(0.5 * c.prep_alpha) * std::exp(cplx(0.0, c.prep_phase)));
  WalkOperatorSpec spec;
  spec.alpha = c.alpha;
  spec.coin_phase = c.coin_phase;
  res.reference = site_distribution(walk_evolve(init, spec, c.steps));
  {
    BandOptions bo;
    bo.n_bands = 2;
    spec.phases = peierls_phases(compute_bands(V0, bo), geom, F0, tau0, p.x_bar);
    res.reference_dynamical = site_distribution(walk_evolve(init, spec, c.steps));
  }
  res.tv_plain = total_variation(res.final_distribution, res.reference);
  res.tv_dynamical = total_variation(res.final_distribution, res.reference_dynamical);
  res.tv_reference = c.reference_dynamical_phases ? res.tv_dynamical : res.tv_plain;
  res.tv_readout_chain = total_variation(res.before_ramp_down, res.final_distribution);
  return res;
}

NonlinearWalkResult run_nonlinear_walk(const NonlinearWalkConfig& c, double g) {
  if (!(c.omega > 0.0)) throw InvalidParameter("the interaction comparison needs a trap (omega > 0)");
  if (!(c.F0 > 0.0)) throw InvalidParameter("F0 must be positive");
  const WalkGeometry geom(c.n_sites, c.steps);
  const double tau0 = kPi * geom.delta_k0() / c.F0;
  const Grid grid(c.grid_points, c.grid_length);

  DriveSchedule ground;
  ground.lattice = Ramp(c.V0);
  ground.omega = Ramp(c.omega);
  ground.g = Ramp(g);

  // Initial guess: lowest Bloch function at k = 0 times a Gaussian (g <= 0)
  // or Thomas-Fermi (g > 0) envelope for the effective-mass trap problem.
  BandOptions bo;
  bo.m_max = 16;
  bo.n_k = 64;
  bo.n_bands = 1;
  const auto bands = compute_bands(c.V0, bo);
  const double J = bands.bandwidth(0) / 4.0;
  const Eigen::VectorXcd u0 = bloch_vector(0.0, c.V0, bo.m_max, 0);
  double u4 = 0.0;
  std::vector<double> cell(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    cplx v = 0.0;
    for (int m = -bo.m_max; m <= bo.m_max; ++m) v += u0[m + bo.m_max] * std::exp(cplx(0.0, 2.0 * kPi * m * x));
    cell[i] = v.real();
  }
  {
    double s2 = 0.0, s4 = 0.0;
    const int per_cell = static_cast<int>(std::lround(1.0 / grid.dx()));
    for (int i = 0; i < per_cell; ++i) {
      const double v = cell[grid.size() / 2 + i];
      s2 += v * v * grid.dx();
      s4 += v * v * v * v * grid.dx();
    }
    u4 = s4 / (s2 * s2);
  }
  const double ell = std::sqrt(2.0 * std::sqrt(J) / (kPi * c.omega));
  const double trap_k = 0.25 * kPi * kPi * c.omega * c.omega;
  const double radius_tf = g > 0.0 ? std::cbrt(3.0 * g * u4 / (4.0 * trap_k)) : 0.0;
  std::vector<cplx> guess(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    double env = std::exp(-0.5 * x * x / (ell * ell));
    if (radius_tf > ell) env = std::sqrt(std::max(0.0, 1.0 - x * x / (radius_tf * radius_tf))) + 1e-3 * env;
    guess[i] = cell[i] * env;
  }

  GroundStateOptions coarse;
  coarse.dtau = 4.0 * c.dtau;
  coarse.tolerance = c.ground_tolerance;
  coarse.initial_guess = std::move(guess);
  auto gs = ground_state_imaginary_time(grid, ground, 0.0, coarse);
  GroundStateOptions fine;
  fine.dtau = c.dtau;
  fine.tolerance = c.ground_tolerance;
  fine.initial_guess = gs.state.psi1;
  const long coarse_steps = gs.steps;
  gs = ground_state_imaginary_time(grid, ground, 0.0, fine);

  NonlinearWalkResult res;
  res.g = g;
  res.chemical_potential = gs.chemical_potential;
  res.ground_steps = coarse_steps + gs.steps;
  SpinorField state = std::move(gs.state);
  {
    std::vector<double> wgt;
    res.initial_width = bin_widths(state, geom, wgt)[geom.origin()];
  }

  if (g < 0.0 && moments(state).x_rms < 2.0)
    throw CollapseError("attractive interaction localizes the ground state on a few lattice sites");

  apply_coin(state, kPi / 2.0, -kPi / 2.0);
  DriveSchedule walk;
  walk.lattice = Ramp(c.V0);
  walk.force = Ramp(c.F0);
  walk.omega = Ramp(c.omega);
  walk.g = Ramp(g);
  for (int s = 0; s < c.steps; ++s) walk.pulses.push_back({s * tau0, c.alpha, 0.0, 0.0});
  SplitStepPropagator prop(grid);
  state.time = 0.0;
  const bool nonlinear = !(c.force_linear_solver && g == 0.0);
  prop.evolve_to(state, walk, c.steps * tau0, c.dt, nonlinear);

  res.distribution = site_distribution(state, geom);
  std::vector<double> wgt;
  const auto widths = bin_widths(state, geom, wgt);
  res.central_width = widths[geom.origin()];
  double sw = 0.0, sp = 0.0;
  for (int i = 0; i < geom.n_sites(); ++i)
    if (wgt[i] > 0.01) {
      sw += wgt[i] * widths[i];
      sp += wgt[i];
    }
  res.mean_width = sp > 0.0 ? sw / sp : 0.0;
  return res;
}

}  // namespace bzwalk
