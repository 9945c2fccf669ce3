#include "bzwalk/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>

#include "bzwalk/error.hpp"
#include "bzwalk/units.hpp"

namespace bzwalk {

namespace {

constexpr cplx I{0.0, 1.0};

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

void stderr_warning(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

std::function<void(const std::string&)>& warning_handler() {
  static std::function<void(const std::string&)> h = stderr_warning;
  return h;
}

double shape_value(RampShape s, double u) {
  switch (s) {
    case RampShape::constant: return 0.0;
    case RampShape::linear: return u;
    case RampShape::smoothstep: return u * u * (3.0 - 2.0 * u);
  }
  return 0.0;
}

// int_0^u shape
double shape_primitive(RampShape s, double u) {
  switch (s) {
    case RampShape::constant: return 0.0;
    case RampShape::linear: return 0.5 * u * u;
    case RampShape::smoothstep: return u * u * u - 0.5 * u * u * u * u;
  }
  return 0.0;
}

bool is_power_of_two(std::size_t n) { return n && !(n & (n - 1)); }

}  // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
  std::lock_guard lock(warning_mutex());
  warning_handler() = handler ? std::move(handler) : stderr_warning;
}

void warn(const std::string& message) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

Grid::Grid(std::size_t n, double length) : n_(n), length_(length) {
  if (!is_power_of_two(n) || n < 4) throw InvalidParameter("grid size must be a power of two >= 4");
  if (!(length > 0.0)) throw InvalidParameter("grid length must be positive");
}

double Grid::kappa(std::size_t j) const {
  const double dk = 2.0 * kPi / length_;
  const auto jj = static_cast<long>(j);
  const auto nn = static_cast<long>(n_);
  return dk * static_cast<double>(jj < nn / 2 ? jj : jj - nn);
}

double SpinorField::norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < psi1.size(); ++i) s += std::norm(psi1[i]) + std::norm(psi2[i]);
  return s * grid.dx();
}

void SpinorField::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw NumericalError("cannot normalize a zero field");
  const double f = 1.0 / std::sqrt(n);
  for (auto& v : psi1) v *= f;
  for (auto& v : psi2) v *= f;
}

std::vector<double> SpinorField::density() const {
  std::vector<double> rho(psi1.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi1[i]) + std::norm(psi2[i]);
  return rho;
}

double SpinorField::peak_density() const {
  double m = 0.0;
  for (std::size_t i = 0; i < psi1.size(); ++i)
    m = std::max(m, std::norm(psi1[i]) + std::norm(psi2[i]));
  return m;
}

SpinorField embed(const SpinorField& field, std::size_t new_size) {
  const std::size_t n = field.grid.size();
  if (new_size < n) throw InvalidParameter("embed: new grid must not be smaller");
  SpinorField out(Grid(new_size, field.grid.dx() * static_cast<double>(new_size)));
  out.time = field.time;
  const std::size_t offset = new_size / 2 - n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    out.psi1[offset + i] = field.psi1[i];
    out.psi2[offset + i] = field.psi2[i];
  }
  return out;
}

// ---------------------------------------------------------------- Ramp

Ramp::Ramp(double constant_value) : initial_(constant_value) {}

Ramp::Ramp(std::vector<RampSegment> segments) : segments_(std::move(segments)) {
  validate();
  if (!segments_.empty()) initial_ = segments_.front().start_value;
}

void Ramp::validate() const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.t_end >= s.t_start)) throw InvalidParameter("ramp segment ends before it starts");
    if (s.shape == RampShape::constant && s.start_value != s.end_value)
      throw InvalidParameter("constant ramp segment must have equal start and end values");
    if (i > 0) {
      const auto& p = segments_[i - 1];
      if (s.t_start < p.t_end - 1e-12) throw InvalidParameter("ramp segments overlap or are unordered");
      if (!s.jump && std::abs(s.start_value - p.end_value) > 1e-12 * std::max(1.0, std::abs(p.end_value)))
        throw InvalidParameter("ramp is discontinuous at t=" + std::to_string(s.t_start) +
                               " (mark the segment as a jump)");
    }
  }
}

double Ramp::operator()(double t) const {
  if (segments_.empty() || t < segments_.front().t_start) return initial_;
  double value = segments_.front().start_value;
  for (const auto& s : segments_) {
    if (t < s.t_start) return value;
    if (t < s.t_end) {
      const double u = (t - s.t_start) / (s.t_end - s.t_start);
      return s.start_value + (s.end_value - s.start_value) * shape_value(s.shape, u);
    }
    value = s.end_value;
  }
  return value;
}

double Ramp::integral(double a, double b) const {
  if (b < a) return -integral(b, a);
  if (segments_.empty()) return initial_ * (b - a);
  double total = 0.0;
  double cursor = a;
  double held = initial_;
  for (const auto& s : segments_) {
    if (cursor >= b) break;
    if (s.t_start > cursor) {  // constant gap before this segment
      const double e = std::min(b, s.t_start);
      total += held * (e - cursor);
      cursor = e;
    }
    if (cursor >= b) break;
    if (s.t_end > cursor) {
      const double lo = std::max(cursor, s.t_start);
      const double hi = std::min(b, s.t_end);
      const double len = s.t_end - s.t_start;
      if (len > 0.0 && hi > lo) {
        const double ua = (lo - s.t_start) / len;
        const double ub = (hi - s.t_start) / len;
        total += len * (s.start_value * (ub - ua) +
                        (s.end_value - s.start_value) *
                            (shape_primitive(s.shape, ub) - shape_primitive(s.shape, ua)));
      }
      cursor = hi;
    }
    held = s.end_value;
  }
  if (cursor < b) total += held * (b - cursor);
  return total;
}

Ramp& Ramp::then(double duration, RampShape shape, double end_value) {
  if (!(duration >= 0.0)) throw InvalidParameter("ramp duration must be non-negative");
  const double t0 = segments_.empty() ? 0.0 : segments_.back().t_end;
  const double v0 = segments_.empty() ? initial_ : segments_.back().end_value;
  segments_.push_back({t0, t0 + duration, shape, v0, end_value, false});
  validate();
  return *this;
}

Ramp& Ramp::hold(double duration) {
  const double v = segments_.empty() ? initial_ : segments_.back().end_value;
  return then(duration, RampShape::constant, v);
}

void DriveSchedule::validate() const {
  for (const auto& p : pulses)
    if (!(p.duration >= 0.0)) throw InvalidParameter("pulse duration must be non-negative");
}

// ---------------------------------------------------------------- coin

void apply_coin(SpinorField& state, double alpha, double rel_phase) {
  const double c = std::cos(0.5 * alpha);
  const double s = std::sin(0.5 * alpha);
  const cplx up = I * s * std::exp(-I * rel_phase);
  const cplx dn = I * s * std::exp(I * rel_phase);
  for (std::size_t i = 0; i < state.psi1.size(); ++i) {
    const cplx a = state.psi1[i];
    const cplx b = state.psi2[i];
    state.psi1[i] = c * a + up * b;
    state.psi2[i] = dn * a + c * b;
  }
}

// ---------------------------------------------------------------- propagator

SplitStepPropagator::SplitStepPropagator(Grid grid)
    : grid_(grid), fft_(grid.size()), k2_(grid.size()), lattice_(grid.size()) {
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    const double k = grid_.kappa(j) / kPi;
    k2_[j] = k * k;
    const double s = std::sin(kPi * grid_.x(j));
    lattice_[j] = s * s;
  }
}

void SplitStepPropagator::step_real(SpinorField& state, const DriveSchedule& schedule, double dt,
                                    long n_steps, const PropagationOptions& options) const {
  if (!(dt > 0.0) || n_steps < 0) throw InvalidParameter("step_real needs dt > 0 and n_steps >= 0");
  evolve_to(state, schedule, state.time + dt * static_cast<double>(n_steps), dt, false, options);
}

void SplitStepPropagator::step_gpe(SpinorField& state, const DriveSchedule& schedule, double dt,
                                   long n_steps, const PropagationOptions& options) const {
  if (!(dt > 0.0) || n_steps < 0) throw InvalidParameter("step_gpe needs dt > 0 and n_steps >= 0");
  evolve_to(state, schedule, state.time + dt * static_cast<double>(n_steps), dt, true, options);
}

void SplitStepPropagator::evolve_to(SpinorField& state, const DriveSchedule& schedule,
                                    double t_end, double dt_max, bool nonlinear,
                                    const PropagationOptions& options) const {
  if (!(state.grid == grid_)) throw InvalidParameter("field grid does not match the propagator");
  if (!(dt_max > 0.0)) throw InvalidParameter("dt must be positive");
  schedule.validate();
  const double t_start = state.time;
  if (t_end < t_start) throw InvalidParameter("cannot evolve backwards in time");
  const double eps = 1e-12 * std::max(1.0, std::abs(t_end));

  std::vector<const CoinPulse*> instant;
  std::vector<double> cuts{t_end};
  for (const auto& p : schedule.pulses) {
    if (p.duration == 0.0) {
      if (p.time >= t_start - eps && p.time < t_end - eps) {
        instant.push_back(&p);
        cuts.push_back(p.time);
      }
    } else {
      for (double t : {p.time, p.time + p.duration})
        if (t > t_start + eps && t < t_end - eps) cuts.push_back(t);
    }
  }
  std::stable_sort(instant.begin(), instant.end(),
                   [](const CoinPulse* a, const CoinPulse* b) { return a->time < b->time; });
  std::sort(cuts.begin(), cuts.end());

  {  // time-step sanity on the occupied region
    const double t = t_start;
    const double v = schedule.lattice(t), w = schedule.omega(t);
    const auto rho = state.density();
    const double peak = *std::max_element(rho.begin(), rho.end());
    double vmax = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho[i] < 1e-10 * peak) continue;
      const double x = grid_.x(i);
      // The uniform force is an exact momentum translation and is left out.
      const double vv = std::abs(v * lattice_[i]) + 0.25 * kPi * kPi * w * w * x * x;
      vmax = std::max(vmax, vv);
    }
    if (dt_max * vmax > 0.1) {
      std::ostringstream msg;
      msg << "dt*max|V| = " << dt_max * vmax << " exceeds 0.1";
      warn(msg.str());
    }
  }

  const double collapse_limit = options.collapse_factor * state.peak_density();
  long counter = 0;
  std::size_t next_pulse = 0;
  double t = t_start;
  for (double boundary : cuts) {
    while (next_pulse < instant.size() && instant[next_pulse]->time <= t + eps) {
      apply_coin(state, instant[next_pulse]->alpha, instant[next_pulse]->axis_phase);
      ++next_pulse;
    }
    if (boundary <= t + eps) continue;
    const long n = std::max(1L, static_cast<long>(std::ceil((boundary - t) / dt_max - 1e-9)));
    const double dt = (boundary - t) / static_cast<double>(n);
    run_segment(state, schedule, dt, n, nonlinear, collapse_limit, options, counter);
    state.time = boundary;
    t = boundary;
  }
}

void SplitStepPropagator::run_segment(SpinorField& state, const DriveSchedule& schedule,
                                      double dt, long n_steps, bool nonlinear,
                                      double collapse_limit, const PropagationOptions& options,
                                      long& counter) const {
  const std::size_t n = grid_.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<cplx> half(n), full(n);
  for (std::size_t j = 0; j < n; ++j) {
    half[j] = std::exp(-I * k2_[j] * (0.5 * dt)) * inv_n;
    full[j] = std::exp(-I * k2_[j] * dt) * inv_n;
  }
  // Kinetic factors carry the 1/N of the inverse transform.
  auto kinetic = [&](const std::vector<cplx>& factor) {
    fft_.forward(state.psi1);
    fft_.forward(state.psi2);
    for (std::size_t j = 0; j < n; ++j) {
      state.psi1[j] *= factor[j];
      state.psi2[j] *= factor[j];
    }
    fft_.backward(state.psi1);
    fft_.backward(state.psi2);
  };

  // Potential phases are reused while the drive is constant and linear.
  std::vector<cplx> ph1, ph2;
  double cached_v = std::nan(""), cached_f = cached_v, cached_w = cached_v;

  const double t0 = state.time;
  kinetic(half);
  for (long s = 0; s < n_steps; ++s) {
    const double tm = t0 + (static_cast<double>(s) + 0.5) * dt;
    const double v = schedule.lattice(tm);
    const double f = schedule.force(tm);
    const double w = schedule.omega(tm);
    const double g = nonlinear ? schedule.g(tm) : 0.0;
    const double trap = 0.25 * kPi * kPi * w * w;

    const CoinPulse* rabi = nullptr;
    for (const auto& p : schedule.pulses)
      if (p.duration > 0.0 && tm >= p.time && tm < p.time + p.duration) rabi = &p;

    if (g == 0.0 && !rabi) {
      if (!(v == cached_v && f == cached_f && w == cached_w)) {
        ph1.resize(n);
        ph2.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = grid_.x(i);
          const double common = v * lattice_[i] + trap * x * x;
          const double zeeman = -(x - schedule.x_bar) * f;
          ph1[i] = std::exp(-I * (common + zeeman) * dt);
          ph2[i] = std::exp(-I * (common - zeeman) * dt);
        }
        cached_v = v;
        cached_f = f;
        cached_w = w;
      }
      for (std::size_t i = 0; i < n; ++i) {
        state.psi1[i] *= ph1[i];
        state.psi2[i] *= ph2[i];
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double x = grid_.x(i);
        double common = v * lattice_[i] + trap * x * x;
        if (g != 0.0) common += g * (std::norm(state.psi1[i]) + std::norm(state.psi2[i]));
        const double zeeman = -(x - schedule.x_bar) * f;
        if (!rabi) {
          state.psi1[i] *= std::exp(-I * (common + zeeman) * dt);
          state.psi2[i] *= std::exp(-I * (common - zeeman) * dt);
        } else {
          // exp(-i dt (a + b.sigma)) with b = (-W/2 cos p, -W/2 sin p, zeeman)
          const double w_rabi = rabi->alpha / rabi->duration;
          const double bx = -0.5 * w_rabi * std::cos(rabi->axis_phase);
          const double by = -0.5 * w_rabi * std::sin(rabi->axis_phase);
          const double bz = zeeman;
          const double b = std::sqrt(bx * bx + by * by + bz * bz);
          const cplx ph = std::exp(-I * common * dt);
          const double c = std::cos(b * dt);
          const double sn = b > 0.0 ? std::sin(b * dt) / b : dt;
          const cplx u11 = ph * cplx(c, -sn * bz);
          const cplx u22 = ph * cplx(c, sn * bz);
          const cplx u12 = ph * (-I * sn) * cplx(bx, -by);
          const cplx u21 = ph * (-I * sn) * cplx(bx, by);
          const cplx a = state.psi1[i], bb = state.psi2[i];
          state.psi1[i] = u11 * a + u12 * bb;
          state.psi2[i] = u21 * a + u22 * bb;
        }
      }
    }

    ++counter;
    const bool last = (s + 1 == n_steps);
    const bool observe = options.observe_every > 0 && options.observer &&
                         counter % options.observe_every == 0;
    const bool check = options.nan_check_every > 0 && counter % options.nan_check_every == 0;
    if (last || observe || check) {
      kinetic(half);
      state.time = t0 + static_cast<double>(s + 1) * dt;
      if (check || last) {
        const double nrm = state.norm();
        if (!std::isfinite(nrm)) {
          std::ostringstream msg;
          msg << "numerical blow-up (non-finite norm) at step " << counter << ", t=" << state.time;
          throw NumericalError(msg.str());
        }
        if (nonlinear && state.peak_density() > collapse_limit) {
          std::ostringstream msg;
          msg << "collapse: peak density grew beyond " << options.collapse_factor
              << "x its initial value at step " << counter << ", t=" << state.time;
          throw CollapseError(msg.str());
        }
      }
      if (observe) options.observer(state);
      if (!last) kinetic(half);
    } else {
      kinetic(full);
    }
  }
}

// ---------------------------------------------------------------- ground state

std::pair<double, double> energy_functional(const SpinorField& state, const DriveSchedule& schedule,
                                            double t) {
  const Grid& grid = state.grid;
  const std::size_t n = grid.size();
  Fft fft(n);
  std::vector<cplx> psi = state.psi1;
  fft.forward(psi);
  double kin = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double k = grid.kappa(j) / kPi;
    kin += k * k * std::norm(psi[j]);
  }
  // Parseval: sum |psi_j|^2 dx = sum |Psi_j|^2 dx / N
  kin *= grid.dx() / static_cast<double>(n);

  const double v = schedule.lattice(t), f = schedule.force(t), w = schedule.omega(t),
               g = schedule.g(t);
  double pot = 0.0, inter = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.x(i);
    const double s = std::sin(kPi * x);
    const double rho = std::norm(state.psi1[i]);
    pot += rho * (v * s * s + 0.25 * kPi * kPi * w * w * x * x - (x - schedule.x_bar) * f);
    inter += rho * rho;
  }
  pot *= grid.dx();
  inter *= g * grid.dx();
  return {kin + pot + 0.5 * inter, kin + pot + inter};
}

GroundStateResult ground_state_imaginary_time(const Grid& grid, const DriveSchedule& schedule,
                                              double t0, const GroundStateOptions& o) {
  if (!(o.dtau > 0.0)) throw InvalidParameter("dtau must be positive");
  if (schedule.omega(t0) <= 0.0 && schedule.lattice(t0) <= 0.0)
    throw InvalidParameter("ground state needs a confining potential (omega > 0 or V0 > 0)");

  const std::size_t n = grid.size();
  SpinorField state(grid);
  state.time = t0;
  if (o.initial_guess) {
    if (o.initial_guess->size() != n) throw InvalidParameter("initial guess size mismatch");
    state.psi1 = *o.initial_guess;
  } else {
    const double w = schedule.omega(t0);
    // Broad Gaussian: harmonic length if trapped, else a few sites.
    const double width = w > 0.0 ? 1.5 / std::sqrt(0.5 * kPi * kPi * w) : 4.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.x(i);
      state.psi1[i] = std::exp(-0.5 * x * x / (width * width));
    }
  }
  state.normalize();

  Fft fft(n);
  std::vector<double> half(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = grid.kappa(j) / kPi;
    half[j] = std::exp(-k * k * 0.5 * o.dtau) / static_cast<double>(n);
  }
  const double v = schedule.lattice(t0), f = schedule.force(t0), w = schedule.omega(t0),
               g = schedule.g(t0);
  std::vector<double> vext(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.x(i);
    const double s = std::sin(kPi * x);
    vext[i] = v * s * s + 0.25 * kPi * kPi * w * w * x * x - (x - schedule.x_bar) * f;
  }
  const double vmin = *std::min_element(vext.begin(), vext.end());

  double e_prev = energy_functional(state, schedule, t0).first;
  for (long step = 1; step <= o.max_steps; ++step) {
    fft.forward(state.psi1);
    for (std::size_t j = 0; j < n; ++j) state.psi1[j] *= half[j];
    fft.backward(state.psi1);
    for (std::size_t i = 0; i < n; ++i) {
      const double vv = vext[i] - vmin + g * std::norm(state.psi1[i]);
      state.psi1[i] *= std::exp(-vv * o.dtau);
    }
    fft.forward(state.psi1);
    for (std::size_t j = 0; j < n; ++j) state.psi1[j] *= half[j];
    fft.backward(state.psi1);
    state.normalize();

    if (step % o.check_every == 0) {
      const double e = energy_functional(state, schedule, t0).first;
      if (!std::isfinite(e)) throw NumericalError("imaginary-time evolution produced a non-finite energy");
      if (std::abs(e - e_prev) / static_cast<double>(o.check_every) < o.tolerance) {
        auto [energy, mu] = energy_functional(state, schedule, t0);
        return {std::move(state), energy, mu, step};
      }
      e_prev = e;
    }
  }
  std::ostringstream msg;
  msg << "imaginary-time evolution did not converge within " << o.max_steps << " steps";
  throw ConvergenceError(msg.str());
}

}  // namespace bzwalk
