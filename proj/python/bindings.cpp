#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bzwalk/band.hpp"
#include "bzwalk/decoherence.hpp"
#include "bzwalk/error.hpp"
#include "bzwalk/idealwalk.hpp"
#include "bzwalk/observables.hpp"
#include "bzwalk/protocol.hpp"
#include "bzwalk/units.hpp"

namespace py = pybind11;
using namespace bzwalk;

namespace {

WalkState initial_state(const WalkGeometry& g, const std::string& init) {
  if (init == "symmetric") return WalkState::symmetric(g);
  if (init == "up") return WalkState::localized(g, g.origin(), 1.0, 0.0);
  if (init == "down") return WalkState::localized(g, g.origin(), 0.0, 1.0);
  throw InvalidParameter("init must be one of symmetric, up, down");
}

py::dict distribution_dict(const SiteDistribution& d) {
  py::dict out;
  out["k"] = d.k;
  out["probability"] = d.probability;
  out["residual"] = d.residual;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Discrete-time quantum walks of a spinor condensate in quasimomentum space.";
  m.attr("__version__") = BZWALK_VERSION;

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", numerical.ptr());
  py::register_exception<CollapseError>(m, "CollapseError", numerical.ptr());
  py::register_exception<GaugeSingularity>(m, "GaugeSingularity", numerical.ptr());
  py::register_exception<BoundaryViolation>(m, "BoundaryViolation", error.ptr());

  py::class_<PhysicalConstants>(m, "PhysicalConstants")
      .def(py::init<>())
      .def_readwrite("hbar", &PhysicalConstants::hbar)
      .def_readwrite("mass", &PhysicalConstants::mass)
      .def_readwrite("bohr_magneton", &PhysicalConstants::bohr_magneton)
      .def_readwrite("mf_gf", &PhysicalConstants::mf_gf);

  py::class_<LatticeConfig>(m, "LatticeConfig")
      .def(py::init<>())
      .def_readwrite("d_lattice", &LatticeConfig::d_lattice)
      .def_readwrite("V0", &LatticeConfig::V0)
      .def_readwrite("F0", &LatticeConfig::F0)
      .def_readwrite("x_bar", &LatticeConfig::x_bar)
      .def_readwrite("omega_x", &LatticeConfig::omega_x)
      .def_readwrite("omega_r", &LatticeConfig::omega_r)
      .def_readwrite("g1d", &LatticeConfig::g1d)
      .def_readwrite("tau0", &LatticeConfig::tau0);

  m.def("recoil_energy", [](double d) { return recoil_energy(d, PhysicalConstants{}); },
        py::arg("d_lattice") = 532e-9);
  m.def("g1d_rescaled",
        [](double a_s, double omega_r, double n, double d) {
          return g1d_rescaled(a_s, omega_r, n, d, PhysicalConstants{});
        },
        py::arg("scattering_length"), py::arg("omega_r"), py::arg("atom_number"),
        py::arg("d_lattice") = 532e-9);

  m.def("bands",
        [](double V0, int n_k, int n_bands, int m_max, double shift) {
          BandOptions o;
          o.n_k = n_k;
          o.n_bands = n_bands;
          o.m_max = m_max;
          o.lattice_shift = shift;
          const BandData b = compute_bands(V0, o);
          py::dict out;
          out["k"] = b.k;
          out["energies"] = b.energies;
          out["connection"] = b.connection;
          out["zak_phase"] = b.zak_phase;
          return out;
        },
        py::arg("V0"), py::arg("n_k") = 512, py::arg("n_bands") = 4, py::arg("m_max") = 32,
        py::arg("lattice_shift") = 0.0);

  m.def("peierls_phases",
        [](double V0, int n_sites, double F0, double x_bar, int m_max, int n_k) {
          BandOptions o;
          o.m_max = m_max;
          o.n_k = n_k;
          const PeierlsTable t = peierls_phases(compute_bands(V0, o), WalkGeometry(n_sites, 0), F0,
                                                kPi / 2.0, x_bar);
          py::dict out;
          out["phi_plus"] = t.phi_plus();
          out["phi_minus"] = t.phi_minus();
          return out;
        },
        py::arg("V0"), py::arg("n_sites") = 20, py::arg("F0") = 0.2, py::arg("x_bar") = 0.0,
        py::arg("m_max") = 32, py::arg("n_k") = 512);

  m.def("coin_matrix", &coin_matrix, py::arg("alpha"), py::arg("phase") = 0.0);

  m.def("walk",
        [](int n_sites, int steps, double alpha, double coin_phase, std::optional<double> V0,
           double F0, double x_bar, double twist, const std::string& init) {
          const WalkGeometry g(n_sites, steps);
          WalkOperatorSpec spec;
          spec.alpha = alpha;
          spec.coin_phase = coin_phase;
          spec.twist = twist;
          if (V0) spec.phases = peierls_phases(compute_bands(*V0), g, F0, kPi / 2.0, x_bar);
          const WalkState start = initial_state(g, init);
          std::optional<WalkState> s;
          {
            py::gil_scoped_release release;
            s = walk_evolve(start, spec, steps);
          }
          py::dict out;
          out["k"] = site_distribution(*s).k;
          out["probability"] = s->probabilities();
          out["amplitudes"] = s->amplitudes;
          return out;
        },
        py::arg("n_sites") = 20, py::arg("steps") = 10, py::arg("alpha") = kPi / 2.0,
        py::arg("coin_phase") = 0.0, py::arg("V0") = py::none(), py::arg("F0") = 0.2,
        py::arg("x_bar") = 0.0, py::arg("twist") = 0.0, py::arg("init") = "symmetric");

  m.def("gauge_reduce",
        [](const std::vector<double>& phi_plus, const std::vector<double>& phi_minus) {
          const GaugeReduction r = gauge_reduce(PeierlsTable::from_totals(phi_plus, phi_minus));
          py::dict out;
          out["gamma"] = r.gamma;
          out["twist"] = r.twist;
          out["max_residual"] = r.max_residual;
          out["removable"] = r.removable;
          out["globally_removable"] = r.globally_removable;
          return out;
        },
        py::arg("phi_plus"), py::arg("phi_minus"));

  m.def("twist_phase",
        [](int n_sites, double x_bar, double zak) {
          return twist_phase(WalkGeometry(n_sites, 0), x_bar, zak);
        },
        py::arg("n_sites"), py::arg("x_bar"), py::arg("zak_phase") = 0.0);

  m.def("infidelity_curve",
        [](const std::vector<double>& V0_list, const std::vector<int>& j_list, int n_sites,
           double F0, double x_bar, double alpha, bool flat_band) {
          InfidelityOptions o;
          o.n_sites = n_sites;
          o.F0 = F0;
          o.x_bar = x_bar;
          o.alpha = alpha;
          o.flat_band = flat_band;
          std::vector<InfidelityPoint> pts;
          {
            py::gil_scoped_release release;
            pts = infidelity_curve(V0_list, j_list, o);
          }
          std::vector<std::tuple<double, int, double>> out;
          for (const auto& p : pts) out.emplace_back(p.V0, p.steps, p.infidelity);
          return out;
        },
        py::arg("V0_list"), py::arg("j_list"), py::arg("n_sites") = 20, py::arg("F0") = 0.2,
        py::arg("x_bar") = 0.0, py::arg("alpha") = kPi / 2.0, py::arg("flat_band") = false);

  m.def("zeeman_overlap",
        [](double V0, double F0) {
          py::gil_scoped_release release;
          return zeeman_overlap(V0, F0).deviation;
        },
        py::arg("V0"), py::arg("F0"));

  py::class_<NoiseSpectrum>(m, "NoiseSpectrum")
      .def_static("lorentzian", &NoiseSpectrum::lorentzian, py::arg("variance"),
                  py::arg("corner"), py::arg("omega_c"), py::arg("omega_max"),
                  py::arg("points_per_decade") = 200)
      .def_static("band_limited", &NoiseSpectrum::band_limited, py::arg("variance"),
                  py::arg("lo"), py::arg("hi"), py::arg("points_per_decade") = 200)
      .def("__call__", &NoiseSpectrum::operator())
      .def("variance", &NoiseSpectrum::variance)
      .def("scaled", &NoiseSpectrum::scaled, py::arg("factor"));

  m.def("window_function", &window_function, py::arg("omega"), py::arg("tau"));
  m.def("step_size_variance", &step_size_variance, py::arg("s_force"), py::arg("tau"),
        py::arg("hbar") = 1.0, py::arg("k_unit") = 1.0);
  m.def("site_peak_width", &site_peak_width, py::arg("beta"), py::arg("n_sites"));
  m.def("dephasing_per_step", &dephasing_per_step, py::arg("var_k"), py::arg("sigma_k"));
  m.def("shift_phase_variance",
        [](const NoiseSpectrum& s, double tau) {
          const PhaseDephasing d = shift_phase_variance(s, tau, PhysicalConstants{});
          py::dict out;
          out["variance"] = d.variance;
          out["coherence"] = d.coherence;
          out["coherent_steps"] = d.coherent_steps;
          return out;
        },
        py::arg("s_field"), py::arg("tau"));
  m.def("coin_noise_kernel", &coin_noise_kernel, py::arg("r"));
  m.def("coin_error",
        [](const NoiseSpectrum& s, double omega_rabi) {
          return coin_process_fidelity(s, omega_rabi, PhysicalConstants{}).error;
        },
        py::arg("s_field"), py::arg("omega_rabi"));

  m.def("monte_carlo_walk",
        [](int n_sites, int steps, double alpha, double phase_variance, double step_variance,
           double sigma_k, long realizations, std::uint64_t seed, int threads) {
          const WalkGeometry g(n_sites, steps);
          WalkOperatorSpec spec;
          spec.alpha = alpha;
          MonteCarloNoise noise{phase_variance, step_variance, sigma_k};
          MonteCarloOptions o;
          o.realizations = realizations;
          o.seed = seed;
          o.threads = threads;
          MonteCarloResult r;
          {
            py::gil_scoped_release release;
            r = monte_carlo_noisy_walk(WalkState::symmetric(g), spec, steps, noise, o);
          }
          py::dict out;
          out["distribution"] = r.distribution;
          out["coherence"] = r.coherence;
          out["coherence_error"] = r.coherence_error;
          out["site_variance"] = r.site_variance;
          return out;
        },
        py::arg("n_sites"), py::arg("steps"), py::arg("alpha") = kPi / 2.0,
        py::arg("phase_variance") = 0.0, py::arg("step_variance") = 0.0,
        py::arg("sigma_k") = 0.0, py::arg("realizations") = 1000, py::arg("seed") = 1,
        py::arg("threads") = 1);

  py::class_<ProtocolConfig>(m, "ProtocolConfig")
      .def(py::init<>())
      .def_readwrite("lattice", &ProtocolConfig::lattice)
      .def_readwrite("n_sites", &ProtocolConfig::n_sites)
      .def_readwrite("steps", &ProtocolConfig::steps)
      .def_readwrite("alpha", &ProtocolConfig::alpha)
      .def_readwrite("coin_phase", &ProtocolConfig::coin_phase)
      .def_readwrite("grid_points", &ProtocolConfig::grid_points)
      .def_readwrite("grid_length", &ProtocolConfig::grid_length)
      .def_readwrite("readout_points", &ProtocolConfig::readout_points)
      .def_readwrite("dt", &ProtocolConfig::dt)
      .def_readwrite("dt_free", &ProtocolConfig::dt_free)
      .def_readwrite("nonlinear", &ProtocolConfig::nonlinear)
      .def_readwrite("quarter_period_readout", &ProtocolConfig::quarter_period_readout)
      .def_readwrite("reference_dynamical_phases", &ProtocolConfig::reference_dynamical_phases);

  m.def("run_protocol",
        [](const ProtocolConfig& config) {
          ProtocolResult r;
          {
            py::gil_scoped_release release;
            r = run_protocol(config);
          }
          py::dict out;
          std::vector<std::string> names;
          for (const auto& s : r.stages) names.push_back(s.name);
          out["stages"] = names;
          out["final"] = distribution_dict(r.final_distribution);
          out["reference"] = distribution_dict(r.reference);
          out["reference_dynamical"] = distribution_dict(r.reference_dynamical);
          out["tv_plain"] = r.tv_plain;
          out["tv_dynamical"] = r.tv_dynamical;
          out["tv_reference"] = r.tv_reference;
          out["band0_after_ramp_up"] = r.band0_after_ramp_up;
          return out;
        },
        py::arg("config"));

  m.def("nonlinear_walk",
        [](double g, double V0, double F0, double omega, int n_sites, int steps,
           std::size_t grid_points, bool force_linear_solver) {
          NonlinearWalkConfig c;
          c.V0 = V0;
          c.F0 = F0;
          c.omega = omega;
          c.n_sites = n_sites;
          c.steps = steps;
          c.grid_points = grid_points;
          c.force_linear_solver = force_linear_solver;
          NonlinearWalkResult r;
          {
            py::gil_scoped_release release;
            r = run_nonlinear_walk(c, g);
          }
          py::dict out;
          out["distribution"] = distribution_dict(r.distribution);
          out["central_width"] = r.central_width;
          out["mean_width"] = r.mean_width;
          out["initial_width"] = r.initial_width;
          out["chemical_potential"] = r.chemical_potential;
          return out;
        },
        py::arg("g"), py::arg("V0") = 10.0, py::arg("F0") = 0.2, py::arg("omega") = 0.0,
        py::arg("n_sites") = 20, py::arg("steps") = 10, py::arg("grid_points") = 2048,
        py::arg("force_linear_solver") = false);
}
