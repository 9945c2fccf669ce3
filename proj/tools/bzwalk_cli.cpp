// bzwalk command-line tool: band tables, ideal walks, figure pipelines,
// the full experimental protocol and noise estimates. Every command writes a
// CSV/JSON result and a run manifest into the output directory.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "bzwalk/band.hpp"
#include "bzwalk/decoherence.hpp"
#include "bzwalk/error.hpp"
#include "bzwalk/idealwalk.hpp"
#include "bzwalk/io.hpp"
#include "bzwalk/observables.hpp"
#include "bzwalk/protocol.hpp"
#include "bzwalk/units.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bzwalk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Option registry: every option can also come from the JSON config; values
// given on the command line win.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& desc) {
    CLI::Option* opt = app_->add_option("--" + name, var, desc)->capture_default_str();
    entries_.push_back({name, opt, [&var, name](const json& v) {
                          try {
                            var = v.get<T>();
                          } catch (const json::exception& e) {
                            throw UsageError("config field '" + name + "': " + e.what());
                          }
                        },
                        [&var]() { return json(var); }});
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
    CLI::Option* opt = app_->add_flag("--" + name, var, desc);
    entries_.push_back({name, opt, [&var, name](const json& v) {
                          if (!v.is_boolean())
                            throw UsageError("config field '" + name + "': expected true or false");
                          var = v.get<bool>();
                        },
                        [&var]() { return json(var); }});
    return opt;
  }

  void apply(const json& config) const {
    for (auto it = config.begin(); it != config.end(); ++it) {
      const auto e = std::find_if(entries_.begin(), entries_.end(),
                                  [&](const Entry& x) { return x.name == it.key(); });
      if (e == entries_.end()) throw UsageError("config field '" + it.key() + "': unknown option");
      if (e->option->count() == 0) e->assign(it.value());
    }
  }

  json resolved() const {
    json j = json::object();
    for (const auto& e : entries_) j[e.name] = e.dump();
    return j;
  }

 private:
  struct Entry {
    std::string name;
    CLI::Option* option;
    std::function<void(const json&)> assign;
    std::function<json()> dump;
  };
  CLI::App* app_;
  std::vector<Entry> entries_;
};

struct Common {
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  std::uint64_t seed = 1;
};

// Config file: either a flat object of options, an object keyed by command
// name, or a run manifest (whose resolved config is reused).
json load_config(const std::string& path, const std::string& command) {
  if (path.empty()) return json::object();
  json j = read_json_file(path);
  if (!j.is_object()) throw UsageError("config " + path + ": top level must be an object");
  if (j.contains("command") && j.contains("config")) {
    if (j["command"] != command)
      throw UsageError("manifest " + path + " belongs to command '" + j["command"].get<std::string>() + "'");
    j = j["config"];
  } else if (j.contains(command) && j[command].is_object()) {
    j = j[command];
  }
  for (const char* reserved : {"seed", "threads"}) j.erase(reserved);
  return j;
}

struct Run {
  std::string command;
  Common* common;
  Params* params;
  fs::path dir;
  RunManifest manifest;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  fs::path output(const std::string& name) {
    manifest.outputs.push_back(name);
    return dir / name;
  }
  void finish() {
    manifest.command = command;
    manifest.config = params->resolved();
    manifest.seed = common->seed;
    manifest.version = code_version();
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.write(dir / (command + ".manifest.json"));
  }
};

// ------------------------------------------------------------------ band

struct BandArgs {
  double V0 = 20.0;
  int nk = 512;
  int bands = 4;
  int m_max = 32;
  double shift = 0.0;
};

void add_band(Params& p, BandArgs& a) {
  p.add("V0", a.V0, "lattice depth, E_R");
  p.add("nk", a.nk, "number of quasimomentum samples in (-1, 1]");
  p.add("bands", a.bands, "number of bands");
  p.add("mmax", a.m_max, "plane-wave cutoff |m| <= mmax");
  p.add("shift", a.shift, "lattice origin offset, d_L");
}

int cmd_band(Run& run, const BandArgs& a) {
  BandOptions o;
  o.m_max = a.m_max;
  o.n_k = a.nk;
  o.n_bands = a.bands;
  o.lattice_shift = a.shift;
  const BandData b = compute_bands(a.V0, o);
  CsvWriter csv(run.output("band.csv"));
  csv.comment("Bloch bands of V0 sin^2(pi (x - shift)), V0 = " + format_number(a.V0) + " E_R");
  csv.comment("k in k_R; E_n in E_R; A0 (lowest-band Berry connection) in d_L");
  csv.comment("zak_phase = " + format_number(b.zak_phase) + " rad");
  std::vector<std::string> cols{"k"};
  for (int n = 0; n < b.n_bands(); ++n) cols.push_back("E" + std::to_string(n));
  cols.push_back("A0");
  csv.header(cols);
  for (int i = 0; i < b.n_k(); ++i) {
    std::vector<double> row{b.k[i]};
    for (int n = 0; n < b.n_bands(); ++n) row.push_back(b.energies(i, n));
    row.push_back(b.connection[i]);
    csv.row(row);
  }
  std::cout << "wrote " << b.n_k() << " rows x " << b.n_bands() << " bands; zak phase "
            << b.zak_phase << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ walk

struct WalkArgs {
  int sites = 20;
  int steps = 10;
  double alpha = kPi / 2.0;
  double coin_phase = 0.0;
  std::string phases = "none";
  double V0 = 20.0;
  double F0 = 0.2;
  double x_bar = 0.0;
  double twist = 0.0;
  std::string init = "symmetric";
};

void add_walk(Params& p, WalkArgs& a) {
  p.add("sites", a.sites, "number of sites n in the zone");
  p.add("steps", a.steps, "number of walk steps j");
  p.add("alpha", a.alpha, "coin angle, rad");
  p.add("coin-phase", a.coin_phase, "coin axis phase, rad");
  p.add("phases", a.phases, "link phases: none or band")->check(CLI::IsMember({"none", "band"}));
  p.add("V0", a.V0, "lattice depth for --phases band, E_R");
  p.add("F0", a.F0, "Zeeman force for --phases band, E_R/d_L");
  p.add("x-bar", a.x_bar, "Zeeman zero point, d_L");
  p.add("twist", a.twist, "extra twist phase on the wrap link, rad");
  p.add("init", a.init, "initial spinor: symmetric, up or down")
      ->check(CLI::IsMember({"symmetric", "up", "down"}));
}

int cmd_walk(Run& run, const WalkArgs& a) {
  const WalkGeometry g(a.sites, a.steps);
  WalkOperatorSpec spec;
  spec.alpha = a.alpha;
  spec.coin_phase = a.coin_phase;
  spec.twist = a.twist;
  if (a.phases == "band") {
    BandOptions bo;
    bo.n_bands = 2;
    const double tau0 = kPi * g.delta_k0() / a.F0;
    spec.phases = peierls_phases(compute_bands(a.V0, bo), g, a.F0, tau0, a.x_bar);
  }
  WalkState init = a.init == "up"     ? WalkState::localized(g, g.origin(), 1.0, 0.0)
                   : a.init == "down" ? WalkState::localized(g, g.origin(), 0.0, 1.0)
                                      : WalkState::symmetric(g);
  const WalkState out = walk_evolve(init, spec, a.steps);
  CsvWriter csv(run.output("walk.csv"));
  csv.comment("ideal walk after " + std::to_string(a.steps) + " steps on " +
              std::to_string(a.sites) + " sites");
  csv.comment("k in k_R; probabilities dimensionless");
  csv.header({"site", "k", "p", "p_up", "p_down"});
  for (int i = 0; i < a.sites; ++i) {
    const double pu = std::norm(out.amplitudes(i, 0)), pd = std::norm(out.amplitudes(i, 1));
    csv.row({double(i), g.site_k(i), pu + pd, pu, pd});
  }
  return kExitOk;
}

// ------------------------------------------------------------------ fig2

struct Fig2Args {
  std::vector<double> V0{5, 7.5, 10, 12.5, 15, 17.5, 20, 22.5, 25, 27.5, 30, 32.5, 35, 37.5, 40, 42.5, 45, 47.5, 50};
  std::vector<int> j{10, 100, 1000, 2000};
  int sites = 20;
  double F0 = 0.2;
  double x_bar = 0.0;
  int m_max = 32;
  int nk = 512;
  bool flat_band = false;
};

void add_fig2(Params& p, Fig2Args& a) {
  p.add("V0", a.V0, "lattice depths, E_R")->delimiter(',');
  p.add("j", a.j, "step counts")->delimiter(',');
  p.add("sites", a.sites, "number of sites n");
  p.add("F0", a.F0, "Zeeman force, E_R/d_L");
  p.add("x-bar", a.x_bar, "Zeeman zero point, d_L");
  p.add("mmax", a.m_max, "plane-wave cutoff");
  p.add("nk", a.nk, "band samples");
  p.flag("flat-band", a.flat_band, "dispersionless synthetic band (control)");
}

int cmd_fig2(Run& run, const Fig2Args& a) {
  InfidelityOptions o;
  o.n_sites = a.sites;
  o.F0 = a.F0;
  o.x_bar = a.x_bar;
  o.m_max = a.m_max;
  o.n_k = a.nk;
  o.flat_band = a.flat_band;
  const auto pts = infidelity_curve(a.V0, a.j, o);
  CsvWriter csv(run.output("fig2.csv"));
  csv.comment("infidelity 1 - |<decorated|reference>|^2 from (1,1)/sqrt(2) at the origin");
  csv.comment("n = " + std::to_string(a.sites) + ", F0 = " + format_number(a.F0) +
              " E_R/d_L, x_bar = " + format_number(a.x_bar) + " d_L; V0 in E_R");
  csv.header({"V0", "j", "infidelity"});
  for (const auto& p : pts) csv.row({p.V0, double(p.steps), p.infidelity});

  // Smallest depth from which every curve decreases monotonically.
  json summary = json::object();
  const std::size_t nj = a.j.size();
  double monotone_from = a.V0.empty() ? 0.0 : a.V0.back();
  for (std::size_t v = a.V0.size(); v-- > 1;) {
    bool ok = true;
    for (std::size_t q = 0; q < nj; ++q)
      if (a.j[q] > 0 && !(pts[v * nj + q].infidelity < pts[(v - 1) * nj + q].infidelity)) ok = false;
    if (!ok) break;
    monotone_from = a.V0[v - 1];
  }
  summary["monotone_from_V0"] = monotone_from;
  json rows = json::array();
  for (const auto& p : pts) rows.push_back({{"V0", p.V0}, {"j", p.steps}, {"infidelity", p.infidelity}});
  summary["points"] = rows;
  write_json_file(run.output("fig2.json"), summary);
  std::cout << "monotone in V0 from V0 = " << monotone_from << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ fig3 / protocol

struct ProtocolArgs {
  double V0 = 20.0;
  double F0 = 0.2;
  double d_lattice_nm = 532.0;
  double omega_x_hz = 10.0;
  double omega_r_hz = 100.0;
  double x_bar = 0.0;
  int sites = 20;
  int steps = 10;
  double alpha = kPi / 2.0;
  std::string reference = "plain";
  bool nonlinear = false;
  double a_s_nm = 5.3;
  double atoms = 100.0;
  int grid_points = 4096;
  double grid_length = 256.0;
  int readout_points = 16384;
  double dt = 0.004;
  double dt_free = 0.1;
  double expansion_time = -1.0;
  double kick_time = -1.0;
  bool no_quarter_period = false;
  bool dump_animation = false;
  long frame_every = 2000;
};

void add_protocol(Params& p, ProtocolArgs& a) {
  p.add("V0", a.V0, "lattice depth, E_R");
  p.add("F0", a.F0, "Zeeman force, E_R/d_L");
  p.add("d-lattice-nm", a.d_lattice_nm, "lattice constant, nm");
  p.add("omega-x-hz", a.omega_x_hz, "longitudinal trap frequency omega_x / 2 pi, Hz");
  p.add("omega-r-hz", a.omega_r_hz, "radial trap frequency omega_r / 2 pi, Hz");
  p.add("x-bar", a.x_bar, "Zeeman zero point, d_L");
  p.add("sites", a.sites, "number of sites n");
  p.add("steps", a.steps, "number of walk steps j");
  p.add("alpha", a.alpha, "coin angle, rad");
  p.add("reference", a.reference, "reference used for the printed TV: plain or dynamical-phases")
      ->check(CLI::IsMember({"plain", "dynamical-phases"}));
  p.flag("nonlinear", a.nonlinear, "include the mean-field term");
  p.add("a-s-nm", a.a_s_nm, "scattering length for --nonlinear, nm");
  p.add("atoms", a.atoms, "atom number for --nonlinear");
  p.add("grid-points", a.grid_points, "simulation grid points");
  p.add("grid-length", a.grid_length, "simulation box, d_L");
  p.add("readout-points", a.readout_points, "grid points for the quarter-period readout");
  p.add("dt", a.dt, "time step with the lattice on, hbar/E_R");
  p.add("dt-free", a.dt_free, "time step without the lattice, hbar/E_R");
  p.add("expansion-time", a.expansion_time, "free expansion, hbar/E_R (< 0: automatic)");
  p.add("kick-time", a.kick_time, "lens duration, hbar/E_R (< 0: automatic)");
  p.flag("no-quarter-period", a.no_quarter_period, "read out after the ramp-down instead");
  p.flag("dump-animation", a.dump_animation, "write per-frame densities");
  p.add("frame-every", a.frame_every, "propagation steps between animation frames");
}

ProtocolConfig protocol_config(const ProtocolArgs& a) {
  ProtocolConfig c;
  c.lattice.V0 = a.V0;
  c.lattice.F0 = a.F0;
  c.lattice.d_lattice = a.d_lattice_nm * 1e-9;
  c.lattice.omega_x = 2.0 * kPi * a.omega_x_hz;
  c.lattice.omega_r = 2.0 * kPi * a.omega_r_hz;
  c.lattice.x_bar = a.x_bar;
  if (a.sites < 2) throw InvalidParameter("sites must be >= 2");
  if (!(a.F0 > 0.0)) throw InvalidParameter("F0 must be positive");
  c.lattice.tau0 = kPi * (2.0 / a.sites) / a.F0;
  if (a.nonlinear)
    c.lattice.g1d = g1d_rescaled(a.a_s_nm * 1e-9, c.lattice.omega_r, a.atoms, c.lattice.d_lattice,
                                 c.constants);
  c.n_sites = a.sites;
  c.steps = a.steps;
  c.alpha = a.alpha;
  c.nonlinear = a.nonlinear;
  c.grid_points = static_cast<std::size_t>(a.grid_points);
  c.grid_length = a.grid_length;
  c.readout_points = static_cast<std::size_t>(a.readout_points);
  c.dt = a.dt;
  c.dt_free = a.dt_free;
  c.expansion_time = a.expansion_time;
  c.kick_time = a.kick_time;
  c.quarter_period_readout = !a.no_quarter_period;
  c.reference_dynamical_phases = a.reference == "dynamical-phases";
  return c;
}

// Frames go to <dir>/frames/<index>.csv as x, |psi_1|^2, |psi_2|^2.
struct FrameWriter {
  fs::path dir;
  long index = 0;
  Run* run;
  void operator()(const std::string& stage, const SpinorField& s) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05ld.csv", index++);
    CsvWriter csv(run->output((fs::path("frames") / name).string()));
    csv.comment("stage " + stage + ", t = " + format_number(s.time) + " hbar/E_R (stage clock)");
    csv.comment("x in d_L; densities in 1/d_L");
    csv.header({"x", "rho_up", "rho_down"});
    for (std::size_t i = 0; i < s.grid.size(); ++i)
      csv.row({s.grid.x(i), std::norm(s.psi1[i]), std::norm(s.psi2[i])});
  }
};

void write_distribution(CsvWriter& csv, const ProtocolResult& r, const ProtocolConfig& c) {
  csv.comment("quasimomentum site distribution after " + std::to_string(c.steps) + " steps, V0 = " +
              format_number(r.params.V0) + " E_R, F0 = " + format_number(r.params.F0) + " E_R/d_L");
  csv.comment("k in k_R; probabilities dimensionless");
  csv.comment("TV(final, plain reference) = " + format_number(r.tv_plain) +
              "; TV(final, dynamical-phase reference) = " + format_number(r.tv_dynamical));
  csv.header({"site", "k", "p_final", "p_reference", "p_reference_dynamical", "p_end_of_walk",
              "p_after_ramp_down"});
  for (std::size_t i = 0; i < r.reference.size(); ++i)
    csv.row({double(i), r.reference.k[i], r.final_distribution.probability[i],
             r.reference.probability[i], r.reference_dynamical.probability[i],
             r.before_ramp_down.probability[i], r.after_ramp_down.probability[i]});
}

ProtocolResult run_with_frames(Run& run, ProtocolConfig& c, const ProtocolArgs& a) {
  std::shared_ptr<FrameWriter> frames;
  if (a.dump_animation) {
    fs::create_directories(run.dir / "frames");
    frames = std::make_shared<FrameWriter>(FrameWriter{run.dir / "frames", 0, &run});
    c.frame_every = a.frame_every;
    c.frame_sink = [frames](const std::string& stage, const SpinorField& s) { (*frames)(stage, s); };
  }
  return run_protocol(c);
}

int cmd_fig3(Run& run, const ProtocolArgs& a) {
  ProtocolConfig c = protocol_config(a);
  const ProtocolResult r = run_with_frames(run, c, a);
  CsvWriter csv(run.output("fig3.csv"));
  write_distribution(csv, r, c);
  std::cout << "TV distance to the " << a.reference << " reference: " << r.tv_reference << '\n';
  return kExitOk;
}

int cmd_protocol(Run& run, const ProtocolArgs& a) {
  ProtocolConfig c = protocol_config(a);
  const ProtocolResult r = run_with_frames(run, c, a);
  {
    CsvWriter csv(run.output("protocol_distribution.csv"));
    write_distribution(csv, r, c);
  }
  {
    CsvWriter csv(run.output("protocol_stages.csv"));
    csv.comment("stage records; t_end in hbar/E_R, x_rms in d_L, k_rms in k_R (unfolded)");
    const double t_unit_ms = 1e3 / recoil_frequency(c.lattice.d_lattice, c.constants);
    csv.comment("1 hbar/E_R = " + format_number(t_unit_ms) + " ms");
    csv.header({"stage", "t_end", "norm", "x_rms", "k_rms"});
    for (const auto& s : r.stages) csv.row(s.name, {s.t_end, s.norm, s.x_rms, s.k_rms});
  }
  json j = {{"tv_reference", r.tv_reference},
            {"tv_plain", r.tv_plain},
            {"tv_dynamical", r.tv_dynamical},
            {"tv_readout_chain", r.tv_readout_chain},
            {"band0_after_ramp_up", r.band0_after_ramp_up},
            {"spatial_freeze", r.spatial_freeze},
            {"expansion_time", r.expansion_time},
            {"kick_time", r.kick_time},
            {"lattice_ramp_time", r.lattice_ramp_time},
            {"force_ramp_time", r.force_ramp_time},
            {"force_hold_time", r.force_hold_time},
            {"omega_x_rescaled", r.params.omega_x0},
            {"g1d_rescaled", r.params.g1d},
            {"tau0", r.params.tau0}};
  write_json_file(run.output("protocol.json"), j);
  std::cout << "TV distance to the " << a.reference << " reference: " << r.tv_reference << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ fig4

struct Fig4Args {
  double V0 = 10.0;
  double F0 = 0.2;
  double omega_x_hz = 2.5;
  double omega_r_hz = 100.0;
  double d_lattice_nm = 532.0;
  double a_s_nm = 5.3;
  double atoms_repulsive = 100.0;
  double atoms_attractive = 10.0;
  double g = std::numeric_limits<double>::quiet_NaN();
  int sites = 20;
  int steps = 10;
  int grid_points = 2048;
  double grid_length = 256.0;
  double dt = 0.005;
  double dtau = 0.05;
  double ground_tolerance = 1e-13;
};

void add_fig4(Params& p, Fig4Args& a) {
  p.add("V0", a.V0, "lattice depth, E_R");
  p.add("F0", a.F0, "Zeeman force, E_R/d_L");
  p.add("omega-x-hz", a.omega_x_hz, "longitudinal trap frequency / 2 pi, Hz");
  p.add("omega-r-hz", a.omega_r_hz, "radial trap frequency / 2 pi, Hz");
  p.add("d-lattice-nm", a.d_lattice_nm, "lattice constant, nm");
  p.add("a-s-nm", a.a_s_nm, "scattering length magnitude, nm");
  p.add("atoms-repulsive", a.atoms_repulsive, "atom number of the repulsive run");
  p.add("atoms-attractive", a.atoms_attractive, "atom number of the attractive run");
  p.add("g", a.g, "use this rescaled coupling (E_R d_L) for all three runs");
  p.add("sites", a.sites, "number of sites n");
  p.add("steps", a.steps, "number of walk steps j");
  p.add("grid-points", a.grid_points, "grid points");
  p.add("grid-length", a.grid_length, "box length, d_L");
  p.add("dt", a.dt, "time step, hbar/E_R");
  p.add("dtau", a.dtau, "imaginary time step, hbar/E_R");
  p.add("ground-tolerance", a.ground_tolerance, "ground-state energy change per step, E_R");
}

int cmd_fig4(Run& run, const Fig4Args& a) {
  PhysicalConstants pc;
  LatticeConfig lc;
  lc.d_lattice = a.d_lattice_nm * 1e-9;
  lc.omega_x = 2.0 * kPi * a.omega_x_hz;
  lc.omega_r = 2.0 * kPi * a.omega_r_hz;
  lc.V0 = a.V0;
  lc.F0 = a.F0;
  const RescaledParams rp = to_rescaled(lc, pc);
  NonlinearWalkConfig c;
  c.V0 = a.V0;
  c.F0 = a.F0;
  c.omega = rp.omega_x0;
  c.n_sites = a.sites;
  c.steps = a.steps;
  c.grid_points = static_cast<std::size_t>(a.grid_points);
  c.grid_length = a.grid_length;
  c.dt = a.dt;
  c.dtau = a.dtau;
  c.ground_tolerance = a.ground_tolerance;

  const bool fixed = !std::isnan(a.g);
  const double g_rep = fixed ? a.g : g1d_rescaled(a.a_s_nm * 1e-9, lc.omega_r, a.atoms_repulsive, lc.d_lattice, pc);
  const double g_att = fixed ? a.g : g1d_rescaled(-a.a_s_nm * 1e-9, lc.omega_r, a.atoms_attractive, lc.d_lattice, pc);
  const double g_lin = fixed ? a.g : 0.0;
  const auto lin = run_nonlinear_walk(c, g_lin);
  const auto rep = run_nonlinear_walk(c, g_rep);
  const auto att = run_nonlinear_walk(c, g_att);

  CsvWriter csv(run.output("fig4.csv"));
  csv.comment("quasimomentum distributions after " + std::to_string(a.steps) + " steps, V0 = " +
              format_number(a.V0) + " E_R, trap kept on");
  csv.comment("g (E_R d_L): linear = " + format_number(g_lin) + ", repulsive = " +
              format_number(g_rep) + ", attractive = " + format_number(g_att));
  csv.comment("k in k_R; probabilities dimensionless");
  csv.header({"site", "k", "p_linear", "p_repulsive", "p_attractive"});
  for (std::size_t i = 0; i < lin.distribution.size(); ++i)
    csv.row({double(i), lin.distribution.k[i], lin.distribution.probability[i],
             rep.distribution.probability[i], att.distribution.probability[i]});

  const bool ordered = rep.central_width < lin.central_width && lin.central_width < att.central_width;
  auto summary = [](const NonlinearWalkResult& r) {
    return json{{"g", r.g},
                {"central_width", r.central_width},
                {"mean_width", r.mean_width},
                {"initial_width", r.initial_width},
                {"chemical_potential", r.chemical_potential},
                {"ground_steps", r.ground_steps}};
  };
  write_json_file(run.output("fig4.json"),
                  {{"linear", summary(lin)},
                   {"repulsive", summary(rep)},
                   {"attractive", summary(att)},
                   {"ordering_repulsive_linear_attractive", ordered}});
  std::cout << "central widths (k_R): repulsive " << rep.central_width << ", linear "
            << lin.central_width << ", attractive " << att.central_width << '\n';
  if (!fixed && g_rep > 0.0 && g_att < 0.0 && !ordered) {
    std::cerr << "error: width ordering repulsive < linear < attractive violated\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// ------------------------------------------------------------------ decohere

struct SpectrumArgs {
  double rms = 0.0;
  double corner_hz = 10.0;
  std::string csv;
};

struct DecohereArgs {
  double tau_us = 100.0;
  double beta = 3.0;
  int sites = 20;
  double rabi_khz = 200.0;
  double cutoff_hz = 0.01;
  double max_hz = 1e6;
  SpectrumArgs force{0.004, 10.0, ""};
  SpectrumArgs shift{1e-10, 10.0, ""};
  SpectrumArgs coin{1e-10, 10.0, ""};
  long monte_carlo = 0;
  int mc_steps = 100;
  int mc_batches = 20;
};

void add_decohere(Params& p, DecohereArgs& a) {
  p.add("tau-us", a.tau_us, "step duration, microseconds");
  p.add("beta", a.beta, "peak resolution: site spacing over peak width");
  p.add("sites", a.sites, "number of sites n");
  p.add("rabi-khz", a.rabi_khz, "coin Rabi frequency Omega_R / 2 pi, kHz");
  p.add("cutoff-hz", a.cutoff_hz, "low-frequency cutoff omega_c / 2 pi, Hz");
  p.add("max-hz", a.max_hz, "top of the spectral grid / 2 pi, Hz");
  p.add("force-rms", a.force.rms, "relative rms force (gradient) fluctuation");
  p.add("force-corner-hz", a.force.corner_hz, "Lorentzian corner of the force noise, Hz");
  p.add("force-csv", a.force.csv, "force spectrum CSV: omega (rad/s), S ((dF/F)^2 s/rad)");
  p.add("shift-rms", a.shift.rms, "rms of B' x_bar, tesla");
  p.add("shift-corner-hz", a.shift.corner_hz, "Lorentzian corner of the B' x_bar noise, Hz");
  p.add("shift-csv", a.shift.csv, "B' x_bar spectrum CSV: omega (rad/s), S (T^2 s/rad)");
  p.add("coin-rms", a.coin.rms, "rms stray field during the coin, tesla");
  p.add("coin-corner-hz", a.coin.corner_hz, "Lorentzian corner of the coin field noise, Hz");
  p.add("coin-csv", a.coin.csv, "coin field spectrum CSV: omega (rad/s), S (T^2 s/rad)");
  p.add("monte-carlo", a.monte_carlo, "Monte-Carlo realizations for a cross-check (0: off)");
  p.add("mc-steps", a.mc_steps, "walk steps of the Monte-Carlo check");
  p.add("mc-batches", a.mc_batches, "batches for Monte-Carlo error bars");
}

NoiseSpectrum read_spectrum_csv(const std::string& path, double omega_c) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open spectrum " + path);
  std::vector<double> w, s;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (!(row >> a >> b)) continue;  // header
    w.push_back(a);
    s.push_back(b);
  }
  return NoiseSpectrum(std::move(w), std::move(s), omega_c);
}

NoiseSpectrum make_spectrum(const SpectrumArgs& s, double omega_c, double omega_max) {
  if (!s.csv.empty()) return read_spectrum_csv(s.csv, omega_c);
  if (s.rms == 0.0) return NoiseSpectrum::zero(omega_c, omega_max);
  return NoiseSpectrum::lorentzian(s.rms * s.rms, 2.0 * kPi * s.corner_hz, omega_c, omega_max);
}

int cmd_decohere(Run& run, const DecohereArgs& a, const Common& common) {
  const PhysicalConstants pc;
  const double tau = a.tau_us * 1e-6;
  const double wc = 2.0 * kPi * a.cutoff_hz, wmax = 2.0 * kPi * a.max_hz;
  const NoiseSpectrum s_force = make_spectrum(a.force, wc, wmax);
  const NoiseSpectrum s_shift = make_spectrum(a.shift, wc, wmax);
  const NoiseSpectrum s_coin = make_spectrum(a.coin, wc, wmax);

  // Relative force noise: dk = dk0 dF/F at DC, so the window integral is
  // scaled by (dk0 / tau)^2 to give k_R^2.
  const double dk0 = 2.0 / a.sites;
  DephasingReport rep;
  rep.var_k = step_size_variance(s_force, tau) * (dk0 / tau) * (dk0 / tau);
  const double sigma_k = site_peak_width(a.beta, a.sites);
  rep.p = dephasing_per_step(rep.var_k, sigma_k);
  const PhaseDephasing ph = shift_phase_variance(s_shift, tau, pc);
  rep.var_phi = ph.variance;
  rep.coherence = ph.coherence;
  rep.coherent_steps = ph.coherent_steps;
  const CoinFidelity cf = coin_process_fidelity(s_coin, 2.0 * kPi * a.rabi_khz * 1e3, pc);
  rep.coin_error = cf.error;
  rep.gaussian_phase_assumption_questionable = s_shift.single_tone();

  auto finite_or_inf = [](double v) { return std::isfinite(v) ? json(v) : json("inf"); };
  json j = {{"p", rep.p},
            {"var_k", rep.var_k},
            {"sigma_k", sigma_k},
            {"var_phi", rep.var_phi},
            {"coherence", rep.coherence},
            {"coherent_steps", finite_or_inf(rep.coherent_steps)},
            {"coin_error", rep.coin_error},
            {"coin_process_fidelity_sq", cf.process_sq},
            {"coin_average_fidelity_sq", cf.average_sq},
            {"gaussian_phase_assumption_questionable", rep.gaussian_phase_assumption_questionable},
            {"units", {{"var_k", "k_R^2"}, {"sigma_k", "k_R"}, {"var_phi", "rad^2"}}}};

  CsvWriter csv(run.output("decohere_decay.csv"));
  csv.comment("coherence of the relative spin phase vs step; analytic exp(-j var_phi / 2)");
  csv.comment("var_phi = " + format_number(rep.var_phi) + " rad^2 per step, tau = " +
              format_number(a.tau_us) + " us");
  if (a.monte_carlo > 0) {
    const int n = std::max(a.sites, 2 * a.mc_steps + 4);
    const WalkGeometry g(n, a.mc_steps);
    MonteCarloNoise noise{rep.var_phi, rep.var_k, rep.var_k > 0.0 ? sigma_k : 0.0};
    MonteCarloOptions mo;
    mo.realizations = a.monte_carlo;
    mo.seed = common.seed;
    mo.threads = common.threads;
    mo.batches = a.mc_batches;
    const auto mc = monte_carlo_noisy_walk(WalkState::symmetric(g), {}, a.mc_steps, noise, mo);
    csv.header({"j", "coherence_analytic", "coherence_mc", "coherence_mc_error", "site_variance_mc"});
    int within = 0;
    for (int s = 0; s <= a.mc_steps; ++s) {
      const double an = std::exp(-0.5 * rep.var_phi * s);
      csv.row({double(s), an, mc.coherence[s], mc.coherence_error[s], mc.site_variance[s]});
      if (std::abs(mc.coherence[s] - an) <= 3.0 * mc.coherence_error[s] + 1e-12) ++within;
    }
    j["monte_carlo"] = {{"realizations", a.monte_carlo},
                        {"steps", a.mc_steps},
                        {"final_coherence", mc.coherence.back()},
                        {"final_coherence_error", mc.coherence_error.back()},
                        {"fraction_within_3_sigma", double(within) / (a.mc_steps + 1)}};
  } else {
    csv.header({"j", "coherence_analytic"});
    for (int s = 0; s <= a.mc_steps; ++s) csv.row({double(s), std::exp(-0.5 * rep.var_phi * s)});
  }
  write_json_file(run.output("decohere.json"), j);
  std::cout << "p = " << rep.p << ", C = " << rep.coherence << ", coherent steps = "
            << rep.coherent_steps << ", coin error = " << rep.coin_error << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bzwalk: quantum walks of a spinor condensate in the Brillouin zone"};
  app.set_version_flag("--version", code_version());
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config_path, "JSON config or run manifest; flags override it");
  app.add_option("--out", common.out_dir, std::string("output directory (default $") + kOutputDirEnv + " or .)");
  app.add_option("--threads", common.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();

  std::map<std::string, std::unique_ptr<Params>> params;
  auto sub = [&](const std::string& name, const std::string& desc) {
    CLI::App* s = app.add_subcommand(name, desc);
    params[name] = std::make_unique<Params>(s);
    return params[name].get();
  };

  BandArgs band_args;
  WalkArgs walk_args;
  Fig2Args fig2_args;
  ProtocolArgs fig3_args, protocol_args;
  Fig4Args fig4_args;
  DecohereArgs decohere_args;
  add_band(*sub("band", "Bloch bands and Berry connection"), band_args);
  add_walk(*sub("walk", "ideal discrete-time walk on the zone ring"), walk_args);
  add_fig2(*sub("fig2", "infidelity of the walk vs lattice depth"), fig2_args);
  add_protocol(*sub("fig3", "continuum protocol, final distribution vs reference"), fig3_args);
  add_fig4(*sub("fig4", "interaction comparison: linear, repulsive, attractive"), fig4_args);
  add_protocol(*sub("protocol", "continuum protocol with stage records"), protocol_args);
  add_decohere(*sub("decohere", "magnetic-noise estimates and Monte-Carlo cross-check"), decohere_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Params& p = *params[command];
    p.apply(load_config(common.config_path, command));
    Run run{command, &common, &p, resolve_output_directory(common.out_dir), {}};
    int code = kExitOk;
    if (command == "band") code = cmd_band(run, band_args);
    else if (command == "walk") code = cmd_walk(run, walk_args);
    else if (command == "fig2") code = cmd_fig2(run, fig2_args);
    else if (command == "fig3") code = cmd_fig3(run, fig3_args);
    else if (command == "fig4") code = cmd_fig4(run, fig4_args);
    else if (command == "protocol") code = cmd_protocol(run, protocol_args);
    else if (command == "decohere") code = cmd_decohere(run, decohere_args, common);
    run.finish();
    return code;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
