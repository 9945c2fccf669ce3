#pragma once

// Discrete-time quantum walk on the ring of n quasimomentum sites.
// One step is W = U_shift U_coin; spin up (column 0) hops to site i + 1 with
// phase exp(i phi_+(i)), spin down (column 1) hops to i - 1 with
// exp(i phi_-(i)). Crossing the zone edge forwards multiplies by
// exp(i twist), backwards by exp(-i twist).

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "bzwalk/band.hpp"
#include "bzwalk/units.hpp"

namespace bzwalk {

struct WalkState {
  explicit WalkState(WalkGeometry g)
      : geometry(g), amplitudes(Eigen::MatrixXcd::Zero(g.n_sites(), 2)) {}

  WalkGeometry geometry;
  Eigen::MatrixXcd amplitudes;  // n_sites x 2
  double twist = 0.0;

  /// Spinor (up, down) on one site.
  static WalkState localized(WalkGeometry g, int site, cplx up, cplx down);
  /// (1, 1)/sqrt(2) at the origin. It is invariant under the coin up to a
  /// phase and gives a left-right symmetric distribution.
  static WalkState symmetric(WalkGeometry g);

  double norm() const { return amplitudes.squaredNorm(); }
  /// Spin-summed site probabilities.
  std::vector<double> probabilities() const;
};

enum class BoundaryMode { ring, open_subregion };

struct WalkOperatorSpec {
  double alpha = kPi / 2.0;
  double coin_phase = 0.0;
  std::optional<PeierlsTable> phases;  // none: all link phases zero
  double twist = 0.0;
  BoundaryMode boundary = BoundaryMode::ring;
  /// Allowed sites in open-subregion mode, inclusive. Default: all sites
  /// with the wrap link forbidden.
  int open_first = 0;
  int open_last = -1;
};

/// Coin matrix [[c, i s e^{-i p}], [i s e^{i p}, c]], c = cos(alpha/2), s = sin(alpha/2).
Eigen::Matrix2cd coin_matrix(double alpha, double phase = 0.0);

/// Apply j steps of coin-then-shift.
WalkState walk_evolve(const WalkState& initial, const WalkOperatorSpec& spec, int steps);

/// Precomputed single-step operator; apply() performs one coin-then-shift
/// step in place on an n_sites x 2 amplitude matrix.
class WalkOperator {
 public:
  WalkOperator(const WalkGeometry& geometry, const WalkOperatorSpec& spec);
  void apply(Eigen::MatrixXcd& amplitudes, Eigen::MatrixXcd& scratch) const;
  const Eigen::Matrix2cd& coin() const { return coin_; }
  const std::vector<cplx>& forward_factors() const { return fwd_; }
  const std::vector<cplx>& backward_factors() const { return bwd_; }

 private:
  int n_;
  Eigen::Matrix2cd coin_;
  std::vector<cplx> fwd_, bwd_;  // link factors leaving site i, twist included
  bool open_;
  int first_, last_;
};

struct GaugeReduction {
  std::vector<double> sum;  // s(k_i) = phi_+(i) + phi_-(i+1), wrapped
  double gamma = 0.0;       // half the circular mean of s
  std::vector<double> residual;  // s(k_i) - 2 gamma, wrapped; zero iff locally removable
  double max_residual = 0.0;
  bool removable = false;
  /// Gauge-invariant loop phase sum_i (phi_+(i) - gamma - residual_i / 2), wrapped.
  double twist = 0.0;
  bool globally_removable = false;
  /// Canonical gauge representative: residual_i / 2 on both links of pair i,
  /// no dynamical offset. Walking with it plus `twist` reproduces the
  /// original walk up to the global phase exp(i gamma j).
  PeierlsTable residual_table;
};

GaugeReduction gauge_reduce(const PeierlsTable& table, double tolerance = 1e-10);

/// phi = -pi n dk0 x_bar + zak_phase, wrapped to (-pi, pi]. This is the loop
/// phase sum_k phi_+(k) accumulated by a forward walker (x_bar in d_L).
double twist_phase(const WalkGeometry& geometry, double x_bar, double zak_phase);

/// Two-component amplitude on the uniform periodic k grid
/// k_m = -1 + (m + 1) 2/M, m = 0..M-1.
struct DiracState {
  std::vector<cplx> up;
  std::vector<cplx> down;

  std::size_t size() const { return up.size(); }
  double norm() const;  // sum |.|^2 (dk weight omitted)
  static double k_of(std::size_t m, std::size_t size) {
    return -1.0 + static_cast<double>(m + 1) * 2.0 / static_cast<double>(size);
  }
};

/// Long-wavelength limit of the walk,
///   i d/dt psi = [-i (F0/pi) sigma_z d/dk + (Omega/2) sigma_x] psi,
/// so spin up drifts towards +k at rate F0/pi. Strang splitting into exact
/// spectral translations and local rotations. A walk with coin angle alpha
/// and step tau0 corresponds to Omega tau0 = -alpha.
DiracState dirac_propagate(const DiracState& initial, double F0, double omega_rabi, double t,
                           int n_steps);

}  // namespace bzwalk
