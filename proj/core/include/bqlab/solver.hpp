#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "bqlab/constants.hpp"
#include "bqlab/norms.hpp"
#include "bqlab/propagator.hpp"
#include "bqlab/trajectory.hpp"
#include "bqlab/windows.hpp"

namespace bqlab {

struct SolverConfig {
  ProblemParams pp;
  double T = 1.0;
  std::size_t M = 100;
  std::size_t K_max = 12;
  double tol_fixed_point = 1e-12;
  double dt_ref = 0.05;
  /// Output trajectories keep every sample_every-th node.
  std::size_t sample_every = 1;
  /// Weighted norms inside picard_solve use every norm_every-th node; 0 means sample_every.
  std::size_t norm_every = 0;
  /// +1 integrates over [0, T], -1 over [-T, 0].
  int direction = 1;
  /// false drops the u^lambda term.
  bool nonlinear = true;

  ModParams mod() const { return {pp.p, pp.q, pp.s}; }
  double dt() const { return T / double(M); }
};

void validate(const SolverConfig& cfg);

/// Node times direction * m * T / M for m = 0..M (node order, not sorted).
std::vector<double> node_times(const SolverConfig& cfg);

struct FixedPointReport {
  /// Weighted L^inf_{alpha,s} norm of each iterate, starting with the linear flow.
  std::vector<double> iterate_norms;
  /// |z^{k+1} - z^k| / |z^k - z^{k-1}| in the weighted norm.
  std::vector<double> contraction_ratios;
  /// l2-in-time relative change of each iteration.
  std::vector<double> relative_changes;
  bool converged = false;
  /// Weighted norm of the linear flow.
  double epsilon = 0.0;
  double final_norm = 0.0;
  /// final_norm <= 2 epsilon.
  bool within_ball = false;
  std::size_t iterations = 0;
};

struct PicardResult {
  Trajectory trajectory;
  FixedPointReport report;
};

/// B(t) z0 at the output nodes.
Trajectory linear_trajectory(const StatePair& z0, const SolverConfig& cfg);

/// One application of the Duhamel map to a trajectory sampled at every node.
Trajectory duhamel_apply(const Trajectory& traj, const StatePair& z0, const SolverConfig& cfg);

/// Picard iteration from the linear flow, trapezoid quadrature in the interaction picture.
PicardResult picard_solve(const StatePair& z0, const SolverConfig& cfg, const WindowBank& bank);

/// Integrating-factor RK4 on W = B(-t) z with step <= dt_ref; samples at the output nodes.
Trajectory reference_integrate(const StatePair& z0, const SolverConfig& cfg);

/// L2 norm of u_tt - Delta u + Delta^2 u + Delta(u^lambda) at interior samples;
/// lambda = nullopt checks the linear equation.
std::vector<double> residual_fourth_order(const Trajectory& traj, std::optional<int> lambda);

struct ScatteringResult {
  StatePair data;
  double tail_bound = 0.0;
  /// sup_t (1+|t|)^{alpha lambda} |u^lambda(t)|_{M^s_{p',q}}.
  double forcing_sup = 0.0;
};

/// z0 - int_0^{+-T} B(-tau) [0, u^lambda] dtau by trapezoid over the samples.
ScatteringResult scattering_state(const Trajectory& traj, int direction, const SolverConfig& cfg,
                                  const WindowBank& bank);

/// sup over samples of |z(t) - w(t)|_{L2 x L2} / sup |w(t)|_{L2 x L2}; both on the same times.
double sup_relative_difference(const Trajectory& z, const Trajectory& w);

}  // namespace bqlab
