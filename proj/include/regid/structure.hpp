#pragma once

#include "regid/bayes.hpp"

namespace regid {

/// Linear operator from a vectorized impulse response to the r x c block
/// Hankel matrix with block (i,j) = g_{i+j-1}, plus its adjoint. Requires
/// r + c - 1 <= T so every block exists.
struct HankelMap {
  Eigen::Index r = 0, c = 0, p = 1, m = 1, T = 0;

  HankelMap() = default;
  HankelMap(Eigen::Index r_, Eigen::Index c_, Eigen::Index p_, Eigen::Index m_, Eigen::Index T_);

  Eigen::Index rows() const { return r * p; }
  Eigen::Index cols() const { return c * m; }
  Eigen::Index dim() const { return T * p * m; }

  Eigen::MatrixXd apply(const Eigen::VectorXd& g) const;
  Eigen::VectorXd adjoint(const Eigen::MatrixXd& M) const;
  /// Number of Hankel blocks fed by each lag (zero for lags past r+c-1).
  Eigen::VectorXd antidiagonal_counts() const;
};

/// Near-square default shape: r = ceil((T+1)/2), c = T+1-r, covering all lags.
std::pair<Eigen::Index, Eigen::Index> default_hankel_shape(Eigen::Index T);

Eigen::MatrixXd hankel(const ImpulseResponse& g, Eigen::Index r, Eigen::Index c);
Eigen::VectorXd hankel_adjoint(const Eigen::MatrixXd& M, Eigen::Index r, Eigen::Index c,
                               Eigen::Index p, Eigen::Index m, Eigen::Index T);

// -- nuclear-norm penalized identification ------------------------------------

struct NuclearNormOptions {
  double tolerance = 1e-8;  // relative objective change
  int max_iterations = 2000;
  double initial_step = 1.0;
};

struct NuclearNormResult {
  ImpulseResponse estimate;
  std::vector<double> objective_trace;  // accepted iterates; nonincreasing
  bool converged = false;
  bool hit_iteration_cap = false;
  int iterations = 0;
};

/// Minimize ||Y - Phi g||^2 + eta ||H(g)||_* by proximal gradient steps with
/// singular-value soft-thresholding on the Hankel variable; a backtracking
/// line search certifies the objective never increases.
NuclearNormResult nuclear_norm_identify(const FirRegression& problem, double eta, Eigen::Index r,
                                        Eigen::Index c, const NuclearNormOptions& opts = {});

// -- stable-Hankel prior --------------------------------------------------------

/// Gaussian prior combining a stability kernel with subspace-weighted Hankel
/// energy: J(g) = ls g'Ks^-1 g + l1 tr(P_U H H') + l2 tr(P_U_perp H H').
struct StableHankelSpec {
  Eigen::MatrixXd K_s;
  Eigen::MatrixXd U_n;  // orthonormal columns in the Hankel row space
  double lambda_s = 1.0, lambda_1 = 1.0, lambda_2 = 1.0;
  HankelMap hankel;

  void validate() const;
};

double stable_hankel_penalty(const ImpulseResponse& g, const StableHankelSpec& spec);
Eigen::MatrixXd stable_hankel_precision(const StableHankelSpec& spec);

struct StableHankelOptions {
  Eigen::Index n_max = 4;
  int max_sweeps = 20;
  double tolerance = 1e-5;  // relative change of the estimate between sweeps
  double sigma2 = 0.0;      // 0: residual plug-in
  double lambda_lower = 1e-6, lambda_upper = 1e6;
  std::optional<std::pair<double, double>> fixed_lambda12;  // pin (l1, l2)
  OptimizerConfig optimizer{2, 300, 1e-7, false};
};

struct StableHankelResult {
  Estimate estimate;
  Eigen::Index selected_n = 0;
  Eigen::VectorXd evidence_by_n;
  double lambda_s = 0.0, lambda_1 = 0.0, lambda_2 = 0.0;
  int sweeps = 0;
};

/// Alternating scheme: subspace from the SVD of the current Hankel estimate,
/// scales by evidence maximization, posterior mean refresh; the rank n is
/// selected by the highest final evidence.
StableHankelResult stable_hankel_identify(const FirRegression& problem,
                                          const Eigen::MatrixXd& K_s, Eigen::Index r,
                                          Eigen::Index c, const StableHankelOptions& opts = {});

// -- ARD channel selection -------------------------------------------------------

struct ArdOptions {
  KernelFamily block_family = KernelFamily::TC;
  bool shared_shape = true;
  Sigma2Policy sigma2_policy = Sigma2Policy::ResidualPlugin;
  double sigma2_fixed = 0.0;
  OptimizerConfig optimizer;
  double zero_tolerance = 1e-10;  // scales this close to the lower bound count as zero
};

struct ArdResult {
  Estimate estimate;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> channel_graph;  // p x m
  Eigen::VectorXd channel_scales;  // tuned scales, channel-major; exact zeros
};

/// Per-channel evidence maximization on the block-diagonal MIMO kernel.
/// Channels whose scale lands at zero (thresholded, or where zeroing does not
/// cost evidence) are reported absent with exactly zero impulse responses.
ArdResult ard_mimo_identify(const IODataset& data, Eigen::Index T, const ArdOptions& opts = {});

}  // namespace regid
