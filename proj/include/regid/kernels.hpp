#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "regid/types.hpp"

namespace regid {

enum class KernelFamily {
  AkaikeSmoothness,
  DiagExp,
  PowerDecay,
  TC,
  BlockDiagMIMO,
  ConicCombo,
  StableHankelPrecision
};

std::string kernel_family_name(KernelFamily family);
KernelFamily kernel_family_from_name(const std::string& name);

struct KernelDims {
  Eigen::Index T = 0, p = 1, m = 1;
  Eigen::Index d() const { return T * p * m; }
};

/// Named prior-covariance family with partitioned hyperparameters: scale
/// lambda (one per channel block for MIMO) and a family-specific shape vector
/// (beta for TC, rho for DiagExp, alpha for PowerDecay; Akaike's gamma is the
/// scale itself).
struct KernelSpec {
  KernelFamily family = KernelFamily::TC;
  Eigen::VectorXd scale;
  Eigen::VectorXd shape;
  KernelDims dims;
  double sample_time = 1.0;
};

struct KernelMatrix {
  Eigen::MatrixXd K;
  KernelSpec spec;
};

/// Truncated series expansion of a kernel: K ~ sum_i psi_i psi_i^T.
struct BasisExpansion {
  std::vector<Eigen::VectorXd> vectors;  // psi_i, i = 0..B-1
  Eigen::VectorXd weights_l1;            // mu_i = ||psi_i||_1
};

// -- scalar-channel kernel constructors (T x T) ------------------------------

/// diag(1/gamma * 1/k^2), k = 1..T.
KernelMatrix akaike_smoothness_kernel(Eigen::Index T, double gamma);

/// lambda * diag(1, rho, rho^2, ..., rho^(T-1)), 0 < rho < 1.
KernelMatrix diag_exp_kernel(Eigen::Index T, double lambda, double rho);

/// lambda * diag(1/k^alpha), alpha > 1 so realizations stay summable.
KernelMatrix power_decay_kernel(Eigen::Index T, double lambda, double alpha);

/// First-order stable-spline / tuned-correlated kernel:
/// K[i,j] = lambda * min(exp(-beta*i*Tc), exp(-beta*j*Tc)), i,j = 1..T.
KernelMatrix tc_kernel(Eigen::Index T, double lambda, double beta, double Tc = 1.0);

/// Series expansion of the unit-scale TC kernel (decaying exponential plus a
/// time-warped Brownian bridge): psi_0[k] = exp(-beta*k*Tc),
/// psi_i[k] = sqrt(2) sin(pi*i*exp(-beta*k*Tc))/(pi*i). The default
/// truncation keeps the tail well below typical noise floors for T <= 100.
BasisExpansion tc_basis(Eigen::Index T, double beta, double Tc, int B = 500);

/// Covariance of the backward AR(1) construction: entries c * lar^max(i,j).
/// Identical to tc_kernel(T, c, -log(lar), 1).
KernelMatrix ar1_kernel(Eigen::Index T, double c, double lambda_ar);

/// Closed-form inverse of ar1_kernel; tridiagonal.
Eigen::MatrixXd ar1_precision(Eigen::Index T, double c, double lambda_ar);

// -- composition --------------------------------------------------------------

/// Assemble a d x d block-diagonal MIMO kernel from per-channel specs given in
/// channel-major order ((i,j) pairs column-major). A zero-scale spec yields an
/// exactly zero block.
KernelMatrix block_diag_mimo(const std::vector<KernelSpec>& channel_specs, Eigen::Index p,
                             Eigen::Index m);
KernelMatrix block_diag_mimo(const std::vector<Eigen::MatrixXd>& blocks, Eigen::Index p,
                             Eigen::Index m);

/// Realize a scalar-channel spec as its T x T matrix; scale 0 gives zeros.
Eigen::MatrixXd realize_channel_kernel(const KernelSpec& spec);

KernelMatrix conic_combination(const std::vector<KernelMatrix>& kernels,
                               const Eigen::VectorXd& weights);

// -- numerical helpers ---------------------------------------------------------

/// Symmetrize and check min eigenvalue >= -rel_tol * max eigenvalue.
bool is_psd(const Eigen::MatrixXd& K, double rel_tol = 1e-10);

/// Eigen-based factor L with K = L L^T; tiny negative eigenvalues are clamped.
/// Works for singular kernels (ARD-zeroed blocks included).
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& K);

// -- free-hyperparameter template for evidence optimization -------------------

/// A kernel family with free hyperparameters theta = [scales..., shapes...]
/// and box bounds, as consumed by the evidence optimizer. MIMO templates hold
/// one scale per channel and either a shared or per-channel shape.
struct KernelTemplate {
  KernelFamily family = KernelFamily::TC;
  KernelDims dims;
  double sample_time = 1.0;
  KernelFamily block_family = KernelFamily::TC;  // used when family == BlockDiagMIMO
  bool shared_shape = true;
  std::optional<Eigen::MatrixXd> fixed_base;  // when set: K = theta[0] * fixed_base
  Eigen::VectorXd lower, upper;               // bounds on theta, strictly positive

  Eigen::Index n_scales() const;
  Eigen::Index n_shapes() const;
  Eigen::Index n_free() const { return n_scales() + n_shapes(); }

  Eigen::MatrixXd realize(const Eigen::VectorXd& theta) const;
  /// Factor L with realize(theta) = L L^T, computed blockwise.
  Eigen::MatrixXd realize_factor(const Eigen::VectorXd& theta) const;
  /// dK/dtheta_i in natural (not log) coordinates.
  std::vector<Eigen::MatrixXd> gradients(const Eigen::VectorXd& theta) const;
  KernelSpec to_spec(const Eigen::VectorXd& theta) const;
  void validate() const;

  static KernelTemplate tc(Eigen::Index T, double Tc = 1.0);
  static KernelTemplate diag_exp(Eigen::Index T);
  static KernelTemplate power_decay(Eigen::Index T);
  static KernelTemplate akaike(Eigen::Index T);
  static KernelTemplate mimo(KernelFamily block_family, Eigen::Index T, Eigen::Index p,
                             Eigen::Index m, double Tc = 1.0, bool shared_shape = true);
  /// Scale-only template around a fixed-shape base matrix.
  static KernelTemplate fixed_shape(const Eigen::MatrixXd& base);
};

}  // namespace regid
