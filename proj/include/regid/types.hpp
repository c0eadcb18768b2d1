#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

namespace regid {

/// Time-aligned multivariable input/output records with a common sample time.
struct IODataset {
  Eigen::MatrixXd inputs;   // N x m, one row per sample
  Eigen::MatrixXd outputs;  // N x p
  double sample_time = 1.0;

  Eigen::Index samples() const { return outputs.rows(); }
  Eigen::Index n_inputs() const { return inputs.cols(); }
  Eigen::Index n_outputs() const { return outputs.cols(); }

  void validate() const;
};

/// FIR impulse response: matrix coefficients g_k (p x m) for lags k = 1..T.
///
/// The vectorized form is channel-major: for each output/input pair (i,j),
/// taken in column-major pair order, the T lags of that scalar channel are
/// contiguous. Block-diagonal MIMO kernels are literally block diagonal in
/// this ordering.
struct ImpulseResponse {
  std::vector<Eigen::MatrixXd> coeffs;  // lag k stored at index k-1

  Eigen::Index truncation() const { return static_cast<Eigen::Index>(coeffs.size()); }
  Eigen::Index n_outputs() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
  Eigen::Index n_inputs() const { return coeffs.empty() ? 0 : coeffs.front().cols(); }
  Eigen::Index dim() const { return truncation() * n_outputs() * n_inputs(); }

  Eigen::VectorXd vectorize() const;
  static ImpulseResponse devectorize(const Eigen::VectorXd& g, Eigen::Index T,
                                     Eigen::Index p, Eigen::Index m);

  /// SISO convenience: one scalar coefficient per lag.
  static ImpulseResponse from_sequence(const Eigen::VectorXd& g);
  /// The (i,j) scalar channel as a T-vector of lag coefficients.
  Eigen::VectorXd channel(Eigen::Index i, Eigen::Index j) const;

  void validate() const;
};

/// How pre-sample inputs are treated when the regressor matrix is assembled.
enum class InitialCondition {
  ZeroPad,  // unobserved inputs before t=1 are zero; keeps all N samples
  Trim      // drop the first T output samples; no transient bias
};

/// Stacked linear-regression form of the FIR estimation problem: Y = Phi g + E.
/// Rows are time-major (p consecutive rows per retained sample).
struct FirRegression {
  Eigen::VectorXd Y;
  Eigen::MatrixXd Phi;
  Eigen::Index T = 0, p = 0, m = 0, N = 0;
  InitialCondition policy = InitialCondition::ZeroPad;
  std::optional<double> noise_variance;

  Eigen::Index d() const { return T * p * m; }
  Eigen::Index n_rows() const { return Y.size(); }
};

struct FitReport {
  double impulse_mse = std::numeric_limits<double>::quiet_NaN();
  double prediction_mse = std::numeric_limits<double>::quiet_NaN();
  double fit_percent = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace regid
