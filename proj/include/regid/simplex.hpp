#pragma once

#include <Eigen/Dense>

#include <functional>

namespace regid {

struct SimplexOptions {
  int max_iterations = 400;
  double tolerance = 1e-6;    // convergence on the simplex objective spread
  double initial_step = 0.4;  // per-coordinate simplex edge
};

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  int evaluations = 0;
};

/// Nelder-Mead with box constraints (candidates are clipped into the box).
/// Deterministic: no randomness enters the iteration.
SimplexResult minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper, const SimplexOptions& options = {});

/// Golden-section search on [lo, hi]; tol is on the argument.
double minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                       double tol = 1e-11, int max_iterations = 200);

}  // namespace regid
