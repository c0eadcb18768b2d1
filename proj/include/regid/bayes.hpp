#pragma once

#include <cstdint>
#include <limits>

#include "regid/core_model.hpp"
#include "regid/kernels.hpp"
#include "regid/simplex.hpp"

namespace regid {

struct TunedHyperparameters {
  Eigen::VectorXd scale;
  Eigen::VectorXd shape;
  double sigma2 = 0.0;
};

struct EstimatorFlags {
  bool converged = true;
  bool evidence_failed = false;
  int failed_starts = 0;
  int evaluations = 0;
};

/// Impulse-response estimate with posterior uncertainty and tuning diagnostics.
struct Estimate {
  ImpulseResponse g_hat;
  std::optional<Eigen::MatrixXd> posterior_cov;
  TunedHyperparameters hyperparams;
  double log_evidence = -std::numeric_limits<double>::infinity();
  double dof = std::numeric_limits<double>::quiet_NaN();
  EstimatorFlags flags;
};

enum class PosteriorForm { Auto, DataSpace, ParameterSpace };

/// Gaussian posterior mean under prior g ~ N(0, K) and noise variance sigma2.
/// DataSpace solves the pN x pN system K Phi' (Phi K Phi' + s2 I)^-1 Y; the
/// ParameterSpace route factors K = L L' and never inverts K, so degenerate
/// (ARD-zeroed) kernels are fine: zero-variance coordinates come back exactly
/// zero. Auto picks whichever system is smaller.
Estimate posterior_mean(const FirRegression& problem, const KernelMatrix& K, double sigma2,
                        PosteriorForm form = PosteriorForm::Auto, bool with_covariance = true);

/// log p(Y) with Y ~ N(0, Phi K Phi' + sigma2 I). On factorization failure
/// returns a large negative sentinel and sets *ok = false.
double log_marginal_likelihood(const FirRegression& problem, const Eigen::MatrixXd& K,
                               double sigma2, bool* ok = nullptr);

/// Same marginal likelihood, prior given by its precision P (J(g) = g'Pg).
double log_marginal_likelihood_precision(const FirRegression& problem, const Eigen::MatrixXd& P,
                                         double sigma2, bool* ok = nullptr);

/// Posterior mean under prior precision P: (Phi'Phi + sigma2 P)^-1 Phi' Y.
Estimate posterior_mean_precision(const FirRegression& problem, const Eigen::MatrixXd& P,
                                  double sigma2, bool with_covariance = false);

/// Gradient of the log evidence with respect to the log hyperparameters of a
/// kernel template, evaluated at theta (natural coordinates).
Eigen::VectorXd log_evidence_gradient(const FirRegression& problem, const KernelTemplate& kernel,
                                      const Eigen::VectorXd& theta, double sigma2);

enum class Sigma2Policy { Fixed, Profile, ResidualPlugin };

/// Evidence-maximization problem: data, a kernel template with box bounds,
/// and the noise-variance policy.
struct EvidenceProblem {
  FirRegression problem;
  KernelTemplate kernel;
  Sigma2Policy sigma2_policy = Sigma2Policy::ResidualPlugin;
  double sigma2_fixed = 0.0;            // used by Fixed
  double sigma2_lower = 0.0;            // Profile bounds; 0 = derived from the data
  double sigma2_upper = 0.0;
};

struct OptimizerConfig {
  int n_starts = 5;          // log-space quasi-grid over the bounds
  int max_iterations = 400;  // simplex iterations per start
  double tolerance = 1e-6;
  bool with_covariance = true;
};

/// Empirical Bayes: maximize the marginal likelihood over the free
/// hyperparameters in log space (multi-start Nelder-Mead) and plug the
/// maximizer into the posterior mean.
Estimate empirical_bayes(const EvidenceProblem& ep, const OptimizerConfig& opt = {});

/// Residual plug-in estimate RSS/(pN - d) from the least-squares fit.
/// Requires more rows than unknowns.
double estimate_noise_variance(const FirRegression& problem);

/// Trace of the influence matrix H = Phi K Phi' (Phi K Phi' + sigma2 I)^-1.
double degrees_of_freedom(const FirRegression& problem, const Eigen::MatrixXd& K, double sigma2);

struct ExcessDofOptions {
  int n_replicates = 1;   // replicate 0 uses the stored Y; further replicates
                          // are parametric-bootstrap redraws around the fit
  double step = 0.0;      // finite-difference step; 0 picks 1e-4 * std(Y)
  bool include_shape = false;  // default: shapes stay at the unperturbed optimum
  std::uint64_t seed = 0;
};

struct ExcessDofResult {
  double excess_dof = std::numeric_limits<double>::quiet_NaN();
  int replicates_used = 0;
  int replicates_failed = 0;
};

/// Monte Carlo estimate of the tuning sensitivity term of the degrees of
/// freedom: central finite differences of the estimator through the
/// evidence-maximizing scales only.
ExcessDofResult excess_degrees_of_freedom(const EvidenceProblem& ep, const ExcessDofOptions& opts,
                                          const OptimizerConfig& opt = {});

}  // namespace regid
