#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>

namespace regid {

/// Direct-observation compound model Y = alpha + E, E ~ N(0, sigma2 I).
struct CompoundProblem {
  Eigen::VectorXd Y;
  double sigma2 = 1.0;
  std::optional<Eigen::VectorXd> truth;    // alpha, for risk studies
  std::optional<Eigen::VectorXd> weights;  // diagonal D of the weighted loss
};

struct SignRule {
  Eigen::VectorXd signs;
  bool had_zero = false;  // sign(0) = +1 by convention
};

/// Componentwise sign decision rule.
SignRule np_sign_rule(const Eigen::VectorXd& Y);

/// (1 - (B-2) sigma2 / ||Y||^2) Y. Requires B >= 3 and ||Y|| > 0.
Eigen::VectorXd james_stein(const Eigen::VectorXd& Y, double sigma2);

/// Positive-part variant: the shrinkage factor is clipped at zero.
Eigen::VectorXd positive_part_js(const Eigen::VectorXd& Y, double sigma2);

/// Empirical Bayes shrinkage (1 - B sigma2 / ||Y||^2)^+ Y.
Eigen::VectorXd eb_shrinkage(const Eigen::VectorXd& Y, double sigma2);

/// Scalar evidence maximizer max(||Y||^2/B - sigma2, 0).
double scalar_ml_lambda(const Eigen::VectorXd& Y, double sigma2);

/// lambda/(lambda + sigma2) * Y.
Eigen::VectorXd bayes_shrinkage(const Eigen::VectorXd& Y, double lambda, double sigma2);

/// Change of coordinates diagonalizing both the prior and the design:
/// A K A' = D and A (Phi'Phi)^-1 A' = I, built from the SVD of Phi Psi.
struct CoordinateChange {
  Eigen::MatrixXd A;        // d x d, Q' Phi
  Eigen::VectorXd D;        // squared singular values of Phi Psi
  Eigen::MatrixXd Q_left;   // pN x d, left singular vectors
  Eigen::MatrixXd V_right;  // d x d, right singular vectors
  Eigen::VectorXd Z;        // Q' Y (empty when no Y was supplied)
  double prior_identity_residual = std::numeric_limits<double>::quiet_NaN();
  double design_identity_residual = std::numeric_limits<double>::quiet_NaN();
  bool rank_deficient = false;  // design identity undefined; check skipped
};

/// Sign-fixed SVD construction of the coordinate change. K = Psi Psi' is
/// implied; pass Y to populate Z.
CoordinateChange strawderman_transform(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& Psi,
                                       const Eigen::VectorXd& Y = Eigen::VectorXd());

/// Componentwise posterior-mean shrinkage in the transformed model
/// Z = D^(1/2) beta + E: factor lambda d_i / (lambda d_i + sigma2).
/// Coordinates with d_i = 0 map to zero.
Eigen::VectorXd shrinkage_in_coordinates(const Eigen::VectorXd& Z, const Eigen::VectorXd& D,
                                         double lambda, double sigma2);

/// Map a coordinate estimate back to impulse coordinates: g = Psi V D^(-1/2) beta_bar.
Eigen::VectorXd coordinates_to_impulse(const CoordinateChange& cc, const Eigen::MatrixXd& Psi,
                                       const Eigen::VectorXd& beta_bar);

/// Asymptotic evidence-maximizing scale g' K^+ g / B. Errors when g has a
/// component outside range(K) beyond tolerance.
double lambda_star(const Eigen::VectorXd& g, const Eigen::MatrixXd& K, Eigen::Index B);

struct EbStrawdermanResult {
  Eigen::VectorXd beta_bar;
  double lambda = 0.0;
  int excluded = 0;  // coordinates with d_i = 0, left out of the lambda statistic
};

/// Plug lambda = Z' D^-1 Z / B into the coordinate shrinkage.
EbStrawdermanResult eb_strawderman(const Eigen::VectorXd& Z, const Eigen::VectorXd& D,
                                   double sigma2);

/// (1/B) sum (alpha_i - delta_i)^2.
double compound_loss(const Eigen::VectorXd& alpha, const Eigen::VectorXd& delta);

/// (delta - beta_bar)' diag(D) (delta - beta_bar).
double weighted_loss(const Eigen::VectorXd& beta_bar, const Eigen::VectorXd& delta,
                     const Eigen::VectorXd& D);

/// (g - g_hat)' (Phi'Phi K Phi'Phi) (g - g_hat).
double output_weighted_loss(const Eigen::VectorXd& g, const Eigen::VectorXd& g_hat,
                            const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& K);

using EstimationRule = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using CompoundLossFn = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

struct RiskEstimate {
  double risk = 0.0;
  double std_error = 0.0;
  int n_used = 0;
  int n_failed = 0;
};

/// Seeded Monte Carlo risk of a rule at a fixed truth alpha. Replicate seeds
/// are derived from the master seed by index, and the reduction order is fixed
/// by replicate index, so results do not depend on the execution schedule.
/// Replicates where the rule throws are dropped and counted.
RiskEstimate risk_monte_carlo(const EstimationRule& rule, const Eigen::VectorXd& alpha,
                              double sigma2, int n_rep, std::uint64_t seed,
                              const CompoundLossFn& loss = {});

/// Risk of a rule on a compound problem with known truth. The problem's
/// diagonal weights, when present, select the weighted loss.
RiskEstimate risk_monte_carlo(const EstimationRule& rule, const CompoundProblem& problem,
                              int n_rep, std::uint64_t seed);

}  // namespace regid
