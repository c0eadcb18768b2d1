#include "regid/compound.hpp"

#include <cmath>
#include <stdexcept>

#include "regid/random.hpp"

namespace regid {

SignRule np_sign_rule(const Eigen::VectorXd& Y) {
  SignRule rule;
  rule.signs.resize(Y.size());
  for (Eigen::Index i = 0; i < Y.size(); ++i) {
    if (Y[i] == 0.0) rule.had_zero = true;
    rule.signs[i] = (Y[i] < 0.0) ? -1.0 : 1.0;
  }
  return rule;
}

Eigen::VectorXd james_stein(const Eigen::VectorXd& Y, double sigma2) {
  const Eigen::Index B = Y.size();
  if (B < 3) throw std::invalid_argument("james_stein: needs dimension B >= 3");
  const double norm2 = Y.squaredNorm();
  if (norm2 == 0.0) throw std::invalid_argument("james_stein: ||Y|| must be positive");
  return (1.0 - static_cast<double>(B - 2) * sigma2 / norm2) * Y;
}

namespace {

Eigen::VectorXd clipped_shrinkage(const Eigen::VectorXd& Y, double numerator) {
  const double norm2 = Y.squaredNorm();
  if (norm2 <= numerator) return Eigen::VectorXd::Zero(Y.size());
  return (1.0 - numerator / norm2) * Y;
}

}  // namespace

Eigen::VectorXd positive_part_js(const Eigen::VectorXd& Y, double sigma2) {
  if (Y.size() < 1) throw std::invalid_argument("positive_part_js: empty observation");
  return clipped_shrinkage(Y, static_cast<double>(Y.size() - 2) * sigma2);
}

Eigen::VectorXd eb_shrinkage(const Eigen::VectorXd& Y, double sigma2) {
  if (Y.size() < 1) throw std::invalid_argument("eb_shrinkage: empty observation");
  // definitionally the Bayes rule at the evidence-maximizing scale; the factor
  // equals (1 - B sigma2 / ||Y||^2)^+ with an exact zero in the clipped region
  return bayes_shrinkage(Y, scalar_ml_lambda(Y, sigma2), sigma2);
}

double scalar_ml_lambda(const Eigen::VectorXd& Y, double sigma2) {
  if (Y.size() < 1) throw std::invalid_argument("scalar_ml_lambda: empty observation");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("scalar_ml_lambda: sigma2 must be > 0");
  return std::max(Y.squaredNorm() / static_cast<double>(Y.size()) - sigma2, 0.0);
}

Eigen::VectorXd bayes_shrinkage(const Eigen::VectorXd& Y, double lambda, double sigma2) {
  if (lambda < 0.0) throw std::invalid_argument("bayes_shrinkage: lambda must be >= 0");
  if (lambda == 0.0) return Eigen::VectorXd::Zero(Y.size());
  return (lambda / (lambda + sigma2)) * Y;
}

CoordinateChange strawderman_transform(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& Psi,
                                       const Eigen::VectorXd& Y) {
  if (Phi.cols() != Psi.rows())
    throw std::invalid_argument("strawderman_transform: Phi and Psi dimensions do not chain");
  const Eigen::Index d = Phi.cols();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Phi * Psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd Q = svd.matrixU();
  Eigen::MatrixXd V = svd.matrixV();
  // fix the SVD sign ambiguity: largest-magnitude entry of each right singular
  // vector is made positive, so A is reproducible run to run
  for (Eigen::Index c = 0; c < V.cols(); ++c) {
    Eigen::Index at = 0;
    V.col(c).cwiseAbs().maxCoeff(&at);
    if (V(at, c) < 0.0) {
      V.col(c) = -V.col(c);
      Q.col(c) = -Q.col(c);
    }
  }

  CoordinateChange cc;
  cc.Q_left = Q;
  cc.V_right = V;
  cc.D = svd.singularValues().array().square();
  cc.A = Q.transpose() * Phi;
  if (Y.size() > 0) {
    if (Y.size() != Phi.rows())
      throw std::invalid_argument("strawderman_transform: Y length does not match Phi");
    cc.Z = Q.transpose() * Y;
  }

  const Eigen::MatrixXd K = Psi * Psi.transpose();
  const Eigen::MatrixXd prior_diff =
      cc.A * K * cc.A.transpose() - Eigen::MatrixXd(cc.D.asDiagonal());
  cc.prior_identity_residual = prior_diff.norm() / std::max(cc.D.norm(), 1e-300);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(Phi.transpose() * Phi);
  if (lu.rank() < d) {
    cc.rank_deficient = true;  // (Phi'Phi)^-1 undefined; identity check skipped
  } else {
    const Eigen::MatrixXd design =
        cc.A * lu.inverse() * cc.A.transpose() - Eigen::MatrixXd::Identity(d, d);
    cc.design_identity_residual = design.norm() / std::sqrt(static_cast<double>(d));
  }
  return cc;
}

Eigen::VectorXd shrinkage_in_coordinates(const Eigen::VectorXd& Z, const Eigen::VectorXd& D,
                                         double lambda, double sigma2) {
  if (Z.size() != D.size())
    throw std::invalid_argument("shrinkage_in_coordinates: Z and D lengths differ");
  if (lambda < 0.0) throw std::invalid_argument("shrinkage_in_coordinates: lambda must be >= 0");
  if ((D.array() < 0.0).any())
    throw std::invalid_argument("shrinkage_in_coordinates: D must be nonnegative");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Z.size());
  for (Eigen::Index i = 0; i < Z.size(); ++i) {
    if (D[i] == 0.0) continue;
    out[i] = (lambda * D[i] / (lambda * D[i] + sigma2)) * Z[i];
  }
  return out;
}

Eigen::VectorXd coordinates_to_impulse(const CoordinateChange& cc, const Eigen::MatrixXd& Psi,
                                       const Eigen::VectorXd& beta_bar) {
  if (beta_bar.size() != cc.D.size())
    throw std::invalid_argument("coordinates_to_impulse: coordinate length mismatch");
  Eigen::VectorXd scaled(beta_bar.size());
  for (Eigen::Index i = 0; i < beta_bar.size(); ++i)
    scaled[i] = cc.D[i] > 0.0 ? beta_bar[i] / std::sqrt(cc.D[i]) : 0.0;
  return Psi * (cc.V_right * scaled);
}

double lambda_star(const Eigen::VectorXd& g, const Eigen::MatrixXd& K, Eigen::Index B) {
  if (B < 1) throw std::invalid_argument("lambda_star: B must be >= 1");
  if (K.rows() != g.size() || K.cols() != g.size())
    throw std::invalid_argument("lambda_star: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (K + K.transpose()));
  if (eig.info() != Eigen::Success) throw std::runtime_error("lambda_star: eigensolver failed");
  const double max_eig = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  const double cutoff = 1e-12 * std::max(max_eig, 1e-300);
  const Eigen::VectorXd coords = eig.eigenvectors().transpose() * g;
  double quad = 0.0;
  double outside2 = 0.0;
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    if (eig.eigenvalues()[i] > cutoff)
      quad += coords[i] * coords[i] / eig.eigenvalues()[i];
    else
      outside2 += coords[i] * coords[i];
  }
  if (std::sqrt(outside2) > 1e-8 * std::max(g.norm(), 1e-300))
    throw std::invalid_argument("lambda_star: g has a component outside range(K)");
  return quad / static_cast<double>(B);
}

EbStrawdermanResult eb_strawderman(const Eigen::VectorXd& Z, const Eigen::VectorXd& D,
                                   double sigma2) {
  if (Z.size() != D.size())
    throw std::invalid_argument("eb_strawderman: Z and D lengths differ");
  EbStrawdermanResult result;
  double stat = 0.0;
  Eigen::Index included = 0;
  for (Eigen::Index i = 0; i < Z.size(); ++i) {
    if (D[i] > 0.0) {
      stat += Z[i] * Z[i] / D[i];
      ++included;
    } else {
      ++result.excluded;
    }
  }
  if (included == 0) throw std::invalid_argument("eb_strawderman: every coordinate has d_i = 0");
  result.lambda = stat / static_cast<double>(included);
  result.beta_bar = shrinkage_in_coordinates(Z, D, result.lambda, sigma2);
  return result;
}

double compound_loss(const Eigen::VectorXd& alpha, const Eigen::VectorXd& delta) {
  if (alpha.size() != delta.size())
    throw std::invalid_argument("compound_loss: dimension mismatch");
  return (alpha - delta).squaredNorm() / static_cast<double>(alpha.size());
}

double weighted_loss(const Eigen::VectorXd& beta_bar, const Eigen::VectorXd& delta,
                     const Eigen::VectorXd& D) {
  if (beta_bar.size() != delta.size() || beta_bar.size() != D.size())
    throw std::invalid_argument("weighted_loss: dimension mismatch");
  return (delta - beta_bar).cwiseProduct(D.cwiseProduct(delta - beta_bar)).sum();
}

double output_weighted_loss(const Eigen::VectorXd& g, const Eigen::VectorXd& g_hat,
                            const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& K) {
  if (g.size() != g_hat.size() || Phi.cols() != g.size() || K.rows() != g.size())
    throw std::invalid_argument("output_weighted_loss: dimension mismatch");
  const Eigen::VectorXd diff = g - g_hat;
  const Eigen::VectorXd w = Phi.transpose() * (Phi * diff);
  return w.dot(K * w);
}

RiskEstimate risk_monte_carlo(const EstimationRule& rule, const CompoundProblem& problem,
                              int n_rep, std::uint64_t seed) {
  if (!problem.truth.has_value())
    throw std::invalid_argument("risk_monte_carlo: the problem carries no truth");
  CompoundLossFn loss;
  if (problem.weights.has_value()) {
    const Eigen::VectorXd D = *problem.weights;
    if ((D.array() < 0.0).any())
      throw std::invalid_argument("risk_monte_carlo: weights must be nonnegative");
    loss = [D](const Eigen::VectorXd& truth, const Eigen::VectorXd& est) {
      return weighted_loss(truth, est, D);
    };
  }
  return risk_monte_carlo(rule, *problem.truth, problem.sigma2, n_rep, seed, loss);
}

RiskEstimate risk_monte_carlo(const EstimationRule& rule, const Eigen::VectorXd& alpha,
                              double sigma2, int n_rep, std::uint64_t seed,
                              const CompoundLossFn& loss) {
  if (n_rep < 100) throw std::invalid_argument("risk_monte_carlo: n_rep must be >= 100");
  const CompoundLossFn loss_fn = loss ? loss : CompoundLossFn(compound_loss);
  const double noise_std = std::sqrt(sigma2);
  const Eigen::Index B = alpha.size();

  double sum = 0.0, sum_sq = 0.0;
  int used = 0, failed = 0;
  Eigen::VectorXd Y(B);
  for (int rep = 0; rep < n_rep; ++rep) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(rep)));
    for (Eigen::Index i = 0; i < B; ++i) Y[i] = alpha[i] + noise_std * rng.normal();
    try {
      const double value = loss_fn(alpha, rule(Y));
      sum += value;
      sum_sq += value * value;
      ++used;
    } catch (const std::exception&) {
      ++failed;
    }
  }
  if (used == 0) throw std::runtime_error("risk_monte_carlo: the rule failed on every draw");

  RiskEstimate est;
  est.n_used = used;
  est.n_failed = failed;
  est.risk = sum / static_cast<double>(used);
  const double var =
      std::max(sum_sq / static_cast<double>(used) - est.risk * est.risk, 0.0);
  est.std_error = std::sqrt(var / static_cast<double>(used));
  return est;
}

}  // namespace regid
