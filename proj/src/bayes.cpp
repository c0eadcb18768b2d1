#include "regid/bayes.hpp"

#include <cmath>

#include "regid/random.hpp"

namespace regid {

namespace {

constexpr double kEvidenceSentinel = -1e300;
constexpr double kTwoPi = 6.283185307179586476925286766559;

struct ActiveSet {
  std::vector<Eigen::Index> index;  // coordinates with positive prior variance
  Eigen::MatrixXd Phi;              // active columns
  Eigen::MatrixXd K;                // active block
};

ActiveSet reduce_active(const FirRegression& problem, const Eigen::MatrixXd& K) {
  ActiveSet a;
  for (Eigen::Index i = 0; i < K.rows(); ++i)
    if (K(i, i) > 0.0) a.index.push_back(i);
  const Eigen::Index da = static_cast<Eigen::Index>(a.index.size());
  a.Phi.resize(problem.Phi.rows(), da);
  a.K.resize(da, da);
  for (Eigen::Index c = 0; c < da; ++c) {
    a.Phi.col(c) = problem.Phi.col(a.index[static_cast<std::size_t>(c)]);
    for (Eigen::Index r = 0; r < da; ++r)
      a.K(r, c) = K(a.index[static_cast<std::size_t>(r)], a.index[static_cast<std::size_t>(c)]);
  }
  return a;
}

// log evidence from the factored prior: A = Phi L, M = A'A + sigma2 I.
double evidence_from_factor(const Eigen::MatrixXd& G, const Eigen::VectorXd& b0, double yty,
                            Eigen::Index pn, const Eigen::MatrixXd& L, double sigma2, bool* ok) {
  if (ok) *ok = true;
  const Eigen::Index d = L.cols();
  if (!L.allFinite()) {
    if (ok) *ok = false;
    return kEvidenceSentinel;
  }
  Eigen::MatrixXd M = L.transpose() * G * L;
  M.diagonal().array() += sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    if (ok) *ok = false;
    return kEvidenceSentinel;
  }
  double logdet = (static_cast<double>(pn) - static_cast<double>(d)) * std::log(sigma2);
  for (Eigen::Index i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  const Eigen::VectorXd b = L.transpose() * b0;
  const double quad = (yty - b.dot(llt.solve(b))) / sigma2;
  const double value = -0.5 * (static_cast<double>(pn) * std::log(kTwoPi) + logdet + quad);
  if (!std::isfinite(value)) {
    if (ok) *ok = false;
    return kEvidenceSentinel;
  }
  return value;
}

double evidence_output_space(const FirRegression& problem, const Eigen::MatrixXd& K,
                             double sigma2, bool* ok) {
  if (ok) *ok = true;
  const Eigen::Index pn = problem.n_rows();
  Eigen::MatrixXd S = problem.Phi * K * problem.Phi.transpose();
  S.diagonal().array() += sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    if (ok) *ok = false;
    return kEvidenceSentinel;
  }
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < pn; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  const double quad = problem.Y.dot(llt.solve(problem.Y));
  const double value = -0.5 * (static_cast<double>(pn) * std::log(kTwoPi) + logdet + quad);
  if (!std::isfinite(value)) {
    if (ok) *ok = false;
    return kEvidenceSentinel;
  }
  return value;
}

}  // namespace

double log_marginal_likelihood(const FirRegression& problem, const Eigen::MatrixXd& K,
                               double sigma2, bool* ok) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("log_marginal_likelihood: sigma2 must be > 0");
  if (K.rows() != problem.d() || K.cols() != problem.d())
    throw std::invalid_argument("log_marginal_likelihood: kernel dimension mismatch");
  const ActiveSet a = reduce_active(problem, K);
  const Eigen::Index pn = problem.n_rows();
  const Eigen::Index da = static_cast<Eigen::Index>(a.index.size());
  if (da == 0) {
    const double value = -0.5 * (static_cast<double>(pn) * std::log(kTwoPi * sigma2) +
                                 problem.Y.squaredNorm() / sigma2);
    if (ok) *ok = true;
    return value;
  }
  if (da <= pn) {
    const Eigen::MatrixXd G = a.Phi.transpose() * a.Phi;
    const Eigen::VectorXd b0 = a.Phi.transpose() * problem.Y;
    Eigen::MatrixXd L;
    try {
      L = psd_factor(a.K);
    } catch (const std::exception&) {
      if (ok) *ok = false;
      return kEvidenceSentinel;
    }
    return evidence_from_factor(G, b0, problem.Y.squaredNorm(), pn, L, sigma2, ok);
  }
  FirRegression reduced;
  reduced.Phi = a.Phi;
  reduced.Y = problem.Y;
  return evidence_output_space(reduced, a.K, sigma2, ok);
}

Estimate posterior_mean(const FirRegression& problem, const KernelMatrix& K, double sigma2,
                        PosteriorForm form, bool with_covariance) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("posterior_mean: sigma2 must be > 0");
  if (K.K.rows() != problem.d())
    throw std::invalid_argument("posterior_mean: kernel dimension mismatch");
  if (!is_psd(K.K)) throw std::invalid_argument("posterior_mean: kernel failed the PSD check");

  const Eigen::Index d = problem.d();
  const Eigen::Index pn = problem.n_rows();
  const ActiveSet a = reduce_active(problem, K.K);
  const Eigen::Index da = static_cast<Eigen::Index>(a.index.size());

  Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd cov;
  if (with_covariance) cov = Eigen::MatrixXd::Zero(d, d);

  if (da > 0) {
    const bool data_space = (form == PosteriorForm::DataSpace) ||
                            (form == PosteriorForm::Auto && pn < da);
    Eigen::VectorXd ga;
    Eigen::MatrixXd cov_a;
    if (data_space) {
      Eigen::MatrixXd S = a.Phi * a.K * a.Phi.transpose();
      S.diagonal().array() += sigma2;
      Eigen::LLT<Eigen::MatrixXd> llt(S);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("posterior_mean: output-space factorization failed");
      const Eigen::MatrixXd KPhiT = a.K * a.Phi.transpose();
      ga = KPhiT * llt.solve(problem.Y);
      if (with_covariance) cov_a = a.K - KPhiT * llt.solve(KPhiT.transpose());
    } else {
      const Eigen::MatrixXd L = psd_factor(a.K);
      const Eigen::MatrixXd A = a.Phi * L;
      Eigen::MatrixXd M = A.transpose() * A;
      M.diagonal().array() += sigma2;
      Eigen::LLT<Eigen::MatrixXd> llt(M);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("posterior_mean: parameter-space factorization failed");
      ga = L * llt.solve(A.transpose() * problem.Y);
      if (with_covariance)
        cov_a = sigma2 * (L * llt.solve(Eigen::MatrixXd(L.transpose())));
    }
    for (Eigen::Index c = 0; c < da; ++c) {
      g[a.index[static_cast<std::size_t>(c)]] = ga[c];
      if (with_covariance)
        for (Eigen::Index r = 0; r < da; ++r)
          cov(a.index[static_cast<std::size_t>(r)], a.index[static_cast<std::size_t>(c)]) =
              cov_a(r, c);
    }
  }

  Estimate est;
  est.g_hat = ImpulseResponse::devectorize(g, problem.T, problem.p, problem.m);
  if (with_covariance) est.posterior_cov = 0.5 * (cov + cov.transpose());
  est.hyperparams.scale = K.spec.scale;
  est.hyperparams.shape = K.spec.shape;
  est.hyperparams.sigma2 = sigma2;
  bool ok = true;
  est.log_evidence = log_marginal_likelihood(problem, K.K, sigma2, &ok);
  est.flags.evidence_failed = !ok;
  est.dof = degrees_of_freedom(problem, K.K, sigma2);
  return est;
}

double log_marginal_likelihood_precision(const FirRegression& problem, const Eigen::MatrixXd& P,
                                         double sigma2, bool* ok) {
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("log_marginal_likelihood_precision: sigma2 must be > 0");
  if (ok) *ok = true;
  const Eigen::Index pn = problem.n_rows();
  const Eigen::MatrixXd G = problem.Phi.transpose() * problem.Phi;
  const Eigen::MatrixXd Psym = 0.5 * (P + P.transpose());
  Eigen::LLT<Eigen::MatrixXd> lltP(Psym);
  Eigen::LLT<Eigen::MatrixXd> lltM(Eigen::MatrixXd(Psym + G / sigma2));
  if (lltP.info() != Eigen::Success || lltM.info() != Eigen::Success) {
    if (ok) *ok = false;
    return kEvidenceSentinel;
  }
  double logdet = static_cast<double>(pn) * std::log(sigma2);
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    logdet += 2.0 * std::log(lltM.matrixL()(i, i)) - 2.0 * std::log(lltP.matrixL()(i, i));
  const Eigen::VectorXd b0 = problem.Phi.transpose() * problem.Y;
  const double quad =
      (problem.Y.squaredNorm() - b0.dot(lltM.solve(b0)) / sigma2) / sigma2;
  const double value = -0.5 * (static_cast<double>(pn) * std::log(kTwoPi) + logdet + quad);
  if (!std::isfinite(value)) {
    if (ok) *ok = false;
    return kEvidenceSentinel;
  }
  return value;
}

Estimate posterior_mean_precision(const FirRegression& problem, const Eigen::MatrixXd& P,
                                  double sigma2, bool with_covariance) {
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("posterior_mean_precision: sigma2 must be > 0");
  if (P.rows() != problem.d() || P.cols() != problem.d())
    throw std::invalid_argument("posterior_mean_precision: dimension mismatch");
  const Eigen::MatrixXd G = problem.Phi.transpose() * problem.Phi;
  Eigen::MatrixXd D = G + sigma2 * 0.5 * (P + P.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(D);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("posterior_mean_precision: factorization failed");
  const Eigen::VectorXd g = llt.solve(problem.Phi.transpose() * problem.Y);

  Estimate est;
  est.g_hat = ImpulseResponse::devectorize(g, problem.T, problem.p, problem.m);
  if (with_covariance) {
    const Eigen::MatrixXd cov =
        sigma2 * llt.solve(Eigen::MatrixXd::Identity(P.rows(), P.cols()));
    est.posterior_cov = 0.5 * (cov + cov.transpose());
  }
  est.hyperparams.sigma2 = sigma2;
  bool ok = true;
  est.log_evidence = log_marginal_likelihood_precision(problem, P, sigma2, &ok);
  est.flags.evidence_failed = !ok;
  est.dof = llt.solve(G).trace();
  return est;
}

Eigen::VectorXd log_evidence_gradient(const FirRegression& problem, const KernelTemplate& kernel,
                                      const Eigen::VectorXd& theta, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("log_evidence_gradient: sigma2 must be > 0");
  const Eigen::MatrixXd K = kernel.realize(theta);
  const std::vector<Eigen::MatrixXd> dK = kernel.gradients(theta);
  const Eigen::Index pn = problem.n_rows();
  Eigen::MatrixXd S = problem.Phi * K * problem.Phi.transpose();
  S.diagonal().array() += sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_evidence_gradient: factorization failed");
  const Eigen::VectorXd alpha = llt.solve(problem.Y);
  const Eigen::MatrixXd Sinv = llt.solve(Eigen::MatrixXd::Identity(pn, pn));
  Eigen::VectorXd grad(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const Eigen::MatrixXd Si =
        problem.Phi * dK[static_cast<std::size_t>(i)] * problem.Phi.transpose();
    const double term = alpha.dot(Si * alpha) - (Sinv.cwiseProduct(Si)).sum();
    grad[i] = 0.5 * term * theta[i];  // chain rule to log coordinates
  }
  return grad;
}

double estimate_noise_variance(const FirRegression& problem) {
  const Eigen::Index pn = problem.n_rows();
  if (pn <= problem.d())
    throw std::invalid_argument(
        "estimate_noise_variance: residual plug-in needs more rows than unknowns");
  const LeastSquaresResult ls = least_squares(problem);
  const double rss = (problem.Y - problem.Phi * ls.estimate.vectorize()).squaredNorm();
  return rss / static_cast<double>(pn - problem.d());
}

double degrees_of_freedom(const FirRegression& problem, const Eigen::MatrixXd& K,
                          double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("degrees_of_freedom: sigma2 must be > 0");
  const ActiveSet a = reduce_active(problem, K);
  if (a.index.empty()) return 0.0;
  const Eigen::MatrixXd L = psd_factor(a.K);
  const Eigen::MatrixXd A = a.Phi * L;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A.transpose() * A, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("degrees_of_freedom: eigensolver failed");
  double dof = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double mu = std::max(eig.eigenvalues()[i], 0.0);
    dof += mu / (mu + sigma2);
  }
  return dof;
}

// -- empirical Bayes -----------------------------------------------------------

namespace {

struct GramCache {
  Eigen::MatrixXd G;
  Eigen::VectorXd b0;
  double yty = 0.0;
  Eigen::Index pn = 0;

  explicit GramCache(const FirRegression& problem)
      : G(problem.Phi.transpose() * problem.Phi),
        b0(problem.Phi.transpose() * problem.Y),
        yty(problem.Y.squaredNorm()),
        pn(problem.n_rows()) {}
};

double resolve_sigma2(const EvidenceProblem& ep) {
  switch (ep.sigma2_policy) {
    case Sigma2Policy::Fixed:
      if (ep.sigma2_fixed > 0.0) return ep.sigma2_fixed;
      if (ep.problem.noise_variance && *ep.problem.noise_variance > 0.0)
        return *ep.problem.noise_variance;
      throw std::invalid_argument("empirical_bayes: Fixed policy without a noise variance");
    case Sigma2Policy::ResidualPlugin: {
      const double s2 = estimate_noise_variance(ep.problem);
      const double floor =
          1e-12 * ep.problem.Y.squaredNorm() / static_cast<double>(ep.problem.n_rows());
      return std::max(s2, std::max(floor, 1e-300));
    }
    case Sigma2Policy::Profile:
      return 0.0;  // tuned alongside the kernel hyperparameters
  }
  throw std::logic_error("empirical_bayes: unknown sigma2 policy");
}

}  // namespace

Estimate empirical_bayes(const EvidenceProblem& ep, const OptimizerConfig& opt) {
  ep.kernel.validate();
  if (ep.kernel.dims.d() != ep.problem.d() && !ep.kernel.fixed_base.has_value())
    throw std::invalid_argument("empirical_bayes: kernel dims do not match the problem");

  const bool profile = ep.sigma2_policy == Sigma2Policy::Profile;
  const double sigma2_known = profile ? 0.0 : resolve_sigma2(ep);

  const Eigen::Index k = ep.kernel.n_free();
  const Eigen::Index n = k + (profile ? 1 : 0);
  const double mean_sq = ep.problem.Y.squaredNorm() / static_cast<double>(ep.problem.n_rows());
  const double s2_lo = profile ? (ep.sigma2_lower > 0.0 ? ep.sigma2_lower
                                                        : std::max(1e-8 * mean_sq, 1e-300))
                               : 0.0;
  const double s2_hi =
      profile ? (ep.sigma2_upper > 0.0 ? ep.sigma2_upper : std::max(10.0 * mean_sq, 1e-290))
              : 0.0;

  Eigen::VectorXd lo(n), hi(n);
  lo.head(k) = ep.kernel.lower.array().log();
  hi.head(k) = ep.kernel.upper.array().log();
  if (profile) {
    lo[k] = std::log(s2_lo);
    hi[k] = std::log(s2_hi);
  }

  const GramCache cache(ep.problem);
  int failed_evals = 0;
  auto objective = [&](const Eigen::VectorXd& x) -> double {
    const Eigen::VectorXd theta = x.head(k).array().exp();
    const double sigma2 = profile ? std::exp(x[k]) : sigma2_known;
    bool ok = true;
    Eigen::MatrixXd L;
    try {
      L = ep.kernel.realize_factor(theta);
    } catch (const std::exception&) {
      ++failed_evals;
      return -kEvidenceSentinel;
    }
    const double value = evidence_from_factor(cache.G, cache.b0, cache.yty, cache.pn, L,
                                              sigma2, &ok);
    if (!ok) {
      ++failed_evals;
      return -kEvidenceSentinel;
    }
    return -value;
  };

  SimplexOptions sopts;
  sopts.max_iterations = opt.max_iterations;
  sopts.tolerance = opt.tolerance;

  bool have_best = false;
  SimplexResult best;
  int failed_starts = 0;
  int evaluations = 0;
  const double stagger = 0.3819660112501051;  // spreads start coordinates over the box
  for (int s = 0; s < opt.n_starts; ++s) {
    Eigen::VectorXd x0(n);
    for (Eigen::Index c = 0; c < n; ++c) {
      double frac = (static_cast<double>(s) + 0.5) / static_cast<double>(opt.n_starts) +
                    stagger * static_cast<double>(c);
      frac -= std::floor(frac);
      x0[c] = lo[c] + frac * (hi[c] - lo[c]);
    }
    const SimplexResult run = minimize_simplex(objective, x0, lo, hi, sopts);
    evaluations += run.evaluations;
    if (run.value >= -kEvidenceSentinel) {
      ++failed_starts;
      continue;
    }
    if (!have_best || run.value < best.value) {
      best = run;
      have_best = true;
    }
  }
  if (!have_best)
    throw std::runtime_error("empirical_bayes: evidence evaluation failed at every start");

  // coordinate-wise golden-section polish: the simplex stops on the objective
  // spread, which leaves the argument looser than the tolerance implies
  for (double window : {0.5, 0.02}) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const double a = std::max(lo[c], best.x[c] - window);
      const double b = std::min(hi[c], best.x[c] + window);
      if (b <= a) continue;
      Eigen::VectorXd probe = best.x;
      const double xc = minimize_scalar(
          [&](double v) {
            probe[c] = v;
            return objective(probe);
          },
          a, b, 1e-12, 300);
      probe[c] = xc;
      const double value = objective(probe);
      if (value <= best.value) {
        best.x = probe;
        best.value = value;
      }
    }
  }

  const Eigen::VectorXd theta = best.x.head(k).array().exp();
  const double sigma2 = profile ? std::exp(best.x[k]) : sigma2_known;
  KernelMatrix K{ep.kernel.realize(theta), ep.kernel.to_spec(theta)};
  Estimate est = posterior_mean(ep.problem, K, sigma2, PosteriorForm::Auto, opt.with_covariance);
  est.log_evidence = -best.value;
  est.flags.converged = best.converged;
  est.flags.failed_starts = failed_starts;
  est.flags.evaluations = evaluations;
  return est;
}

// -- excess degrees of freedom --------------------------------------------------

namespace {

// Scale-only evidence retuning with the shape(s) pinned. Single-scale
// templates go through golden section on log(lambda); otherwise a warm-started
// simplex over the scale block.
struct ScaleRetuner {
  const KernelTemplate& kernel;
  Eigen::VectorXd theta_ref;  // full parameter vector; shapes stay fixed
  double sigma2;
  Eigen::MatrixXd R;     // Lbar' Phi', for single-scale incremental updates
  Eigen::MatrixXd C;     // Lbar' G Lbar
  Eigen::MatrixXd PhiL;  // Phi Lbar
  Eigen::Index pn = 0, d = 0;
  double log_lo = 0.0, log_hi = 0.0;

  ScaleRetuner(const EvidenceProblem& ep, const Eigen::VectorXd& theta_hat, double sigma2_hat)
      : kernel(ep.kernel), theta_ref(theta_hat), sigma2(sigma2_hat) {
    Eigen::VectorXd unit = theta_ref;
    unit[0] = 1.0;
    const Eigen::MatrixXd Lbar = kernel.realize_factor(unit);
    R = Lbar.transpose() * ep.problem.Phi.transpose();
    C = R * ep.problem.Phi * Lbar;
    PhiL = ep.problem.Phi * Lbar;
    pn = ep.problem.n_rows();
    d = Lbar.cols();
    log_lo = std::log(kernel.lower[0]);
    log_hi = std::log(kernel.upper[0]);
  }

  double neg_evidence(double lambda, const Eigen::VectorXd& bbar, double yty) const {
    Eigen::MatrixXd M = lambda * C;
    M.diagonal().array() += sigma2;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) return -kEvidenceSentinel;
    double logdet = (static_cast<double>(pn) - static_cast<double>(d)) * std::log(sigma2);
    for (Eigen::Index i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    const double quad = (yty - lambda * bbar.dot(llt.solve(bbar))) / sigma2;
    return 0.5 * (static_cast<double>(pn) * std::log(kTwoPi) + logdet + quad);
  }

  // d(neg evidence)/d(log lambda); analytic, so the root is not limited by
  // the flatness of the objective near its optimum
  double neg_evidence_slope(double lambda, const Eigen::VectorXd& bbar) const {
    Eigen::MatrixXd M = lambda * C;
    M.diagonal().array() += sigma2;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) return 0.0;
    const Eigen::VectorXd w = llt.solve(bbar);
    const double trace = llt.solve(C).trace();
    const double quad = (bbar.dot(w) - lambda * w.dot(C * w)) / sigma2;
    return 0.5 * lambda * (trace - quad);
  }

  double retune(const Eigen::VectorXd& bbar, double yty) const {
    if (log_hi <= log_lo) return std::exp(log_lo);
    double x = minimize_scalar(
        [&](double lx) { return neg_evidence(std::exp(lx), bbar, yty); }, log_lo, log_hi,
        1e-8, 300);
    // bisection on the slope sharpens the argument to near machine precision
    double a = std::max(log_lo, x - 1e-2);
    double b = std::min(log_hi, x + 1e-2);
    double ga = neg_evidence_slope(std::exp(a), bbar);
    double gb = neg_evidence_slope(std::exp(b), bbar);
    if (ga < 0.0 && gb > 0.0) {
      for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (a + b);
        const double gm = neg_evidence_slope(std::exp(mid), bbar);
        if (gm < 0.0)
          a = mid;
        else
          b = mid;
      }
      x = 0.5 * (a + b);
    }
    return std::exp(x);
  }

  // fitted output at the original data but retuned scale
  Eigen::VectorXd fitted(double lambda, const Eigen::VectorXd& bbar) const {
    Eigen::MatrixXd M = lambda * C;
    M.diagonal().array() += sigma2;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    return lambda * (PhiL * llt.solve(bbar));
  }
};

}  // namespace

ExcessDofResult excess_degrees_of_freedom(const EvidenceProblem& ep, const ExcessDofOptions& opts,
                                          const OptimizerConfig& opt) {
  if (opts.n_replicates < 1)
    throw std::invalid_argument("excess_degrees_of_freedom: n_replicates must be >= 1");
  const Estimate base = empirical_bayes(ep, opt);
  const double sigma2_hat = base.hyperparams.sigma2;
  Eigen::VectorXd theta_hat(ep.kernel.n_free());
  theta_hat.head(ep.kernel.n_scales()) = base.hyperparams.scale;
  theta_hat.tail(ep.kernel.n_shapes()) = base.hyperparams.shape;

  if (ep.kernel.n_scales() != 1 || opts.include_shape)
    throw std::invalid_argument(
        "excess_degrees_of_freedom: only single-scale kernels with pinned shapes are supported");

  const Eigen::Index pn = ep.problem.n_rows();
  const double y_std = std::sqrt(
      (ep.problem.Y.array() - ep.problem.Y.mean()).square().sum() / static_cast<double>(pn));
  const double h = opts.step > 0.0 ? opts.step : 1e-4 * std::max(y_std, 1e-12);

  const ScaleRetuner retuner(ep, theta_hat, sigma2_hat);
  const Eigen::VectorXd g0 = base.g_hat.vectorize();
  const Eigen::VectorXd mean0 = ep.problem.Phi * g0;

  ExcessDofResult result;
  double total = 0.0;
  Rng rng(mix_seed(opts.seed, 0x5eedULL));
  for (int rep = 0; rep < opts.n_replicates; ++rep) {
    Eigen::VectorXd Yr;
    if (rep == 0) {
      Yr = ep.problem.Y;
    } else {
      Yr = mean0;
      const double noise_std = std::sqrt(sigma2_hat);
      for (Eigen::Index i = 0; i < pn; ++i) Yr[i] += noise_std * rng.normal();
    }
    try {
      const Eigen::VectorXd bbar_r = retuner.R * Yr;
      const double yty_r = Yr.squaredNorm();
      double trace = 0.0;
      for (Eigen::Index j = 0; j < pn; ++j) {
        const Eigen::VectorXd dj = retuner.R.col(j);
        const double lam_plus = retuner.retune(bbar_r + h * dj, yty_r + 2.0 * h * Yr[j] + h * h);
        const double lam_minus = retuner.retune(bbar_r - h * dj, yty_r - 2.0 * h * Yr[j] + h * h);
        const double fp = retuner.fitted(lam_plus, bbar_r)[j];
        const double fm = retuner.fitted(lam_minus, bbar_r)[j];
        trace += (fp - fm) / (2.0 * h);
      }
      total += trace;
      ++result.replicates_used;
    } catch (const std::exception&) {
      ++result.replicates_failed;
    }
  }
  if (result.replicates_used == 0)
    throw std::runtime_error("excess_degrees_of_freedom: every replicate failed");
  result.excess_dof = total / static_cast<double>(result.replicates_used);
  return result;
}

}  // namespace regid
