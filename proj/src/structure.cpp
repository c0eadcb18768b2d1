#include "regid/structure.hpp"

#include <cmath>

namespace regid {

HankelMap::HankelMap(Eigen::Index r_, Eigen::Index c_, Eigen::Index p_, Eigen::Index m_,
                     Eigen::Index T_)
    : r(r_), c(c_), p(p_), m(m_), T(T_) {
  if (r < 1 || c < 1 || p < 1 || m < 1 || T < 1)
    throw std::invalid_argument("HankelMap: all dimensions must be >= 1");
  if (r + c - 1 > T)
    throw std::invalid_argument("HankelMap: r + c - 1 exceeds the truncation length");
}

Eigen::MatrixXd HankelMap::apply(const Eigen::VectorXd& g) const {
  if (g.size() != dim()) throw std::invalid_argument("HankelMap::apply: wrong vector length");
  Eigen::MatrixXd H(rows(), cols());
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) {
      const Eigen::Index lag = i + j;  // block holds g_{lag+1}
      for (Eigen::Index jj = 0; jj < m; ++jj)
        for (Eigen::Index ii = 0; ii < p; ++ii)
          H(i * p + ii, j * m + jj) = g[(jj * p + ii) * T + lag];
    }
  return H;
}

Eigen::VectorXd HankelMap::adjoint(const Eigen::MatrixXd& M) const {
  if (M.rows() != rows() || M.cols() != cols())
    throw std::invalid_argument("HankelMap::adjoint: wrong matrix dimensions");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) {
      const Eigen::Index lag = i + j;
      for (Eigen::Index jj = 0; jj < m; ++jj)
        for (Eigen::Index ii = 0; ii < p; ++ii)
          g[(jj * p + ii) * T + lag] += M(i * p + ii, j * m + jj);
    }
  return g;
}

Eigen::VectorXd HankelMap::antidiagonal_counts() const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(T);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) w[i + j] += 1.0;
  return w;
}

std::pair<Eigen::Index, Eigen::Index> default_hankel_shape(Eigen::Index T) {
  const Eigen::Index r = (T + 2) / 2;  // ceil((T+1)/2)
  return {r, T + 1 - r};
}

Eigen::MatrixXd hankel(const ImpulseResponse& g, Eigen::Index r, Eigen::Index c) {
  const HankelMap map(r, c, g.n_outputs(), g.n_inputs(), g.truncation());
  return map.apply(g.vectorize());
}

Eigen::VectorXd hankel_adjoint(const Eigen::MatrixXd& M, Eigen::Index r, Eigen::Index c,
                               Eigen::Index p, Eigen::Index m, Eigen::Index T) {
  const HankelMap map(r, c, p, m, T);
  return map.adjoint(M);
}

// -- nuclear norm ---------------------------------------------------------------

namespace {

double nuclear_norm(const Eigen::MatrixXd& M) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues().sum();
}

Eigen::MatrixXd svt(const Eigen::MatrixXd& M, double threshold) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = std::max(s[i] - threshold, 0.0);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

}  // namespace

NuclearNormResult nuclear_norm_identify(const FirRegression& problem, double eta, Eigen::Index r,
                                        Eigen::Index c, const NuclearNormOptions& opts) {
  if (eta < 0.0) throw std::invalid_argument("nuclear_norm_identify: eta must be >= 0");
  const HankelMap map(r, c, problem.p, problem.m, problem.T);
  const Eigen::Index d = problem.d();

  // per-coordinate weights: the Hankel antidiagonal multiplicity of the lag,
  // or 1 for lags the penalty never sees
  const Eigen::VectorXd lag_counts = map.antidiagonal_counts();
  Eigen::VectorXd weights(d);
  for (Eigen::Index ch = 0; ch < problem.p * problem.m; ++ch)
    for (Eigen::Index k = 0; k < problem.T; ++k)
      weights[ch * problem.T + k] = std::max(lag_counts[k], 1.0);

  auto objective = [&](const Eigen::VectorXd& g) {
    return (problem.Y - problem.Phi * g).squaredNorm() +
           (eta > 0.0 ? eta * nuclear_norm(map.apply(g)) : 0.0);
  };

  Eigen::VectorXd g = least_squares(problem).estimate.vectorize();
  double f = objective(g);

  NuclearNormResult result;
  result.objective_trace.push_back(f);

  double step = opts.initial_step;
  const double step_min = 1e-18;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const Eigen::VectorXd grad = 2.0 * (problem.Phi.transpose() * (problem.Phi * g - problem.Y));
    bool accepted = false;
    double f_new = f;
    Eigen::VectorXd g_new;
    while (step >= step_min) {
      const Eigen::VectorXd v = g - step * grad.cwiseQuotient(weights);
      Eigen::VectorXd z = v;
      if (eta > 0.0) {
        const Eigen::VectorXd back = map.adjoint(svt(map.apply(v), step * eta));
        for (Eigen::Index ch = 0; ch < problem.p * problem.m; ++ch)
          for (Eigen::Index k = 0; k < problem.T; ++k)
            if (lag_counts[k] > 0.0)
              z[ch * problem.T + k] = back[ch * problem.T + k] / lag_counts[k];
      }
      f_new = objective(z);
      if (f_new <= f) {
        accepted = true;
        g_new = std::move(z);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent direction at the smallest step
    const double drop = f - f_new;
    g = std::move(g_new);
    f = f_new;
    result.objective_trace.push_back(f);
    step = std::min(step * 1.25, 1e6);
    if (drop <= opts.tolerance * std::max(1.0, std::abs(f))) {
      result.converged = true;
      break;
    }
  }
  result.iterations = iter + 1;
  if (!result.converged) {
    if (iter >= opts.max_iterations)
      result.hit_iteration_cap = true;  // best iterate is still returned
    else
      result.converged = true;  // stalled: objective cannot decrease further
  }
  result.estimate = ImpulseResponse::devectorize(g, problem.T, problem.p, problem.m);
  return result;
}

// -- stable-Hankel prior -----------------------------------------------------------

void StableHankelSpec::validate() const {
  if (!(lambda_s > 0.0) || !(lambda_1 > 0.0) || !(lambda_2 > 0.0))
    throw std::invalid_argument("StableHankelSpec: scales must be positive");
  if (K_s.rows() != K_s.cols() || K_s.rows() != hankel.dim())
    throw std::invalid_argument("StableHankelSpec: K_s dimension mismatch");
  if (U_n.rows() != hankel.rows() || U_n.cols() < 1 || U_n.cols() > hankel.rows())
    throw std::invalid_argument("StableHankelSpec: U_n must have columns in the Hankel row space");
  const Eigen::MatrixXd gram =
      U_n.transpose() * U_n - Eigen::MatrixXd::Identity(U_n.cols(), U_n.cols());
  if (gram.cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("StableHankelSpec: U_n columns are not orthonormal");
}

namespace {

// pseudo-inverse of a PSD kernel; eigenvalues below tolerance are dropped
Eigen::MatrixXd psd_pinv(const Eigen::MatrixXd& K, double rel_tol = 1e-14) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (K + K.transpose()));
  if (eig.info() != Eigen::Success) throw std::runtime_error("psd_pinv: eigensolver failed");
  const double max_eig = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  if (max_eig <= 0.0) throw std::invalid_argument("psd_pinv: kernel is singular beyond tolerance");
  const double cutoff = rel_tol * max_eig;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < inv.size(); ++i)
    if (eig.eigenvalues()[i] > cutoff) inv[i] = 1.0 / eig.eigenvalues()[i];
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

// quadratic-form operator of tr(Q H(g) H(g)'): columns are H'(Q H(e_l))
Eigen::MatrixXd hankel_quadratic_operator(const HankelMap& map, const Eigen::MatrixXd& Q) {
  const Eigen::Index d = map.dim();
  Eigen::MatrixXd P(d, d);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  for (Eigen::Index l = 0; l < d; ++l) {
    e[l] = 1.0;
    P.col(l) = map.adjoint(Q * map.apply(e));
    e[l] = 0.0;
  }
  return 0.5 * (P + P.transpose());
}

}  // namespace

double stable_hankel_penalty(const ImpulseResponse& g, const StableHankelSpec& spec) {
  spec.validate();
  const Eigen::VectorXd v = g.vectorize();
  if (v.size() != spec.hankel.dim())
    throw std::invalid_argument("stable_hankel_penalty: dimension mismatch");
  const Eigen::MatrixXd H = spec.hankel.apply(v);
  const Eigen::MatrixXd PU = spec.U_n * spec.U_n.transpose();
  const Eigen::MatrixXd HHt = H * H.transpose();
  const double stab = spec.lambda_s * v.dot(psd_pinv(spec.K_s) * v);
  const double sig = spec.lambda_1 * (PU * HHt).trace();
  const double comp = spec.lambda_2 * ((HHt).trace() - (PU * HHt).trace());
  return stab + sig + comp;
}

Eigen::MatrixXd stable_hankel_precision(const StableHankelSpec& spec) {
  spec.validate();
  const Eigen::MatrixXd PU = spec.U_n * spec.U_n.transpose();
  const Eigen::MatrixXd PUperp = Eigen::MatrixXd::Identity(PU.rows(), PU.cols()) - PU;
  const Eigen::MatrixXd Q = spec.lambda_1 * PU + spec.lambda_2 * PUperp;
  return spec.lambda_s * psd_pinv(spec.K_s) + hankel_quadratic_operator(spec.hankel, Q);
}

StableHankelResult stable_hankel_identify(const FirRegression& problem,
                                          const Eigen::MatrixXd& K_s, Eigen::Index r,
                                          Eigen::Index c, const StableHankelOptions& opts) {
  const HankelMap map(r, c, problem.p, problem.m, problem.T);
  if (K_s.rows() != problem.d())
    throw std::invalid_argument("stable_hankel_identify: K_s dimension mismatch");
  const double sigma2 = opts.sigma2 > 0.0 ? opts.sigma2 : estimate_noise_variance(problem);

  // initialize from the stability prior alone, scale tuned by evidence
  EvidenceProblem init;
  init.problem = problem;
  init.kernel = KernelTemplate::fixed_shape(K_s);
  init.sigma2_policy = Sigma2Policy::Fixed;
  init.sigma2_fixed = sigma2;
  const Estimate base = empirical_bayes(init, opts.optimizer);
  const double lambda_s0 = base.hyperparams.scale[0];

  const Eigen::MatrixXd Ks_inv = psd_pinv(K_s);
  const Eigen::Index rp = map.rows();
  const Eigen::MatrixXd identity_rp = Eigen::MatrixXd::Identity(rp, rp);

  const bool pinned = opts.fixed_lambda12.has_value();
  const Eigen::Index n_free = pinned ? 1 : 3;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n_free, std::log(opts.lambda_lower));
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(n_free, std::log(opts.lambda_upper));

  StableHankelResult result;
  result.evidence_by_n.resize(opts.n_max);
  result.evidence_by_n.setConstant(-std::numeric_limits<double>::infinity());
  double best_evidence = -std::numeric_limits<double>::infinity();

  const Eigen::Index n_cap = std::min<Eigen::Index>(opts.n_max, rp);
  for (Eigen::Index n = 1; n <= n_cap; ++n) {
    Eigen::VectorXd g = base.g_hat.vectorize();
    Eigen::VectorXd theta(3);
    theta << lambda_s0, pinned ? opts.fixed_lambda12->first : 1.0,
        pinned ? opts.fixed_lambda12->second : 1.0;
    double evidence = -std::numeric_limits<double>::infinity();
    Estimate current = base;
    int sweep = 0;
    for (; sweep < opts.max_sweeps; ++sweep) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(map.apply(g), Eigen::ComputeThinU);
      const Eigen::MatrixXd U = svd.matrixU().leftCols(n);
      const Eigen::MatrixXd PU = U * U.transpose();
      const Eigen::MatrixXd T_sig = hankel_quadratic_operator(map, PU);
      const Eigen::MatrixXd T_comp = hankel_quadratic_operator(map, identity_rp - PU);

      auto precision_of = [&](const Eigen::VectorXd& th) {
        return Eigen::MatrixXd(th[0] * Ks_inv + th[1] * T_sig + th[2] * T_comp);
      };
      auto objective = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd th(3);
        if (pinned)
          th << std::exp(x[0]), opts.fixed_lambda12->first, opts.fixed_lambda12->second;
        else
          th = x.array().exp();
        bool ok = true;
        const double value =
            log_marginal_likelihood_precision(problem, precision_of(th), sigma2, &ok);
        return ok ? -value : 1e300;
      };

      SimplexOptions sopts;
      sopts.max_iterations = opts.optimizer.max_iterations;
      sopts.tolerance = opts.optimizer.tolerance;
      Eigen::VectorXd warm(n_free);
      if (pinned)
        warm << std::log(theta[0]);
      else
        warm = theta.array().log();
      for (Eigen::Index i = 0; i < n_free; ++i)
        warm[i] = std::clamp(warm[i], lo[i], hi[i]);
      SimplexResult best_run = minimize_simplex(objective, warm, lo, hi, sopts);
      for (int s = 1; s < opts.optimizer.n_starts; ++s) {
        Eigen::VectorXd x0(n_free);
        for (Eigen::Index i = 0; i < n_free; ++i) {
          double frac = (s + 0.5) / static_cast<double>(opts.optimizer.n_starts) +
                        0.3819660112501051 * static_cast<double>(i);
          frac -= std::floor(frac);
          x0[i] = lo[i] + frac * (hi[i] - lo[i]);
        }
        const SimplexResult run = minimize_simplex(objective, x0, lo, hi, sopts);
        if (run.value < best_run.value) best_run = run;
      }
      if (best_run.value >= 1e300)
        throw std::runtime_error("stable_hankel_identify: evidence failed at every start");

      if (pinned)
        theta << std::exp(best_run.x[0]), opts.fixed_lambda12->first,
            opts.fixed_lambda12->second;
      else
        theta = best_run.x.array().exp();
      evidence = -best_run.value;

      current = posterior_mean_precision(problem, precision_of(theta), sigma2, false);
      const Eigen::VectorXd g_new = current.g_hat.vectorize();
      const double rel = (g_new - g).norm() / std::max(g.norm(), 1e-300);
      g = g_new;
      if (rel < opts.tolerance) {
        ++sweep;
        break;
      }
    }
    result.evidence_by_n[n - 1] = evidence;
    if (evidence > best_evidence) {
      best_evidence = evidence;
      result.selected_n = n;
      result.estimate = current;
      result.lambda_s = theta[0];
      result.lambda_1 = theta[1];
      result.lambda_2 = theta[2];
      result.sweeps = sweep;
    }
  }
  if (result.selected_n == 0)
    throw std::runtime_error("stable_hankel_identify: no candidate rank produced evidence");
  return result;
}

// -- ARD ---------------------------------------------------------------------------

ArdResult ard_mimo_identify(const IODataset& data, Eigen::Index T, const ArdOptions& opts) {
  data.validate();
  const Eigen::Index p = data.n_outputs();
  const Eigen::Index m = data.n_inputs();
  const FirRegression fr = build_fir_regression(data, T, InitialCondition::ZeroPad);

  EvidenceProblem ep;
  ep.problem = fr;
  ep.kernel = KernelTemplate::mimo(opts.block_family, T, p, m, data.sample_time,
                                   opts.shared_shape);
  ep.sigma2_policy = opts.sigma2_policy;
  ep.sigma2_fixed = opts.sigma2_fixed;

  const Estimate tuned = empirical_bayes(ep, opts.optimizer);
  const double sigma2 = tuned.hyperparams.sigma2;
  const Eigen::Index channels = p * m;

  Eigen::VectorXd theta(ep.kernel.n_free());
  theta.head(channels) = tuned.hyperparams.scale;
  theta.tail(ep.kernel.n_shapes()) = tuned.hyperparams.shape;

  // threshold: anything at the lower bound is a zero, and zeroing a channel
  // is kept whenever the evidence does not object; a second pass catches
  // channels that only become redundant once a neighbor is switched off
  double evidence = tuned.log_evidence;
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      if (theta[c] == 0.0) continue;
      if (theta[c] <= ep.kernel.lower[c] + opts.zero_tolerance) {
        theta[c] = 0.0;
        evidence = log_marginal_likelihood(fr, ep.kernel.realize(theta), sigma2);
        continue;
      }
      Eigen::VectorXd candidate = theta;
      candidate[c] = 0.0;
      bool ok = true;
      const double ev0 =
          log_marginal_likelihood(fr, ep.kernel.realize(candidate), sigma2, &ok);
      if (ok && ev0 >= evidence - 1e-9 * std::max(1.0, std::abs(evidence))) {
        theta = candidate;
        evidence = ev0;
      }
    }
  }

  ArdResult result;
  KernelMatrix K{ep.kernel.realize(theta), ep.kernel.to_spec(theta)};
  result.estimate =
      posterior_mean(fr, K, sigma2, PosteriorForm::Auto, opts.optimizer.with_covariance);
  result.estimate.log_evidence = evidence;
  result.estimate.flags = tuned.flags;
  result.channel_scales = theta.head(channels);
  result.channel_graph.resize(p, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < p; ++i) result.channel_graph(i, j) = theta[j * p + i] > 0.0;
  return result;
}

}  // namespace regid
