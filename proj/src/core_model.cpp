#include "regid/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regid/random.hpp"

namespace regid {

void IODataset::validate() const {
  if (inputs.rows() != outputs.rows())
    throw std::invalid_argument("IODataset: inputs and outputs must cover the same samples");
  if (outputs.rows() < 1) throw std::invalid_argument("IODataset: at least one sample required");
  if (!(sample_time > 0.0)) throw std::invalid_argument("IODataset: sample_time must be positive");
  if (!inputs.allFinite() || !outputs.allFinite())
    throw std::invalid_argument("IODataset: non-finite entries");
}

void ImpulseResponse::validate() const {
  if (coeffs.empty()) throw std::invalid_argument("ImpulseResponse: empty coefficient list");
  const Eigen::Index p = coeffs.front().rows();
  const Eigen::Index m = coeffs.front().cols();
  for (const auto& gk : coeffs) {
    if (gk.rows() != p || gk.cols() != m)
      throw std::invalid_argument("ImpulseResponse: inconsistent coefficient dimensions");
    if (!gk.allFinite()) throw std::invalid_argument("ImpulseResponse: non-finite coefficient");
  }
}

Eigen::VectorXd ImpulseResponse::vectorize() const {
  const Eigen::Index T = truncation();
  const Eigen::Index p = n_outputs();
  const Eigen::Index m = n_inputs();
  Eigen::VectorXd g(T * p * m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < p; ++i) {
      const Eigen::Index offset = (j * p + i) * T;
      for (Eigen::Index k = 0; k < T; ++k) g[offset + k] = coeffs[k](i, j);
    }
  return g;
}

ImpulseResponse ImpulseResponse::devectorize(const Eigen::VectorXd& g, Eigen::Index T,
                                             Eigen::Index p, Eigen::Index m) {
  if (g.size() != T * p * m)
    throw std::invalid_argument("ImpulseResponse::devectorize: size does not match T*p*m");
  ImpulseResponse out;
  out.coeffs.assign(static_cast<std::size_t>(T), Eigen::MatrixXd::Zero(p, m));
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < p; ++i) {
      const Eigen::Index offset = (j * p + i) * T;
      for (Eigen::Index k = 0; k < T; ++k) out.coeffs[k](i, j) = g[offset + k];
    }
  return out;
}

ImpulseResponse ImpulseResponse::from_sequence(const Eigen::VectorXd& g) {
  return devectorize(g, g.size(), 1, 1);
}

Eigen::VectorXd ImpulseResponse::channel(Eigen::Index i, Eigen::Index j) const {
  Eigen::VectorXd out(truncation());
  for (Eigen::Index k = 0; k < truncation(); ++k) out[k] = coeffs[k](i, j);
  return out;
}

FirRegression build_fir_regression(const IODataset& data, Eigen::Index T,
                                   InitialCondition policy) {
  data.validate();
  if (T < 1) throw std::invalid_argument("build_fir_regression: T must be >= 1");
  const Eigen::Index N = data.samples();
  const Eigen::Index m = data.n_inputs();
  const Eigen::Index p = data.n_outputs();
  if (policy == InitialCondition::Trim && T > N)
    throw std::invalid_argument("build_fir_regression: T exceeds data length under Trim");

  const Eigen::Index t0 = (policy == InitialCondition::Trim) ? T + 1 : 1;
  const Eigen::Index n_samples = N - t0 + 1;
  const Eigen::Index d = p * m * T;

  FirRegression fr;
  fr.T = T;
  fr.p = p;
  fr.m = m;
  fr.N = N;
  fr.policy = policy;
  fr.Y.resize(p * n_samples);
  fr.Phi = Eigen::MatrixXd::Zero(p * n_samples, d);

  for (Eigen::Index t = t0; t <= N; ++t) {
    const Eigen::Index row0 = (t - t0) * p;
    for (Eigen::Index i = 0; i < p; ++i) fr.Y[row0 + i] = data.outputs(t - 1, i);
    for (Eigen::Index k = 1; k <= T; ++k) {
      if (t - k < 1) break;  // ZeroPad: earlier lags are zero
      for (Eigen::Index j = 0; j < m; ++j) {
        const double u = data.inputs(t - k - 1, j);
        for (Eigen::Index i = 0; i < p; ++i) fr.Phi(row0 + i, (j * p + i) * T + (k - 1)) = u;
      }
    }
  }
  return fr;
}

Eigen::MatrixXd predict_outputs(const ImpulseResponse& g, const Eigen::MatrixXd& inputs) {
  g.validate();
  if (inputs.cols() != g.n_inputs())
    throw std::invalid_argument("predict_outputs: input channel count mismatch");
  const Eigen::Index N = inputs.rows();
  const Eigen::Index p = g.n_outputs();
  const Eigen::Index T = g.truncation();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(N, p);
  for (Eigen::Index t = 1; t <= N; ++t)
    for (Eigen::Index k = 1; k <= T; ++k) {
      if (t - k < 1) break;
      y.row(t - 1) += (g.coeffs[k - 1] * inputs.row(t - k - 1).transpose()).transpose();
    }
  return y;
}

IODataset simulate_oe(const ImpulseResponse& g, const Eigen::MatrixXd& inputs,
                      double noise_std, std::uint64_t seed, double sample_time) {
  if (noise_std < 0.0) throw std::invalid_argument("simulate_oe: negative noise_std");
  IODataset data;
  data.inputs = inputs;
  data.outputs = predict_outputs(g, inputs);
  data.sample_time = sample_time;
  if (noise_std > 0.0) {
    Rng rng(seed);
    for (Eigen::Index t = 0; t < data.outputs.rows(); ++t)
      for (Eigen::Index i = 0; i < data.outputs.cols(); ++i)
        data.outputs(t, i) += noise_std * rng.normal();
  }
  return data;
}

LeastSquaresResult least_squares(const FirRegression& problem) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(problem.Phi);
  LeastSquaresResult result;
  result.rank = cod.rank();
  result.rank_deficient = result.rank < problem.d();
  const Eigen::VectorXd g = cod.solve(problem.Y);  // minimum-norm when rank deficient
  result.estimate = ImpulseResponse::devectorize(g, problem.T, problem.p, problem.m);
  return result;
}

OrderSelectionResult order_selection_baseline(const IODataset& data, Eigen::Index T_max,
                                              OrderCriterion criterion) {
  if (T_max < 1) throw std::invalid_argument("order_selection_baseline: T_max must be >= 1");
  OrderSelectionResult result;
  result.criterion_values.reserve(static_cast<std::size_t>(T_max));
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index T = 1; T <= T_max; ++T) {
    const FirRegression fr = build_fir_regression(data, T, InitialCondition::ZeroPad);
    const LeastSquaresResult ls = least_squares(fr);
    const double n = static_cast<double>(fr.n_rows());
    double rss = (fr.Y - fr.Phi * ls.estimate.vectorize()).squaredNorm();
    // floor at the numerical noise of an exact fit so the log stays comparable
    rss = std::max(rss, 1e-28 * std::max(fr.Y.squaredNorm(), 1.0));
    const double penalty = (criterion == OrderCriterion::AIC) ? 2.0 : std::log(n);
    const double value =
        n * std::log(rss / n) + penalty * static_cast<double>(fr.p * fr.m * T);
    result.criterion_values.push_back(value);
    if (value < best) {
      best = value;
      result.selected_order = T;
      result.estimate = ls.estimate;
    }
  }
  return result;
}

namespace {

Eigen::VectorXd padded_vec(const ImpulseResponse& g, Eigen::Index T) {
  ImpulseResponse padded = g;
  while (padded.truncation() < T)
    padded.coeffs.push_back(Eigen::MatrixXd::Zero(g.n_outputs(), g.n_inputs()));
  return padded.vectorize();
}

void fill_prediction_metrics(FitReport& report, const ImpulseResponse& estimate,
                             const IODataset& test_data) {
  test_data.validate();
  if (test_data.n_inputs() != estimate.n_inputs() ||
      test_data.n_outputs() != estimate.n_outputs())
    throw std::invalid_argument("fit_metrics: test data dimensions do not match estimate");
  const Eigen::MatrixXd y_hat = predict_outputs(estimate, test_data.inputs);
  const Eigen::MatrixXd err = test_data.outputs - y_hat;
  report.prediction_mse = err.squaredNorm() / static_cast<double>(err.size());
  const double center = test_data.outputs.mean();
  const double denom = (test_data.outputs.array() - center).matrix().norm();
  if (denom > 0.0)
    report.fit_percent = 100.0 * (1.0 - err.norm() / denom);
  else
    report.fit_percent = (err.norm() == 0.0) ? 100.0 : -std::numeric_limits<double>::infinity();
}

}  // namespace

FitReport fit_metrics(const ImpulseResponse& truth, const ImpulseResponse& estimate,
                      const IODataset& test_data) {
  truth.validate();
  estimate.validate();
  if (truth.n_outputs() != estimate.n_outputs() || truth.n_inputs() != estimate.n_inputs())
    throw std::invalid_argument("fit_metrics: truth/estimate channel dimensions differ");
  FitReport report;
  const Eigen::Index T = std::max(truth.truncation(), estimate.truncation());
  const Eigen::VectorXd diff = padded_vec(truth, T) - padded_vec(estimate, T);
  report.impulse_mse = diff.squaredNorm() / static_cast<double>(diff.size());
  fill_prediction_metrics(report, estimate, test_data);
  return report;
}

FitReport fit_metrics(const ImpulseResponse& estimate, const IODataset& test_data) {
  estimate.validate();
  FitReport report;
  fill_prediction_metrics(report, estimate, test_data);
  return report;
}

std::pair<IODataset, IODataset> split_holdout(const IODataset& data, double train_fraction) {
  data.validate();
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw std::invalid_argument("split_holdout: fraction must lie in (0,1)");
  const Eigen::Index N = data.samples();
  const Eigen::Index n_train = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::lround(train_fraction * static_cast<double>(N))), 1,
      N - 1);
  IODataset train, test;
  train.sample_time = test.sample_time = data.sample_time;
  train.inputs = data.inputs.topRows(n_train);
  train.outputs = data.outputs.topRows(n_train);
  test.inputs = data.inputs.bottomRows(N - n_train);
  test.outputs = data.outputs.bottomRows(N - n_train);
  return {std::move(train), std::move(test)};
}

}  // namespace regid
