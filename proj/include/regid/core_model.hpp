#pragma once

#include <cstdint>
#include <utility>

#include "regid/types.hpp"

namespace regid {

/// Assemble the stacked regression Y = Phi g + E from input/output data for an
/// FIR model of length T. Under ZeroPad every sample is kept and pre-sample
/// inputs are zero; under Trim the first T samples are dropped.
FirRegression build_fir_regression(const IODataset& data, Eigen::Index T,
                                   InitialCondition policy = InitialCondition::ZeroPad);

/// Output-error simulation: convolve g with the inputs (zero initial
/// conditions) and add i.i.d. Gaussian noise. Deterministic given the seed.
IODataset simulate_oe(const ImpulseResponse& g, const Eigen::MatrixXd& inputs,
                      double noise_std, std::uint64_t seed, double sample_time = 1.0);

/// Noise-free convolution of g with fresh inputs (zero initial conditions).
Eigen::MatrixXd predict_outputs(const ImpulseResponse& g, const Eigen::MatrixXd& inputs);

struct LeastSquaresResult {
  ImpulseResponse estimate;
  Eigen::Index rank = 0;
  bool rank_deficient = false;  // minimum-norm solution was returned
};

/// Unregularized least squares via a rank-revealing factorization.
LeastSquaresResult least_squares(const FirRegression& problem);

enum class OrderCriterion { AIC, BIC };

struct OrderSelectionResult {
  Eigen::Index selected_order = 0;
  ImpulseResponse estimate;
  std::vector<double> criterion_values;  // entry t-1 holds the criterion at order t
};

/// FIR-order selection baseline: least squares at every order 1..T_max scored
/// by n*log(RSS/n) + c(n)*(p*m*T), c = 2 for AIC and log(n) for BIC, where n
/// counts stacked scalar observations.
OrderSelectionResult order_selection_baseline(const IODataset& data, Eigen::Index T_max,
                                              OrderCriterion criterion);

/// Impulse-response and prediction error metrics against held-out data.
/// Estimates of different truncation are aligned by zero padding.
FitReport fit_metrics(const ImpulseResponse& truth, const ImpulseResponse& estimate,
                      const IODataset& test_data);

/// Prediction-only variant for when the true response is unknown.
FitReport fit_metrics(const ImpulseResponse& estimate, const IODataset& test_data);

/// Head/tail hold-out split for estimator comparisons; train gets
/// round(fraction * N) samples.
std::pair<IODataset, IODataset> split_holdout(const IODataset& data, double train_fraction);

}  // namespace regid
