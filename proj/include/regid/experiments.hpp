#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "regid/bayes.hpp"
#include "regid/compound.hpp"

namespace regid {

/// Random stable rational test systems, one per scalar channel: poles and
/// zeros drawn uniformly in an annulus (complex ones in conjugate pairs),
/// truncated to FIR form once the tail energy is negligible.
struct SystemConfig {
  Eigen::Index p = 1, m = 1;
  int order = 3;
  double pole_radius_min = 0.3, pole_radius_max = 0.9;
  double zero_radius_min = 0.0, zero_radius_max = 0.9;
  Eigen::Index truncation = 128;
  double tail_energy = 1e-8;                         // relative to total energy
  std::vector<std::pair<int, int>> null_channels;    // (output, input), zero response
};

ImpulseResponse generate_random_system(const SystemConfig& cfg, std::uint64_t seed);

enum class InputKind { White, Filtered };

struct DataConfig {
  Eigen::Index N = 200;
  InputKind input = InputKind::White;
  double input_filter_pole = 0.8;  // for Filtered: first-order low-pass
  double snr_db = 10.0;            // 10 log10(var(noise-free output)/sigma2)
  Eigen::Index test_N = 200;
  double sample_time = 1.0;
};

struct EstimatorConfig {
  std::string name;          // row label in the results
  std::string kind = "eb";   // ls | fir_aic | fir_bic | eb | nuclear_norm | stable_hankel | ard
  Eigen::Index T = 50;       // FIR length (T_max for order selection)
  KernelFamily family = KernelFamily::TC;
  Sigma2Policy sigma2_policy = Sigma2Policy::ResidualPlugin;
  int starts = 5;
  double tolerance = 1e-6;
  int max_iterations = 400;
  std::optional<std::pair<double, double>> scale_bounds;  // hyperparameter box override
  std::optional<std::pair<double, double>> shape_bounds;
  double eta = 1.0;              // nuclear_norm penalty weight
  Eigen::Index hankel_r = 0, hankel_c = 0;  // 0, 0 = near-square default
  Eigen::Index n_max = 4;        // stable_hankel rank candidates
  double base_beta = 0.5;        // stable_hankel base-kernel decay
  bool shared_shape = true;      // ard and MIMO eb: one decay shared by all channels
};

/// Kernel template for an eb estimator: scalar family for SISO data, the
/// block-diagonal MIMO assembly otherwise, with any configured bound overrides.
KernelTemplate estimator_kernel_template(const EstimatorConfig& cfg, Eigen::Index p,
                                         Eigen::Index m, double sample_time);

OptimizerConfig estimator_optimizer(const EstimatorConfig& cfg);

struct BenchmarkConfig {
  SystemConfig system;
  DataConfig data;
  std::vector<EstimatorConfig> estimators;
  int n_runs = 100;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct BenchmarkRow {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::string estimator;
  std::string status = "ok";  // failures carry "failed"; the run continues
  double impulse_mse = std::numeric_limits<double>::quiet_NaN();
  double impulse_fit = std::numeric_limits<double>::quiet_NaN();
  double prediction_mse = std::numeric_limits<double>::quiet_NaN();
  double fit_percent = std::numeric_limits<double>::quiet_NaN();
  double sigma2 = std::numeric_limits<double>::quiet_NaN();
  double log_evidence = std::numeric_limits<double>::quiet_NaN();
  double dof = std::numeric_limits<double>::quiet_NaN();
  int selected_order = -1;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;  // ordered by (run, estimator) regardless of workers
};

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg);
std::string benchmark_csv(const BenchmarkResult& result);
nlohmann::json benchmark_summary(const BenchmarkResult& result);

struct CompoundStudyConfig {
  Eigen::Index B = 10;
  double sigma2 = 1.0;
  std::vector<double> alpha_norms{0.0, 1.0, 5.0, 20.0};
  std::vector<std::string> rules{"ls", "js", "js_plus", "eb"};
  int n_rep = 100000;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct CompoundRow {
  std::string rule;
  Eigen::Index B = 0;
  double alpha_norm = 0.0;
  double risk = 0.0;
  double std_error = 0.0;
  int n_used = 0;
  int n_failed = 0;
};

struct CompoundStudyResult {
  std::vector<CompoundRow> rows;
};

CompoundStudyResult run_compound_study(const CompoundStudyConfig& cfg);
std::string compound_csv(const CompoundStudyResult& result);

EstimationRule compound_rule_by_name(const std::string& name, double sigma2);

// -- JSON config parsing (shared by the command-line driver and tests) --------

SystemConfig system_config_from_json(const nlohmann::json& j);
DataConfig data_config_from_json(const nlohmann::json& j);
EstimatorConfig estimator_config_from_json(const nlohmann::json& j);
BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j);
CompoundStudyConfig compound_config_from_json(const nlohmann::json& j);

/// 100 (1 - ||a - b|| / ||a - mean(a)||): the normalized-fit formula applied
/// to vectorized impulse responses (padded to equal truncation).
double impulse_fit_percent(const ImpulseResponse& truth, const ImpulseResponse& estimate);

}  // namespace regid
