// Command-line experiment runner: simulate, identify, benchmark, compound.
// Exit codes: 0 success, 2 config error, 3 numerical failure in every run.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

#include "regid/experiments.hpp"
#include "regid/io.hpp"
#include "regid/random.hpp"
#include "regid/structure.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

json load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(regid::read_text_file(path));
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return j;
}

std::string out_path(const std::string& out_dir, const std::string& name) {
  fs::create_directories(out_dir);
  return (fs::path(out_dir) / name).string();
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 std::uint64_t seed_override, bool has_seed) {
  const json cfg_json = load_config(config_path);
  regid::SystemConfig system = regid::system_config_from_json(cfg_json.value("system", json::object()));
  regid::DataConfig data_cfg = regid::data_config_from_json(cfg_json.value("data", json::object()));
  std::uint64_t seed = cfg_json.value("seed", 1u);
  if (has_seed) seed = seed_override;

  const regid::ImpulseResponse truth = regid::generate_random_system(system, regid::mix_seed(seed, 1));
  regid::Rng rng_in(regid::mix_seed(seed, 2));
  Eigen::MatrixXd inputs(data_cfg.N, system.m);
  for (Eigen::Index t = 0; t < data_cfg.N; ++t)
    for (Eigen::Index j = 0; j < system.m; ++j) inputs(t, j) = rng_in.normal();
  if (data_cfg.input == regid::InputKind::Filtered) {
    const double a = data_cfg.input_filter_pole;
    const double scale = std::sqrt(1.0 - a * a);
    for (Eigen::Index j = 0; j < system.m; ++j) {
      double state = 0.0;
      for (Eigen::Index t = 0; t < data_cfg.N; ++t) {
        state = a * state + scale * inputs(t, j);
        inputs(t, j) = state;
      }
    }
  }
  const Eigen::MatrixXd y0 = regid::predict_outputs(truth, inputs);
  Eigen::MatrixXd centered = y0;
  for (Eigen::Index i = 0; i < centered.cols(); ++i)
    centered.col(i).array() -= centered.col(i).mean();
  const double sigma2 =
      centered.squaredNorm() / static_cast<double>(centered.size()) /
      std::pow(10.0, data_cfg.snr_db / 10.0);
  regid::IODataset data =
      regid::simulate_oe(truth, inputs, std::sqrt(sigma2), regid::mix_seed(seed, 3),
                         data_cfg.sample_time);

  regid::write_text_file(out_path(out_dir, "data.csv"), regid::iodataset_to_csv(data));
  regid::write_text_file(out_path(out_dir, "truth.json"),
                         regid::impulse_response_to_json(truth).dump(2) + "\n");
  json meta{{"sample_time", data.sample_time}, {"noise_variance", sigma2}, {"seed", seed}};
  regid::write_text_file(out_path(out_dir, "meta.json"), meta.dump(2) + "\n");
  std::cout << "wrote " << out_path(out_dir, "data.csv") << "\n";
  return 0;
}

int run_identify(const std::string& config_path, const std::string& data_path,
                 const std::string& meta_path, const std::string& truth_path,
                 const std::string& out_dir) {
  const json cfg_json = load_config(config_path);
  double sample_time = 1.0;
  if (!meta_path.empty()) {
    const json meta = load_config(meta_path);
    sample_time = meta.value("sample_time", 1.0);
  }
  const regid::IODataset data =
      regid::iodataset_from_csv(regid::read_text_file(data_path), sample_time);
  const regid::EstimatorConfig est_cfg =
      regid::estimator_config_from_json(cfg_json.value("estimator", json::object()));

  regid::ImpulseResponse estimate;
  json diagnostics;
  if (est_cfg.kind == "ls") {
    const regid::FirRegression fr = regid::build_fir_regression(data, est_cfg.T);
    const regid::LeastSquaresResult ls = regid::least_squares(fr);
    estimate = ls.estimate;
    diagnostics["rank_deficient"] = ls.rank_deficient;
  } else if (est_cfg.kind == "fir_aic" || est_cfg.kind == "fir_bic") {
    const regid::OrderSelectionResult sel = regid::order_selection_baseline(
        data, est_cfg.T,
        est_cfg.kind == "fir_aic" ? regid::OrderCriterion::AIC : regid::OrderCriterion::BIC);
    estimate = sel.estimate;
    diagnostics["selected_order"] = sel.selected_order;
  } else if (est_cfg.kind == "eb") {
    regid::EvidenceProblem ep;
    ep.problem = regid::build_fir_regression(data, est_cfg.T);
    ep.kernel = regid::estimator_kernel_template(est_cfg, data.n_outputs(), data.n_inputs(),
                                                 data.sample_time);
    ep.sigma2_policy = est_cfg.sigma2_policy;
    const regid::Estimate fit = regid::empirical_bayes(ep, regid::estimator_optimizer(est_cfg));
    estimate = fit.g_hat;
    diagnostics["log_evidence"] = fit.log_evidence;
    diagnostics["dof"] = fit.dof;
    diagnostics["sigma2"] = fit.hyperparams.sigma2;
    Eigen::VectorXd theta(ep.kernel.n_free());
    theta.head(fit.hyperparams.scale.size()) = fit.hyperparams.scale;
    theta.tail(fit.hyperparams.shape.size()) = fit.hyperparams.shape;
    diagnostics["kernel"] = regid::kernel_spec_to_json(ep.kernel.to_spec(theta));
  } else if (est_cfg.kind == "nuclear_norm") {
    const regid::FirRegression fr = regid::build_fir_regression(data, est_cfg.T);
    const auto [r, c] = est_cfg.hankel_r > 0
                            ? std::make_pair(est_cfg.hankel_r, est_cfg.hankel_c)
                            : regid::default_hankel_shape(est_cfg.T);
    const regid::NuclearNormResult nn = regid::nuclear_norm_identify(fr, est_cfg.eta, r, c);
    estimate = nn.estimate;
    diagnostics["converged"] = nn.converged;
    diagnostics["iterations"] = nn.iterations;
    diagnostics["objective"] = nn.objective_trace.back();
  } else if (est_cfg.kind == "stable_hankel") {
    const regid::FirRegression fr = regid::build_fir_regression(data, est_cfg.T);
    const auto [r, c] = est_cfg.hankel_r > 0
                            ? std::make_pair(est_cfg.hankel_r, est_cfg.hankel_c)
                            : regid::default_hankel_shape(est_cfg.T);
    regid::StableHankelOptions opts;
    opts.n_max = est_cfg.n_max;
    const regid::StableHankelResult sh = regid::stable_hankel_identify(
        fr, regid::tc_kernel(est_cfg.T, 1.0, est_cfg.base_beta, data.sample_time).K, r, c,
        opts);
    estimate = sh.estimate.g_hat;
    diagnostics["selected_n"] = sh.selected_n;
    diagnostics["log_evidence"] = sh.estimate.log_evidence;
    diagnostics["lambda_s"] = sh.lambda_s;
    diagnostics["lambda_1"] = sh.lambda_1;
    diagnostics["lambda_2"] = sh.lambda_2;
  } else if (est_cfg.kind == "ard") {
    regid::ArdOptions opts;
    opts.shared_shape = est_cfg.shared_shape;
    opts.sigma2_policy = est_cfg.sigma2_policy;
    opts.optimizer.n_starts = est_cfg.starts;
    opts.optimizer.with_covariance = false;
    const regid::ArdResult ard = regid::ard_mimo_identify(data, est_cfg.T, opts);
    estimate = ard.estimate.g_hat;
    diagnostics["channel_graph"] = regid::channel_graph_to_json(ard.channel_graph);
    diagnostics["log_evidence"] = ard.estimate.log_evidence;
    diagnostics["sigma2"] = ard.estimate.hyperparams.sigma2;
  } else {
    throw std::invalid_argument("identify: unknown estimator kind " + est_cfg.kind);
  }

  json out = regid::impulse_response_to_json(estimate);
  out["diagnostics"] = diagnostics;
  regid::write_text_file(out_path(out_dir, "estimate.json"), out.dump(2) + "\n");

  if (!truth_path.empty()) {
    const regid::ImpulseResponse truth =
        regid::impulse_response_from_json(load_config(truth_path));
    const regid::FitReport report = regid::fit_metrics(truth, estimate, data);
    json rj = regid::fit_report_to_json(report);
    rj["impulse_fit"] = regid::impulse_fit_percent(truth, estimate);
    regid::write_text_file(out_path(out_dir, "report.json"), rj.dump(2) + "\n");
  }
  std::cout << "wrote " << out_path(out_dir, "estimate.json") << "\n";
  return 0;
}

int run_benchmark_cmd(const std::string& config_path, const std::string& out_dir,
                      std::uint64_t seed_override, bool has_seed, int workers_override) {
  const json cfg_json = load_config(config_path);
  regid::BenchmarkConfig cfg = regid::benchmark_config_from_json(cfg_json);
  if (has_seed) cfg.seed = seed_override;
  if (workers_override > 0) cfg.workers = workers_override;

  const regid::BenchmarkResult result = regid::run_benchmark(cfg);
  bool any_ok = false;
  for (const auto& row : result.rows) any_ok = any_ok || row.status == "ok";

  regid::write_text_file(out_path(out_dir, "benchmark.csv"), regid::benchmark_csv(result));
  regid::write_text_file(out_path(out_dir, "summary.json"),
                         regid::benchmark_summary(result).dump(2) + "\n");
  std::cout << "wrote " << out_path(out_dir, "benchmark.csv") << "\n";
  return any_ok ? 0 : kExitNumerical;
}

int run_compound_cmd(const std::string& config_path, const std::string& out_dir,
                     std::uint64_t seed_override, bool has_seed, int workers_override) {
  const json cfg_json = load_config(config_path);
  regid::CompoundStudyConfig cfg = regid::compound_config_from_json(cfg_json);
  if (has_seed) cfg.seed = seed_override;
  if (workers_override > 0) cfg.workers = workers_override;

  const regid::CompoundStudyResult result = regid::run_compound_study(cfg);
  bool any_ok = false;
  for (const auto& row : result.rows) any_ok = any_ok || row.n_used > 0;

  regid::write_text_file(out_path(out_dir, "risk.csv"), regid::compound_csv(result));
  std::cout << "wrote " << out_path(out_dir, "risk.csv") << "\n";
  return any_ok ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-regularized identification of linear dynamical systems"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", data_path, meta_path, truth_path;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int workers = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
    auto* c = cmd->add_option("--config", config_path, "JSON config file");
    if (needs_config) c->required();
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
      has_seed = true;
    });
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate a random system and a dataset");
  add_common(sim);

  CLI::App* ident = app.add_subcommand("identify", "fit one estimator to a dataset");
  add_common(ident);
  ident->add_option("--data", data_path, "dataset CSV")->required();
  ident->add_option("--meta", meta_path, "sidecar JSON with sample_time");
  ident->add_option("--truth", truth_path, "true impulse response JSON, for fit metrics");

  CLI::App* bench = app.add_subcommand("benchmark", "Monte Carlo estimator comparison");
  add_common(bench);
  bench->add_option("--workers", workers, "worker thread count");

  CLI::App* comp = app.add_subcommand("compound", "compound-risk study");
  add_common(comp);
  comp->add_option("--workers", workers, "worker thread count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(config_path, out_dir, seed, has_seed);
    if (ident->parsed())
      return run_identify(config_path, data_path, meta_path, truth_path, out_dir);
    if (bench->parsed()) return run_benchmark_cmd(config_path, out_dir, seed, has_seed, workers);
    if (comp->parsed()) return run_compound_cmd(config_path, out_dir, seed, has_seed, workers);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
