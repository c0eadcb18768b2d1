#include "regid/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "regid/io.hpp"
#include "regid/random.hpp"
#include "regid/structure.hpp"

namespace regid {

namespace {

// multiply a monic real polynomial by the factors of randomly drawn roots
std::vector<double> poly_from_random_roots(Rng& rng, int count, double r_min, double r_max) {
  std::vector<double> poly{1.0};
  auto multiply = [&poly](const std::vector<double>& factor) {
    std::vector<double> out(poly.size() + factor.size() - 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (std::size_t j = 0; j < factor.size(); ++j) out[i + j] += poly[i] * factor[j];
    poly = std::move(out);
  };
  int remaining = count;
  while (remaining > 0) {
    const bool complex_pair = remaining >= 2 && rng.uniform01() < 0.5;
    if (complex_pair) {
      const double radius = rng.uniform(r_min, r_max);
      const double angle = rng.uniform(0.0, 3.14159265358979323846);
      multiply({1.0, -2.0 * radius * std::cos(angle), radius * radius});
      remaining -= 2;
    } else {
      const double radius = rng.uniform(r_min, r_max);
      const double root = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * radius;
      multiply({1.0, -root});
      remaining -= 1;
    }
  }
  return poly;  // coefficients of q^count + a_1 q^(count-1) + ... + a_count
}

// impulse response of B(q)/A(q), A monic degree nu, B monic degree nu-1
Eigen::VectorXd rational_impulse(const std::vector<double>& a, const std::vector<double>& b,
                                 Eigen::Index length) {
  const std::size_t nu = a.size() - 1;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(length);
  for (Eigen::Index k = 1; k <= length; ++k) {
    double value = 0.0;
    if (static_cast<std::size_t>(k) <= nu) value += b[static_cast<std::size_t>(k) - 1];
    for (std::size_t i = 1; i <= nu && static_cast<Eigen::Index>(i) < k; ++i)
      value -= a[i] * g[k - 1 - static_cast<Eigen::Index>(i)];
    g[k - 1] = value;
  }
  return g;
}

}  // namespace

ImpulseResponse generate_random_system(const SystemConfig& cfg, std::uint64_t seed) {
  if (cfg.order < 1) throw std::invalid_argument("generate_random_system: order must be >= 1");
  if (!(cfg.pole_radius_min > 0.0) || !(cfg.pole_radius_max < 1.0) ||
      cfg.pole_radius_min > cfg.pole_radius_max)
    throw std::invalid_argument("generate_random_system: pole radii must satisfy 0 < lo <= hi < 1");
  if (cfg.truncation < 1)
    throw std::invalid_argument("generate_random_system: truncation must be >= 1");

  const Eigen::Index channels = cfg.p * cfg.m;
  constexpr Eigen::Index kHorizonCap = 8192;

  std::vector<Eigen::VectorXd> responses(static_cast<std::size_t>(channels));
  Eigen::Index T_needed = cfg.truncation;
  for (Eigen::Index ch = 0; ch < channels; ++ch) {
    const Eigen::Index i = ch % cfg.p;
    const Eigen::Index j = ch / cfg.p;
    bool is_null = false;
    for (const auto& [ni, nj] : cfg.null_channels)
      if (ni == i && nj == j) is_null = true;
    if (is_null) {
      responses[static_cast<std::size_t>(ch)] = Eigen::VectorXd::Zero(kHorizonCap);
      continue;
    }
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(ch)));
    const std::vector<double> a =
        poly_from_random_roots(rng, cfg.order, cfg.pole_radius_min, cfg.pole_radius_max);
    const std::vector<double> b =
        poly_from_random_roots(rng, cfg.order - 1, cfg.zero_radius_min, cfg.zero_radius_max);
    Eigen::VectorXd g = rational_impulse(a, b, kHorizonCap);
    const double total = g.squaredNorm();
    if (!(total > 0.0))
      throw std::runtime_error("generate_random_system: degenerate channel response");
    g /= std::sqrt(total);

    // smallest truncation keeping the discarded tail below the energy budget
    double tail = 0.0;
    Eigen::Index T_ch = kHorizonCap;
    for (Eigen::Index k = kHorizonCap; k >= 1; --k) {
      tail += g[k - 1] * g[k - 1];
      if (tail > cfg.tail_energy) {
        T_ch = k;
        break;
      }
      T_ch = k - 1;
    }
    T_ch = std::max<Eigen::Index>(T_ch, 1);
    if (T_ch > kHorizonCap - 1)
      throw std::runtime_error("generate_random_system: tail energy bound unreachable at cap");
    T_needed = std::max(T_needed, T_ch);
    responses[static_cast<std::size_t>(ch)] = std::move(g);
  }

  ImpulseResponse out;
  out.coeffs.assign(static_cast<std::size_t>(T_needed), Eigen::MatrixXd::Zero(cfg.p, cfg.m));
  for (Eigen::Index ch = 0; ch < channels; ++ch) {
    const Eigen::Index i = ch % cfg.p;
    const Eigen::Index j = ch / cfg.p;
    const Eigen::VectorXd& g = responses[static_cast<std::size_t>(ch)];
    for (Eigen::Index k = 0; k < T_needed; ++k) out.coeffs[static_cast<std::size_t>(k)](i, j) = g[k];
  }
  return out;
}

double impulse_fit_percent(const ImpulseResponse& truth, const ImpulseResponse& estimate) {
  const Eigen::Index T = std::max(truth.truncation(), estimate.truncation());
  auto pad = [T](const ImpulseResponse& g) {
    ImpulseResponse padded = g;
    while (padded.truncation() < T)
      padded.coeffs.push_back(Eigen::MatrixXd::Zero(g.n_outputs(), g.n_inputs()));
    return padded.vectorize();
  };
  const Eigen::VectorXd a = pad(truth);
  const Eigen::VectorXd b = pad(estimate);
  const double denom = (a.array() - a.mean()).matrix().norm();
  if (denom <= 0.0) return (a - b).norm() == 0.0 ? 100.0 : -std::numeric_limits<double>::infinity();
  return 100.0 * (1.0 - (a - b).norm() / denom);
}

namespace {

Eigen::MatrixXd draw_inputs(const DataConfig& cfg, Eigen::Index N, Eigen::Index m, Rng& rng) {
  Eigen::MatrixXd u(N, m);
  for (Eigen::Index t = 0; t < N; ++t)
    for (Eigen::Index j = 0; j < m; ++j) u(t, j) = rng.normal();
  if (cfg.input == InputKind::Filtered) {
    const double a = cfg.input_filter_pole;
    const double scale = std::sqrt(1.0 - a * a);
    for (Eigen::Index j = 0; j < m; ++j) {
      double state = 0.0;
      for (Eigen::Index t = 0; t < N; ++t) {
        state = a * state + scale * u(t, j);
        u(t, j) = state;
      }
    }
  }
  return u;
}

KernelTemplate template_for_family(KernelFamily family, Eigen::Index T, double Ts) {
  switch (family) {
    case KernelFamily::TC: return KernelTemplate::tc(T, Ts);
    case KernelFamily::DiagExp: return KernelTemplate::diag_exp(T);
    case KernelFamily::PowerDecay: return KernelTemplate::power_decay(T);
    case KernelFamily::AkaikeSmoothness: return KernelTemplate::akaike(T);
    default:
      throw std::invalid_argument("benchmark: unsupported kernel family for the eb estimator");
  }
}

}  // namespace

KernelTemplate estimator_kernel_template(const EstimatorConfig& cfg, Eigen::Index p,
                                         Eigen::Index m, double sample_time) {
  KernelTemplate kernel =
      (p * m > 1)
          ? KernelTemplate::mimo(cfg.family, cfg.T, p, m, sample_time, cfg.shared_shape)
          : template_for_family(cfg.family, cfg.T, sample_time);
  if (cfg.scale_bounds) {
    kernel.lower.head(kernel.n_scales()).setConstant(cfg.scale_bounds->first);
    kernel.upper.head(kernel.n_scales()).setConstant(cfg.scale_bounds->second);
  }
  if (cfg.shape_bounds && kernel.n_shapes() > 0) {
    kernel.lower.tail(kernel.n_shapes()).setConstant(cfg.shape_bounds->first);
    kernel.upper.tail(kernel.n_shapes()).setConstant(cfg.shape_bounds->second);
  }
  kernel.validate();
  return kernel;
}

OptimizerConfig estimator_optimizer(const EstimatorConfig& cfg) {
  OptimizerConfig opt;
  opt.n_starts = cfg.starts;
  opt.tolerance = cfg.tolerance;
  opt.max_iterations = cfg.max_iterations;
  opt.with_covariance = false;
  return opt;
}

namespace {

std::vector<BenchmarkRow> benchmark_single_run(const BenchmarkConfig& cfg, int run_id) {
  const std::uint64_t run_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(run_id));
  const ImpulseResponse truth = generate_random_system(cfg.system, mix_seed(run_seed, 1));

  Rng rng_in(mix_seed(run_seed, 2));
  const Eigen::MatrixXd inputs = draw_inputs(cfg.data, cfg.data.N, cfg.system.m, rng_in);
  const Eigen::MatrixXd y0 = predict_outputs(truth, inputs);
  Eigen::MatrixXd centered = y0;
  for (Eigen::Index i = 0; i < centered.cols(); ++i)
    centered.col(i).array() -= centered.col(i).mean();
  const double signal_var = centered.squaredNorm() / static_cast<double>(centered.size());
  const double sigma2 = signal_var / std::pow(10.0, cfg.data.snr_db / 10.0);

  IODataset data;
  data.inputs = inputs;
  data.outputs = y0;
  data.sample_time = cfg.data.sample_time;
  Rng rng_noise(mix_seed(run_seed, 3));
  const double noise_std = std::sqrt(sigma2);
  for (Eigen::Index t = 0; t < data.outputs.rows(); ++t)
    for (Eigen::Index i = 0; i < data.outputs.cols(); ++i)
      data.outputs(t, i) += noise_std * rng_noise.normal();

  Rng rng_test(mix_seed(run_seed, 4));
  const Eigen::Index test_N = cfg.data.test_N > 0 ? cfg.data.test_N : cfg.data.N;
  IODataset test_data;
  test_data.inputs = draw_inputs(cfg.data, test_N, cfg.system.m, rng_test);
  test_data.outputs = predict_outputs(truth, test_data.inputs);  // noise-free test target
  test_data.sample_time = cfg.data.sample_time;

  std::vector<BenchmarkRow> rows;
  rows.reserve(cfg.estimators.size());
  for (const auto& est_cfg : cfg.estimators) {
    BenchmarkRow row;
    row.run_id = run_id;
    row.seed = run_seed;
    row.estimator = est_cfg.name.empty() ? est_cfg.kind : est_cfg.name;
    try {
      ImpulseResponse estimate;
      if (est_cfg.kind == "ls") {
        const FirRegression fr = build_fir_regression(data, est_cfg.T);
        estimate = least_squares(fr).estimate;
        if (fr.n_rows() > fr.d()) row.sigma2 = estimate_noise_variance(fr);
      } else if (est_cfg.kind == "fir_aic" || est_cfg.kind == "fir_bic") {
        const OrderSelectionResult sel = order_selection_baseline(
            data, est_cfg.T,
            est_cfg.kind == "fir_aic" ? OrderCriterion::AIC : OrderCriterion::BIC);
        estimate = sel.estimate;
        row.selected_order = static_cast<int>(sel.selected_order);
      } else if (est_cfg.kind == "eb") {
        EvidenceProblem ep;
        ep.problem = build_fir_regression(data, est_cfg.T);
        ep.kernel = estimator_kernel_template(est_cfg, cfg.system.p, cfg.system.m,
                                              cfg.data.sample_time);
        ep.sigma2_policy = est_cfg.sigma2_policy;
        const Estimate fit = empirical_bayes(ep, estimator_optimizer(est_cfg));
        estimate = fit.g_hat;
        row.sigma2 = fit.hyperparams.sigma2;
        row.log_evidence = fit.log_evidence;
        row.dof = fit.dof;
      } else if (est_cfg.kind == "nuclear_norm") {
        const FirRegression fr = build_fir_regression(data, est_cfg.T);
        const auto [r, c] = est_cfg.hankel_r > 0
                                ? std::make_pair(est_cfg.hankel_r, est_cfg.hankel_c)
                                : default_hankel_shape(est_cfg.T);
        estimate = nuclear_norm_identify(fr, est_cfg.eta, r, c).estimate;
      } else if (est_cfg.kind == "stable_hankel") {
        const FirRegression fr = build_fir_regression(data, est_cfg.T);
        const auto [r, c] = est_cfg.hankel_r > 0
                                ? std::make_pair(est_cfg.hankel_r, est_cfg.hankel_c)
                                : default_hankel_shape(est_cfg.T);
        StableHankelOptions opts;
        opts.n_max = est_cfg.n_max;
        const StableHankelResult sh = stable_hankel_identify(
            fr, tc_kernel(est_cfg.T, 1.0, est_cfg.base_beta, cfg.data.sample_time).K, r, c,
            opts);
        estimate = sh.estimate.g_hat;
        row.sigma2 = sh.estimate.hyperparams.sigma2;
        row.log_evidence = sh.estimate.log_evidence;
        row.dof = sh.estimate.dof;
        row.selected_order = static_cast<int>(sh.selected_n);
      } else {
        throw std::invalid_argument("unknown estimator kind: " + est_cfg.kind);
      }
      const FitReport report = fit_metrics(truth, estimate, test_data);
      row.impulse_mse = report.impulse_mse;
      row.prediction_mse = report.prediction_mse;
      row.fit_percent = report.fit_percent;
      row.impulse_fit = impulse_fit_percent(truth, estimate);
    } catch (const std::exception&) {
      row.status = "failed";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.n_runs < 1) throw std::invalid_argument("run_benchmark: n_runs must be >= 1");
  if (cfg.estimators.empty()) throw std::invalid_argument("run_benchmark: no estimators");
  std::vector<std::vector<BenchmarkRow>> per_run(static_cast<std::size_t>(cfg.n_runs));

  const int workers = std::max(cfg.workers, 1);
  if (workers == 1) {
    for (int i = 0; i < cfg.n_runs; ++i) per_run[static_cast<std::size_t>(i)] =
        benchmark_single_run(cfg, i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < cfg.n_runs; i = next.fetch_add(1))
          per_run[static_cast<std::size_t>(i)] = benchmark_single_run(cfg, i);
      });
    for (auto& t : pool) t.join();
  }

  BenchmarkResult result;
  result.rows.reserve(per_run.size() * cfg.estimators.size());
  for (auto& rows : per_run)
    for (auto& row : rows) result.rows.push_back(std::move(row));
  return result;
}

std::string benchmark_csv(const BenchmarkResult& result) {
  std::ostringstream out;
  out << "run_id,seed,estimator,status,impulse_mse,impulse_fit,prediction_mse,fit_percent,"
         "sigma2,log_evidence,dof,selected_order\n";
  for (const auto& r : result.rows) {
    out << r.run_id << ',' << r.seed << ',' << r.estimator << ',' << r.status << ','
        << format_double(r.impulse_mse) << ',' << format_double(r.impulse_fit) << ','
        << format_double(r.prediction_mse) << ',' << format_double(r.fit_percent) << ','
        << format_double(r.sigma2) << ',' << format_double(r.log_evidence) << ','
        << format_double(r.dof) << ',' << r.selected_order << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json quartiles(std::vector<double> values) {
  nlohmann::json j;
  if (values.empty()) return j;
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  j["q25"] = at(0.25);
  j["median"] = at(0.5);
  j["q75"] = at(0.75);
  return j;
}

}  // namespace

nlohmann::json benchmark_summary(const BenchmarkResult& result) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const BenchmarkRow*>> groups;
  for (const auto& row : result.rows) {
    if (!groups.count(row.estimator)) order.push_back(row.estimator);
    groups[row.estimator].push_back(&row);
  }
  nlohmann::json estimators = nlohmann::json::array();
  for (const auto& name : order) {
    nlohmann::json entry;
    entry["estimator"] = name;
    std::vector<double> fit, imp_fit, imp_mse;
    int failed = 0;
    for (const BenchmarkRow* row : groups[name]) {
      if (row->status != "ok") {
        ++failed;
        continue;
      }
      fit.push_back(row->fit_percent);
      imp_fit.push_back(row->impulse_fit);
      imp_mse.push_back(row->impulse_mse);
    }
    entry["n_ok"] = static_cast<int>(fit.size());
    entry["n_failed"] = failed;
    entry["fit_percent"] = quartiles(fit);
    entry["impulse_fit"] = quartiles(imp_fit);
    entry["impulse_mse"] = quartiles(imp_mse);
    estimators.push_back(std::move(entry));
  }
  return nlohmann::json{{"estimators", std::move(estimators)}};
}

EstimationRule compound_rule_by_name(const std::string& name, double sigma2) {
  if (name == "ls") return [](const Eigen::VectorXd& Y) { return Y; };
  if (name == "js")
    return [sigma2](const Eigen::VectorXd& Y) { return james_stein(Y, sigma2); };
  if (name == "js_plus")
    return [sigma2](const Eigen::VectorXd& Y) { return positive_part_js(Y, sigma2); };
  if (name == "eb")
    return [sigma2](const Eigen::VectorXd& Y) { return eb_shrinkage(Y, sigma2); };
  throw std::invalid_argument("unknown compound rule: " + name);
}

CompoundStudyResult run_compound_study(const CompoundStudyConfig& cfg) {
  if (cfg.B < 1) throw std::invalid_argument("run_compound_study: B must be >= 1");
  if (cfg.n_rep < 100) throw std::invalid_argument("run_compound_study: n_rep must be >= 100");
  const std::size_t n_cells = cfg.rules.size() * cfg.alpha_norms.size();
  std::vector<CompoundRow> rows(n_cells);

  auto run_cell = [&](std::size_t cell) {
    const std::size_t ri = cell / cfg.alpha_norms.size();
    const std::size_t ai = cell % cfg.alpha_norms.size();
    const EstimationRule rule = compound_rule_by_name(cfg.rules[ri], cfg.sigma2);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(cfg.B);
    alpha[0] = cfg.alpha_norms[ai];
    // common random numbers across rules: the seed depends on alpha only
    const RiskEstimate risk =
        risk_monte_carlo(rule, alpha, cfg.sigma2, cfg.n_rep, mix_seed(cfg.seed, ai));
    CompoundRow row;
    row.rule = cfg.rules[ri];
    row.B = cfg.B;
    row.alpha_norm = cfg.alpha_norms[ai];
    row.risk = risk.risk;
    row.std_error = risk.std_error;
    row.n_used = risk.n_used;
    row.n_failed = risk.n_failed;
    rows[cell] = std::move(row);
  };

  const int workers = std::max(cfg.workers, 1);
  if (workers == 1) {
    for (std::size_t cell = 0; cell < n_cells; ++cell) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t cell = next.fetch_add(1); cell < n_cells; cell = next.fetch_add(1))
          run_cell(cell);
      });
    for (auto& t : pool) t.join();
  }

  CompoundStudyResult result;
  result.rows = std::move(rows);
  return result;
}

std::string compound_csv(const CompoundStudyResult& result) {
  std::ostringstream out;
  out << "rule,B,alpha_norm,risk,std_error,n_used,n_failed\n";
  for (const auto& r : result.rows)
    out << r.rule << ',' << r.B << ',' << format_double(r.alpha_norm) << ','
        << format_double(r.risk) << ',' << format_double(r.std_error) << ',' << r.n_used << ','
        << r.n_failed << '\n';
  return out.str();
}

// -- JSON config parsing ---------------------------------------------------------

SystemConfig system_config_from_json(const nlohmann::json& j) {
  SystemConfig cfg;
  cfg.p = j.value("p", cfg.p);
  cfg.m = j.value("m", cfg.m);
  cfg.order = j.value("order", cfg.order);
  if (j.contains("pole_radius")) {
    cfg.pole_radius_min = j["pole_radius"].at(0).get<double>();
    cfg.pole_radius_max = j["pole_radius"].at(1).get<double>();
  }
  if (j.contains("zero_radius")) {
    cfg.zero_radius_min = j["zero_radius"].at(0).get<double>();
    cfg.zero_radius_max = j["zero_radius"].at(1).get<double>();
  }
  cfg.truncation = j.value("truncation", cfg.truncation);
  cfg.tail_energy = j.value("tail_energy", cfg.tail_energy);
  if (j.contains("null_channels"))
    for (const auto& pair : j["null_channels"])
      cfg.null_channels.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
  return cfg;
}

DataConfig data_config_from_json(const nlohmann::json& j) {
  DataConfig cfg;
  cfg.N = j.value("N", cfg.N);
  const std::string input = j.value("input", std::string("white"));
  if (input == "white")
    cfg.input = InputKind::White;
  else if (input == "filtered")
    cfg.input = InputKind::Filtered;
  else
    throw std::invalid_argument("data config: input must be white or filtered");
  cfg.input_filter_pole = j.value("input_filter_pole", cfg.input_filter_pole);
  cfg.snr_db = j.value("snr_db", cfg.snr_db);
  if (!std::isfinite(cfg.snr_db)) throw std::invalid_argument("data config: snr_db must be finite");
  cfg.test_N = j.value("test_N", cfg.test_N);
  cfg.sample_time = j.value("sample_time", cfg.sample_time);
  return cfg;
}

EstimatorConfig estimator_config_from_json(const nlohmann::json& j) {
  EstimatorConfig cfg;
  cfg.kind = j.value("kind", cfg.kind);
  cfg.name = j.value("name", cfg.kind);
  cfg.T = j.value("T", cfg.T);
  if (j.contains("family")) cfg.family = kernel_family_from_name(j["family"].get<std::string>());
  const std::string policy = j.value("sigma2", std::string("residual"));
  if (policy == "residual")
    cfg.sigma2_policy = Sigma2Policy::ResidualPlugin;
  else if (policy == "profile")
    cfg.sigma2_policy = Sigma2Policy::Profile;
  else
    throw std::invalid_argument("estimator config: sigma2 must be residual or profile");
  cfg.starts = j.value("starts", cfg.starts);
  cfg.tolerance = j.value("tolerance", cfg.tolerance);
  cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
  if (j.contains("scale_bounds"))
    cfg.scale_bounds = std::make_pair(j["scale_bounds"].at(0).get<double>(),
                                      j["scale_bounds"].at(1).get<double>());
  if (j.contains("shape_bounds"))
    cfg.shape_bounds = std::make_pair(j["shape_bounds"].at(0).get<double>(),
                                      j["shape_bounds"].at(1).get<double>());
  cfg.eta = j.value("eta", cfg.eta);
  if (j.contains("hankel")) {
    cfg.hankel_r = j["hankel"].at(0).get<Eigen::Index>();
    cfg.hankel_c = j["hankel"].at(1).get<Eigen::Index>();
  }
  cfg.n_max = j.value("n_max", cfg.n_max);
  cfg.base_beta = j.value("base_beta", cfg.base_beta);
  cfg.shared_shape = j.value("shared_shape", cfg.shared_shape);
  return cfg;
}

BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j) {
  BenchmarkConfig cfg;
  if (j.contains("system")) cfg.system = system_config_from_json(j["system"]);
  if (j.contains("data")) cfg.data = data_config_from_json(j["data"]);
  if (j.contains("estimators"))
    for (const auto& e : j["estimators"]) cfg.estimators.push_back(estimator_config_from_json(e));
  if (j.contains("monte_carlo")) {
    const auto& mc = j["monte_carlo"];
    cfg.n_runs = mc.value("n_runs", cfg.n_runs);
    cfg.seed = mc.value("seed", cfg.seed);
    cfg.workers = mc.value("workers", cfg.workers);
  }
  if (cfg.n_runs < 1) throw std::invalid_argument("benchmark config: n_runs must be >= 1");
  if (cfg.estimators.empty())
    throw std::invalid_argument("benchmark config: at least one estimator required");
  return cfg;
}

CompoundStudyConfig compound_config_from_json(const nlohmann::json& j) {
  CompoundStudyConfig cfg;
  cfg.B = j.value("B", cfg.B);
  cfg.sigma2 = j.value("sigma2", cfg.sigma2);
  if (j.contains("alpha_norms")) cfg.alpha_norms = j["alpha_norms"].get<std::vector<double>>();
  if (j.contains("rules")) cfg.rules = j["rules"].get<std::vector<std::string>>();
  cfg.n_rep = j.value("n_rep", cfg.n_rep);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.workers = j.value("workers", cfg.workers);
  if (!(cfg.sigma2 > 0.0)) throw std::invalid_argument("compound config: sigma2 must be > 0");
  return cfg;
}

}  // namespace regid
