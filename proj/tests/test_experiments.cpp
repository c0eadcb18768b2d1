#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "regid/experiments.hpp"
#include "regid/io.hpp"
#include "regid/random.hpp"

using namespace regid;
namespace fs = std::filesystem;

TEST_CASE("random systems follow the single-pole geometry") {
  SystemConfig cfg;
  cfg.order = 1;
  cfg.pole_radius_min = 0.5;
  cfg.pole_radius_max = 0.5;
  cfg.truncation = 40;
  const ImpulseResponse g = generate_random_system(cfg, 12345);
  for (Eigen::Index k = 1; k + 1 < g.truncation(); ++k) {
    const double a = std::abs(g.coeffs[static_cast<std::size_t>(k)](0, 0));
    const double b = std::abs(g.coeffs[static_cast<std::size_t>(k - 1)](0, 0));
    if (b > 1e-12) CHECK(a / b == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("generated systems satisfy the tail-energy budget") {
  for (int seed = 0; seed < 100; ++seed) {
    SystemConfig cfg;
    cfg.order = 3;
    cfg.truncation = 60;
    const ImpulseResponse g = generate_random_system(cfg, mix_seed(777, seed));

    // oracle: the same channel on a much longer horizon is the ground truth
    SystemConfig longer = cfg;
    longer.truncation = 1200;
    const ImpulseResponse g_long = generate_random_system(longer, mix_seed(777, seed));
    const double kept = g.vectorize().squaredNorm();
    const double total = g_long.vectorize().squaredNorm();
    CHECK((total - kept) / total <= cfg.tail_energy * (1.0 + 1e-9));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));  // unit-normalized channel
  }
}

TEST_CASE("the generator is deterministic in the seed") {
  SystemConfig cfg;
  cfg.p = 2;
  cfg.m = 2;
  cfg.order = 2;
  cfg.truncation = 32;
  const ImpulseResponse a = generate_random_system(cfg, 99);
  const ImpulseResponse b = generate_random_system(cfg, 99);
  REQUIRE(a.truncation() == b.truncation());
  CHECK((a.vectorize() - b.vectorize()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("null channels stay exactly zero") {
  SystemConfig cfg;
  cfg.p = 2;
  cfg.m = 2;
  cfg.order = 2;
  cfg.truncation = 32;
  cfg.null_channels = {{0, 1}};
  const ImpulseResponse g = generate_random_system(cfg, 7);
  for (const auto& gk : g.coeffs) {
    CHECK(gk(0, 1) == 0.0);
    CHECK(gk(1, 0) != 0.0);
  }
}

namespace {

BenchmarkConfig small_benchmark() {
  BenchmarkConfig cfg;
  cfg.system.order = 2;
  cfg.system.truncation = 40;
  cfg.data.N = 80;
  cfg.data.test_N = 60;
  cfg.data.snr_db = 10.0;
  cfg.n_runs = 4;
  cfg.seed = 31;
  EstimatorConfig ls;
  ls.kind = "ls";
  ls.name = "ls";
  ls.T = 20;
  EstimatorConfig aic;
  aic.kind = "fir_aic";
  aic.name = "fir_aic";
  aic.T = 20;
  EstimatorConfig eb;
  eb.kind = "eb";
  eb.name = "eb_tc";
  eb.T = 20;
  eb.starts = 3;
  cfg.estimators = {ls, aic, eb};
  return cfg;
}

}  // namespace

TEST_CASE("benchmark bookkeeping and reproducibility") {
  const BenchmarkConfig cfg = small_benchmark();
  const BenchmarkResult result = run_benchmark(cfg);
  CHECK(result.rows.size() == 12);  // n_runs x estimators
  for (const auto& row : result.rows) CHECK(row.status == "ok");

  const std::string csv = benchmark_csv(result);
  CHECK(csv.rfind("run_id,seed,estimator,status,impulse_mse,impulse_fit,prediction_mse,"
                  "fit_percent,sigma2,log_evidence,dof,selected_order\n",
                  0) == 0);

  // byte-identical rerun, and byte-identical under a different worker count
  CHECK(benchmark_csv(run_benchmark(cfg)) == csv);
  BenchmarkConfig parallel = cfg;
  parallel.workers = 3;
  CHECK(benchmark_csv(run_benchmark(parallel)) == csv);

  const nlohmann::json summary = benchmark_summary(result);
  REQUIRE(summary["estimators"].size() == 3);
  CHECK(summary["estimators"][0]["n_ok"] == 4);
}

TEST_CASE("estimator failures are flagged rows, not dropped") {
  BenchmarkConfig cfg = small_benchmark();
  cfg.n_runs = 1;
  EstimatorConfig bad;
  bad.kind = "eb";
  bad.name = "eb_overparameterized";
  bad.T = 200;  // more unknowns than samples: residual plug-in must fail
  cfg.estimators.push_back(bad);
  const BenchmarkResult result = run_benchmark(cfg);
  REQUIRE(result.rows.size() == 4);
  CHECK(result.rows[3].status == "failed");
  CHECK(result.rows[0].status == "ok");
}

TEST_CASE("structure estimators run inside the benchmark harness") {
  BenchmarkConfig cfg = small_benchmark();
  cfg.n_runs = 2;
  EstimatorConfig nn;
  nn.kind = "nuclear_norm";
  nn.name = "nn";
  nn.T = 12;
  nn.eta = 0.5;
  EstimatorConfig sh;
  sh.kind = "stable_hankel";
  sh.name = "sh";
  sh.T = 12;
  sh.n_max = 2;
  cfg.estimators = {nn, sh};
  const BenchmarkResult result = run_benchmark(cfg);
  REQUIRE(result.rows.size() == 4);
  for (const auto& row : result.rows) {
    CHECK(row.status == "ok");
    CHECK(std::isfinite(row.impulse_mse));
  }
  CHECK(result.rows[1].selected_order >= 1);  // stable_hankel reports its rank
}

TEST_CASE("a MIMO benchmark uses the block-diagonal kernel for eb estimators") {
  BenchmarkConfig cfg;
  cfg.system.p = 2;
  cfg.system.m = 1;
  cfg.system.order = 2;
  cfg.system.truncation = 30;
  cfg.data.N = 120;
  cfg.data.test_N = 60;
  cfg.n_runs = 2;
  cfg.seed = 77;
  EstimatorConfig eb;
  eb.kind = "eb";
  eb.name = "eb_tc";
  eb.T = 10;
  eb.starts = 2;
  cfg.estimators = {eb};
  const BenchmarkResult result = run_benchmark(cfg);
  REQUIRE(result.rows.size() == 2);
  for (const auto& row : result.rows) {
    CHECK(row.status == "ok");
    CHECK(row.impulse_fit > 0.0);
  }
}

TEST_CASE("compound study emits the documented schema") {
  CompoundStudyConfig cfg;
  cfg.n_rep = 2000;
  cfg.seed = 5;
  const CompoundStudyResult result = run_compound_study(cfg);
  CHECK(result.rows.size() == cfg.rules.size() * cfg.alpha_norms.size());
  const std::string csv = compound_csv(result);
  CHECK(csv.rfind("rule,B,alpha_norm,risk,std_error,n_used,n_failed\n", 0) == 0);
  CHECK(compound_csv(run_compound_study(cfg)) == csv);

  CompoundStudyConfig parallel = cfg;
  parallel.workers = 3;
  CHECK(compound_csv(run_compound_study(parallel)) == csv);

  // least squares risk near sigma2, James-Stein below it
  for (const auto& row : result.rows) {
    if (row.rule == "ls") CHECK(std::abs(row.risk - cfg.sigma2) < 4.0 * row.std_error);
    if (row.rule == "js") CHECK(row.risk < cfg.sigma2);
  }
}

TEST_CASE("config parsing validates inputs") {
  CHECK_THROWS_AS(benchmark_config_from_json(nlohmann::json::parse(R"({"estimators": []})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      data_config_from_json(nlohmann::json::parse(R"({"input": "triangle"})")),
      std::invalid_argument);
  CHECK_THROWS_AS(compound_config_from_json(nlohmann::json::parse(R"({"sigma2": -1})")),
                  std::invalid_argument);

  const nlohmann::json j = nlohmann::json::parse(R"({
    "system": {"p": 1, "m": 1, "order": 3, "pole_radius": [0.3, 0.9]},
    "data": {"N": 100, "input": "filtered", "snr_db": 10},
    "estimators": [{"kind": "eb", "family": "tc", "T": 30}],
    "monte_carlo": {"n_runs": 7, "seed": 3, "workers": 2}
  })");
  const BenchmarkConfig cfg = benchmark_config_from_json(j);
  CHECK(cfg.n_runs == 7);
  CHECK(cfg.data.input == InputKind::Filtered);
  CHECK(cfg.estimators[0].family == KernelFamily::TC);
}

#ifdef REGID_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(REGID_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("command-line driver round trip") {
  const fs::path dir = fs::path("cli_test_out");
  fs::remove_all(dir);
  fs::create_directories(dir);

  write_text_file((dir / "sim.json").string(), R"({
    "system": {"p": 1, "m": 1, "order": 2, "pole_radius": [0.3, 0.8]},
    "data": {"N": 120, "snr_db": 15},
    "seed": 11
  })");
  CHECK(run_cli("simulate --config " + (dir / "sim.json").string() + " --out-dir " +
                dir.string()) == 0);
  CHECK(fs::exists(dir / "data.csv"));
  CHECK(fs::exists(dir / "truth.json"));

  write_text_file((dir / "ident.json").string(), R"({
    "estimator": {"kind": "eb", "family": "tc", "T": 16, "starts": 3}
  })");
  CHECK(run_cli("identify --config " + (dir / "ident.json").string() + " --data " +
                (dir / "data.csv").string() + " --meta " + (dir / "meta.json").string() +
                " --truth " + (dir / "truth.json").string() + " --out-dir " + dir.string()) ==
        0);
  CHECK(fs::exists(dir / "estimate.json"));
  CHECK(fs::exists(dir / "report.json"));

  write_text_file((dir / "ard.json").string(), R"({
    "estimator": {"kind": "ard", "T": 10, "starts": 2}
  })");
  CHECK(run_cli("identify --config " + (dir / "ard.json").string() + " --data " +
                (dir / "data.csv").string() + " --out-dir " + dir.string()) == 0);
  const nlohmann::json ard_out =
      nlohmann::json::parse(read_text_file((dir / "estimate.json").string()));
  REQUIRE(ard_out["diagnostics"].contains("channel_graph"));
  CHECK(ard_out["diagnostics"]["channel_graph"].size() == 1);  // p x m boolean matrix

  write_text_file((dir / "bench.json").string(), R"({
    "system": {"order": 2},
    "data": {"N": 60, "snr_db": 10},
    "estimators": [{"kind": "ls", "T": 10}],
    "monte_carlo": {"n_runs": 2, "seed": 1}
  })");
  CHECK(run_cli("benchmark --config " + (dir / "bench.json").string() + " --out-dir " +
                dir.string()) == 0);
  CHECK(fs::exists(dir / "benchmark.csv"));

  write_text_file((dir / "comp.json").string(), R"({
    "B": 10, "sigma2": 1.0, "alpha_norms": [0, 5], "rules": ["ls", "js"], "n_rep": 1000,
    "seed": 2
  })");
  CHECK(run_cli("compound --config " + (dir / "comp.json").string() + " --out-dir " +
                dir.string()) == 0);
  CHECK(fs::exists(dir / "risk.csv"));

  SUBCASE("config errors exit with code 2") {
    CHECK(run_cli("benchmark --config does_not_exist.json") == 2);
    write_text_file((dir / "bad.json").string(), R"({"estimators": []})");
    CHECK(run_cli("benchmark --config " + (dir / "bad.json").string()) == 2);
  }
}
#endif
