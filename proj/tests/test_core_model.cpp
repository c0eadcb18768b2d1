#include <doctest.h>

#include <Eigen/Dense>

#include "regid/core_model.hpp"
#include "regid/random.hpp"

using namespace regid;

namespace {

IODataset make_dataset(const Eigen::MatrixXd& u, const Eigen::MatrixXd& y) {
  IODataset data;
  data.inputs = u;
  data.outputs = y;
  return data;
}

ImpulseResponse random_response(Eigen::Index T, Eigen::Index p, Eigen::Index m,
                                std::uint64_t seed) {
  Rng rng(seed);
  ImpulseResponse g;
  for (Eigen::Index k = 0; k < T; ++k) {
    Eigen::MatrixXd gk(p, m);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < m; ++j) gk(i, j) = rng.normal();
    g.coeffs.push_back(gk);
  }
  return g;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = rng.normal();
  return M;
}

// brute-force convolution, written independently of predict_outputs
Eigen::MatrixXd convolution_oracle(const ImpulseResponse& g, const Eigen::MatrixXd& u) {
  const Eigen::Index N = u.rows();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(N, g.n_outputs());
  for (Eigen::Index t = 0; t < N; ++t)
    for (Eigen::Index i = 0; i < g.n_outputs(); ++i) {
      double acc = 0.0;
      for (Eigen::Index k = 1; k <= g.truncation(); ++k) {
        if (t + 1 - k < 1) continue;
        for (Eigen::Index j = 0; j < g.n_inputs(); ++j)
          acc += g.coeffs[k - 1](i, j) * u(t - k, j);
      }
      y(t, i) = acc;
    }
  return y;
}

}  // namespace

TEST_CASE("regressor assembly with zero padding") {
  Eigen::MatrixXd u(3, 1);
  u << 1, 0, 0;
  const FirRegression fr =
      build_fir_regression(make_dataset(u, Eigen::MatrixXd::Zero(3, 1)), 2);
  Eigen::MatrixXd expected(3, 2);
  expected << 0, 0, 1, 0, 0, 1;
  CHECK((fr.Phi - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fr.d() == 2);
}

TEST_CASE("regressor assembly with trimming drops the first T samples") {
  Eigen::MatrixXd u(3, 1);
  u << 1, 0, 0;
  const FirRegression fr =
      build_fir_regression(make_dataset(u, Eigen::MatrixXd::Zero(3, 1)), 2,
                           InitialCondition::Trim);
  REQUIRE(fr.Phi.rows() == 1);
  CHECK(fr.Phi(0, 0) == 0.0);
  CHECK(fr.Phi(0, 1) == 1.0);
  CHECK_THROWS_AS(build_fir_regression(make_dataset(u, Eigen::MatrixXd::Zero(3, 1)), 5,
                                       InitialCondition::Trim),
                  std::invalid_argument);
}

TEST_CASE("Phi times vec(g) reproduces the brute-force convolution") {
  const ImpulseResponse g = random_response(5, 2, 2, 11);
  const Eigen::MatrixXd u = random_matrix(50, 2, 12);
  const Eigen::MatrixXd y = convolution_oracle(g, u);
  const FirRegression fr = build_fir_regression(make_dataset(u, y), 5);
  const Eigen::VectorXd y_model = fr.Phi * g.vectorize();
  CHECK((y_model - fr.Y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("simulate_oe is a pure delay for a unit impulse at lag one") {
  ImpulseResponse g;
  g.coeffs = {Eigen::MatrixXd::Constant(1, 1, 1.0)};
  Eigen::MatrixXd u(3, 1);
  u << 1, 0, 0;
  const IODataset data = simulate_oe(g, u, 0.0, 0);
  CHECK(data.outputs(0, 0) == 0.0);
  CHECK(data.outputs(1, 0) == 1.0);
  CHECK(data.outputs(2, 0) == 0.0);
}

TEST_CASE("noise-free simulation round-trips through the regression") {
  const ImpulseResponse g = random_response(4, 1, 2, 21);
  const Eigen::MatrixXd u = random_matrix(30, 2, 22);
  const IODataset data = simulate_oe(g, u, 0.0, 0);
  const FirRegression fr = build_fir_regression(data, 4);
  CHECK((fr.Y - fr.Phi * g.vectorize()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("simulation is deterministic in the seed") {
  const ImpulseResponse g = random_response(3, 1, 1, 31);
  const Eigen::MatrixXd u = random_matrix(20, 1, 32);
  const IODataset a = simulate_oe(g, u, 0.5, 777);
  const IODataset b = simulate_oe(g, u, 0.5, 777);
  const IODataset c = simulate_oe(g, u, 0.5, 778);
  CHECK((a.outputs - b.outputs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.outputs - c.outputs).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("least squares with an identity regressor returns the data") {
  FirRegression fr;
  fr.T = 2;
  fr.p = 1;
  fr.m = 1;
  fr.N = 2;
  fr.Phi = Eigen::MatrixXd::Identity(2, 2);
  fr.Y.resize(2);
  fr.Y << 3, -1;
  const LeastSquaresResult ls = least_squares(fr);
  CHECK(ls.estimate.vectorize()[0] == doctest::Approx(3.0));
  CHECK(ls.estimate.vectorize()[1] == doctest::Approx(-1.0));
  CHECK_FALSE(ls.rank_deficient);
}

TEST_CASE("least squares recovers the truth exactly on noiseless data") {
  const ImpulseResponse g = random_response(6, 1, 1, 41);
  const Eigen::MatrixXd u = random_matrix(60, 1, 42);
  const IODataset data = simulate_oe(g, u, 0.0, 0);
  const LeastSquaresResult ls = least_squares(build_fir_regression(data, 6));
  CHECK((ls.estimate.vectorize() - g.vectorize()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rank-deficient least squares flags and returns the minimum-norm solution") {
  FirRegression fr;
  fr.T = 2;
  fr.p = 1;
  fr.m = 1;
  fr.N = 2;
  fr.Phi.resize(2, 2);
  fr.Phi << 1, 1, 2, 2;  // duplicated column
  fr.Y.resize(2);
  fr.Y << 1, 2;
  const LeastSquaresResult ls = least_squares(fr);
  CHECK(ls.rank_deficient);
  CHECK(ls.rank == 1);
  const Eigen::VectorXd g = ls.estimate.vectorize();
  CHECK(g[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(g[1] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("least squares residual is orthogonal to the regressor columns") {
  const ImpulseResponse g = random_response(5, 1, 1, 51);
  const Eigen::MatrixXd u = random_matrix(80, 1, 52);
  const IODataset data = simulate_oe(g, u, 0.3, 53);
  const FirRegression fr = build_fir_regression(data, 5);
  const LeastSquaresResult ls = least_squares(fr);
  const Eigen::VectorXd residual = fr.Y - fr.Phi * ls.estimate.vectorize();
  const double lhs = (fr.Phi.transpose() * residual).cwiseAbs().maxCoeff();
  const double rhs = (fr.Phi.transpose() * fr.Y).cwiseAbs().maxCoeff();
  CHECK(lhs < 1e-8 * rhs);
}

TEST_CASE("vectorization round-trips exactly") {
  const ImpulseResponse g = random_response(4, 3, 2, 61);
  const ImpulseResponse back = ImpulseResponse::devectorize(g.vectorize(), 4, 3, 2);
  for (std::size_t k = 0; k < g.coeffs.size(); ++k)
    CHECK((g.coeffs[k] - back.coeffs[k]).cwiseAbs().maxCoeff() == 0.0);
}

namespace {

// independent order-selection oracle: its own QR-based least squares and an
// exhaustive scan of the criterion values
Eigen::Index order_oracle(const IODataset& data, Eigen::Index T_max, bool bic) {
  Eigen::Index best_T = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index T = 1; T <= T_max; ++T) {
    const FirRegression fr = build_fir_regression(data, T);
    const Eigen::VectorXd g = fr.Phi.colPivHouseholderQr().solve(fr.Y);
    const double n = static_cast<double>(fr.Y.size());
    const double rss =
        std::max((fr.Y - fr.Phi * g).squaredNorm(), 1e-28 * std::max(fr.Y.squaredNorm(), 1.0));
    const double value = n * std::log(rss / n) +
                         (bic ? std::log(n) : 2.0) * static_cast<double>(T);
    if (value < best) {
      best = value;
      best_T = T;
    }
  }
  return best_T;
}

}  // namespace

TEST_CASE("BIC picks order one for a noiseless one-lag system") {
  ImpulseResponse g;
  g.coeffs = {Eigen::MatrixXd::Constant(1, 1, 0.8)};
  const Eigen::MatrixXd u = random_matrix(100, 1, 71);
  const IODataset data = simulate_oe(g, u, 0.0, 0);
  const OrderSelectionResult sel = order_selection_baseline(data, 5, OrderCriterion::BIC);
  CHECK(sel.selected_order == 1);
  CHECK(sel.selected_order == order_oracle(data, 5, true));
}

TEST_CASE("white-noise output selects a minimal order with a near-zero estimate") {
  int minimal = 0;
  double worst_coeff = 0.0;
  for (int run = 0; run < 20; ++run) {
    Rng rng(mix_seed(81, run));
    Eigen::MatrixXd u(200, 1), y(200, 1);
    for (Eigen::Index t = 0; t < 200; ++t) {
      u(t, 0) = rng.normal();
      y(t, 0) = rng.normal();
    }
    const OrderSelectionResult sel =
        order_selection_baseline(make_dataset(u, y), 6, OrderCriterion::BIC);
    if (sel.selected_order == 1) ++minimal;
    worst_coeff =
        std::max(worst_coeff, sel.estimate.vectorize().cwiseAbs().maxCoeff());
  }
  CHECK(minimal > 10);
  CHECK(worst_coeff < 0.5);
}

TEST_CASE("AIC never selects below BIC on the same data, in the majority of runs") {
  int agree = 0;
  for (int run = 0; run < 20; ++run) {
    const ImpulseResponse g = random_response(3, 1, 1, mix_seed(91, run));
    const Eigen::MatrixXd u = random_matrix(150, 1, mix_seed(92, run));
    const IODataset data = simulate_oe(g, u, 0.5, mix_seed(93, run));
    const auto aic = order_selection_baseline(data, 8, OrderCriterion::AIC);
    const auto bic = order_selection_baseline(data, 8, OrderCriterion::BIC);
    if (bic.selected_order <= aic.selected_order) ++agree;
  }
  CHECK(agree > 10);
}

TEST_CASE("fit metrics are exact on a perfect estimate") {
  const ImpulseResponse g = random_response(4, 1, 1, 101);
  const Eigen::MatrixXd u = random_matrix(40, 1, 102);
  const IODataset test_data = simulate_oe(g, u, 0.0, 0);
  const FitReport report = fit_metrics(g, g, test_data);
  CHECK(report.impulse_mse == 0.0);
  CHECK(report.fit_percent == doctest::Approx(100.0));
}

TEST_CASE("a zero estimate scores the truth's energy") {
  const ImpulseResponse g = random_response(4, 1, 1, 111);
  ImpulseResponse zero;
  zero.coeffs.assign(4, Eigen::MatrixXd::Zero(1, 1));
  const Eigen::MatrixXd u = random_matrix(40, 1, 112);
  const IODataset test_data = simulate_oe(g, u, 0.0, 0);
  const FitReport report = fit_metrics(g, zero, test_data);
  CHECK(report.impulse_mse == doctest::Approx(g.vectorize().squaredNorm() / 4.0));
}

TEST_CASE("fit metrics match a direct recomputation on a random case") {
  const ImpulseResponse truth = random_response(5, 1, 1, 121);
  const ImpulseResponse estimate = random_response(5, 1, 1, 122);
  const Eigen::MatrixXd u = random_matrix(60, 1, 123);
  const IODataset test_data = simulate_oe(truth, u, 0.2, 124);
  const FitReport report = fit_metrics(truth, estimate, test_data);

  const double mse_oracle =
      (truth.vectorize() - estimate.vectorize()).squaredNorm() / 5.0;
  CHECK(report.impulse_mse == doctest::Approx(mse_oracle).epsilon(1e-12));

  const Eigen::MatrixXd y_hat = convolution_oracle(estimate, u);
  const Eigen::MatrixXd err = test_data.outputs - y_hat;
  CHECK(report.prediction_mse ==
        doctest::Approx(err.squaredNorm() / static_cast<double>(err.size())).epsilon(1e-12));
  const double denom =
      (test_data.outputs.array() - test_data.outputs.mean()).matrix().norm();
  CHECK(report.fit_percent ==
        doctest::Approx(100.0 * (1.0 - err.norm() / denom)).epsilon(1e-12));
}

TEST_CASE("estimates of different truncation are aligned by zero padding") {
  ImpulseResponse truth = random_response(6, 1, 1, 131);
  ImpulseResponse shorter;
  shorter.coeffs.assign(truth.coeffs.begin(), truth.coeffs.begin() + 3);
  const Eigen::MatrixXd u = random_matrix(30, 1, 132);
  const IODataset test_data = simulate_oe(truth, u, 0.0, 0);
  const FitReport report = fit_metrics(truth, shorter, test_data);
  double tail = 0.0;
  for (int k = 3; k < 6; ++k) tail += truth.coeffs[k](0, 0) * truth.coeffs[k](0, 0);
  CHECK(report.impulse_mse == doctest::Approx(tail / 6.0));
}

TEST_CASE("non-finite data is rejected") {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(3, 1);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(3, 1);
  y(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(build_fir_regression(make_dataset(u, y), 2), std::invalid_argument);
}

TEST_CASE("hold-out splitting preserves order and sample time") {
  IODataset data = make_dataset(random_matrix(10, 1, 1), random_matrix(10, 2, 2));
  data.sample_time = 0.5;
  const auto [train, test] = split_holdout(data, 0.7);
  CHECK(train.samples() == 7);
  CHECK(test.samples() == 3);
  CHECK(train.sample_time == 0.5);
  CHECK(train.outputs(6, 1) == data.outputs(6, 1));
  CHECK(test.outputs(0, 0) == data.outputs(7, 0));
  CHECK_THROWS_AS(split_holdout(data, 1.5), std::invalid_argument);
}
