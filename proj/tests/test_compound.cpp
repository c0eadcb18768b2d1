#include <doctest.h>

#include <cmath>

#include "regid/bayes.hpp"
#include "regid/compound.hpp"
#include "regid/random.hpp"

using namespace regid;

namespace {

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = rng.normal();
  return M;
}

}  // namespace

TEST_CASE("sign rule") {
  Eigen::VectorXd Y(2);
  Y << 2.0, -3.0;
  const SignRule rule = np_sign_rule(Y);
  CHECK(rule.signs[0] == 1.0);
  CHECK(rule.signs[1] == -1.0);
  CHECK_FALSE(rule.had_zero);

  const SignRule zero = np_sign_rule(Eigen::VectorXd::Zero(1));
  CHECK(zero.signs[0] == 1.0);
  CHECK(zero.had_zero);

  // elementwise thresholding oracle
  const Eigen::VectorXd v = random_vector(50, 9);
  const SignRule r = np_sign_rule(v);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    CHECK(r.signs[i] == (v[i] >= 0.0 ? 1.0 : -1.0));
}

TEST_CASE("James-Stein closed form") {
  Eigen::VectorXd Y(4);
  Y << 2, 0, 0, 0;
  const Eigen::VectorXd shrunk = james_stein(Y, 1.0);
  CHECK(shrunk[0] == doctest::Approx(1.0));
  CHECK(shrunk[1] == 0.0);

  Eigen::VectorXd edge(5);
  edge << std::sqrt(3.0), 0, 0, 0, 0;  // ||Y||^2 = (B-2) sigma2
  CHECK(james_stein(edge, 1.0).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(james_stein(Eigen::VectorXd::Ones(2), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(james_stein(Eigen::VectorXd::Zero(5), 1.0), std::invalid_argument);
}

TEST_CASE("James-Stein risk at the origin matches the chi-square value") {
  // exact risk at alpha = 0: sigma2 (1 - (B-2)/B) = 2 sigma2 / B, from
  // E[1/chi2_B] = 1/(B-2)
  const Eigen::Index B = 10;
  const double sigma2 = 1.0;
  const RiskEstimate js = risk_monte_carlo(
      [sigma2](const Eigen::VectorXd& Y) { return james_stein(Y, sigma2); },
      Eigen::VectorXd::Zero(B), sigma2, 100000, 42);
  const double oracle = 2.0 * sigma2 / static_cast<double>(B);
  CHECK(std::abs(js.risk - oracle) < 3.0 * js.std_error);
  CHECK(js.risk + 3.0 * js.std_error < sigma2);
}

TEST_CASE("positive-part and empirical-Bayes shrinkage") {
  Eigen::VectorXd small(3);
  small << 0.1, 0.1, 0.1;  // ||Y||^2 = 0.03 < B sigma2
  CHECK(eb_shrinkage(small, 1.0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(positive_part_js(small, 1.0).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd mid(2);
  mid << 2.0, 0.0;  // ||Y||^2 = 4 = 2 B sigma2
  const Eigen::VectorXd out = eb_shrinkage(mid, 1.0);
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-12));

  // factor formula check against the composition definition
  const Eigen::VectorXd Y = random_vector(12, 77) * 2.0;
  const double sigma2 = 0.7;
  const double factor =
      std::max(1.0 - static_cast<double>(Y.size()) * sigma2 / Y.squaredNorm(), 0.0);
  CHECK((eb_shrinkage(Y, sigma2) - factor * Y).cwiseAbs().maxCoeff() < 1e-14);

  CHECK(eb_shrinkage(Eigen::VectorXd::Zero(4), 1.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("positive-part James-Stein dominates plain James-Stein in risk") {
  const Eigen::Index B = 10;
  for (double norm : {0.0, 1.0, 5.0, 20.0}) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(B);
    alpha[0] = norm;
    const RiskEstimate js = risk_monte_carlo(
        [](const Eigen::VectorXd& Y) { return james_stein(Y, 1.0); }, alpha, 1.0, 100000, 99);
    const RiskEstimate pp = risk_monte_carlo(
        [](const Eigen::VectorXd& Y) { return positive_part_js(Y, 1.0); }, alpha, 1.0, 100000,
        99);  // common random numbers
    CHECK(pp.risk <= js.risk + 1e-12);
  }
}

TEST_CASE("scalar evidence maximizer") {
  Eigen::VectorXd Y(3);
  Y << 3.0, 0.0, 0.0;  // ||Y||^2/B = 3
  CHECK(scalar_ml_lambda(Y, 1.0) == doctest::Approx(2.0));

  Eigen::VectorXd below(4);
  below << 0.5, 0.5, 0.5, 0.5;
  CHECK(scalar_ml_lambda(below, 1.0) == 0.0);

  // grid oracle for the Gaussian evidence of Y ~ N(0, (lambda + sigma2) I)
  const Eigen::VectorXd v = random_vector(8, 1234) * 1.5;
  const double sigma2 = 0.8;
  auto evidence = [&](double lam) {
    return -0.5 * (static_cast<double>(v.size()) *
                       std::log(2.0 * 3.14159265358979323846 * (lam + sigma2)) +
                   v.squaredNorm() / (lam + sigma2));
  };
  double best_lam = 0.0, best = evidence(0.0);
  for (int i = 0; i <= 1000000; ++i) {
    const double lam = 1e-5 * i;
    const double val = evidence(lam);
    if (val > best) {
      best = val;
      best_lam = lam;
    }
  }
  CHECK(std::abs(scalar_ml_lambda(v, sigma2) - best_lam) < 1e-5 + 1e-6);
}

TEST_CASE("Bayes shrinkage and its empirical chaining") {
  const Eigen::VectorXd Y = random_vector(6, 5);
  CHECK(bayes_shrinkage(Y, 0.0, 1.0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((bayes_shrinkage(Y, 1.0, 1.0) - 0.5 * Y).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::VectorXd chained = bayes_shrinkage(Y, scalar_ml_lambda(Y, 1.0), 1.0);
  CHECK((chained - eb_shrinkage(Y, 1.0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Strawderman transform identities") {
  SUBCASE("identity design") {
    const Eigen::VectorXd Y = random_vector(3, 21);
    const CoordinateChange cc = strawderman_transform(Eigen::MatrixXd::Identity(3, 3),
                                                      Eigen::MatrixXd::Identity(3, 3), Y);
    CHECK((cc.A - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((cc.D - Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((cc.Z - Y).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("prior and design identities on random problems") {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd Phi = random_matrix(30, 8, mix_seed(500, trial));
      const Eigen::MatrixXd Psi = random_matrix(8, 8, mix_seed(501, trial));
      const CoordinateChange cc = strawderman_transform(Phi, Psi);
      CHECK_FALSE(cc.rank_deficient);
      CHECK(cc.prior_identity_residual < 1e-8);
      CHECK(cc.design_identity_residual < 1e-8);

      const Eigen::MatrixXd K = Psi * Psi.transpose();
      CHECK((cc.A * K * cc.A.transpose() - Eigen::MatrixXd(cc.D.asDiagonal()))
                .cwiseAbs()
                .maxCoeff() < 1e-8 * cc.D.maxCoeff());
      const Eigen::MatrixXd gram_inv = (Phi.transpose() * Phi).inverse();
      CHECK((cc.A * gram_inv * cc.A.transpose() - Eigen::MatrixXd::Identity(8, 8))
                .cwiseAbs()
                .maxCoeff() < 1e-8);
    }
  }

  SUBCASE("rank-deficient designs are flagged") {
    Eigen::MatrixXd Phi = random_matrix(10, 4, 31);
    Phi.col(3) = Phi.col(2);
    const CoordinateChange cc = strawderman_transform(Phi, Eigen::MatrixXd::Identity(4, 4));
    CHECK(cc.rank_deficient);
  }
}

TEST_CASE("coordinate shrinkage") {
  Eigen::VectorXd Z(2), D(2);
  Z << 2.0, 2.0;
  D << 1.0, 0.0;
  const Eigen::VectorXd out = shrinkage_in_coordinates(Z, D, 1.0, 1.0);
  CHECK(out[0] == doctest::Approx(1.0));  // d = sigma2: factor 1/2
  CHECK(out[1] == 0.0);
  CHECK(shrinkage_in_coordinates(Z, D, 0.0, 1.0).cwiseAbs().maxCoeff() == 0.0);

  // factors stay in [0, 1]
  const Eigen::VectorXd z = random_vector(20, 41);
  const Eigen::VectorXd d = random_vector(20, 42).cwiseAbs();
  for (double lambda : {0.0, 0.3, 5.0}) {
    const Eigen::VectorXd s = shrinkage_in_coordinates(z, d, lambda, 0.9);
    for (Eigen::Index i = 0; i < 20; ++i) {
      if (z[i] == 0.0) continue;
      const double factor = s[i] / z[i];
      CHECK(factor >= 0.0);
      CHECK(factor <= 1.0);
    }
  }
}

TEST_CASE("coordinate shrinkage maps back to the posterior mean") {
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index n = 25, d = 6;
    const Eigen::MatrixXd Phi = random_matrix(n, d, mix_seed(600, trial));
    const Eigen::MatrixXd Psi = random_matrix(d, d, mix_seed(601, trial));
    const Eigen::VectorXd Y = random_vector(n, mix_seed(602, trial));
    const double lambda = 0.9, sigma2 = 0.5;

    const CoordinateChange cc = strawderman_transform(Phi, Psi, Y);
    const Eigen::VectorXd beta_bar = shrinkage_in_coordinates(cc.Z, cc.D, lambda, sigma2);
    const Eigen::VectorXd g_from_coords = coordinates_to_impulse(cc, Psi, beta_bar);

    FirRegression fr;
    fr.Phi = Phi;
    fr.Y = Y;
    fr.T = d;
    fr.p = 1;
    fr.m = 1;
    fr.N = n;
    KernelMatrix K;
    K.K = lambda * Psi * Psi.transpose();
    const Estimate est = posterior_mean(fr, K, sigma2);
    const double rel = (g_from_coords - est.g_hat.vectorize()).norm() /
                       est.g_hat.vectorize().norm();
    CHECK(rel < 1e-8);
  }
}

TEST_CASE("asymptotic scale target") {
  CHECK(lambda_star(Eigen::VectorXd::Ones(5), Eigen::MatrixXd::Identity(5, 5), 5) ==
        doctest::Approx(1.0));

  SUBCASE("concentrates near the generating scale") {
    const Eigen::Index B = 400;
    const Eigen::MatrixXd Kbar = tc_kernel(B, 1.0, 0.01).K;
    const double lambda0 = 1.7;
    const Eigen::MatrixXd L = psd_factor(lambda0 * Kbar);
    const Eigen::VectorXd g = L * random_vector(B, 313);
    const double value = lambda_star(g, Kbar, B);
    CHECK(std::abs(value - lambda0) < 0.35 * lambda0);
  }

  SUBCASE("equals the coordinate norm after the transform") {
    const Eigen::Index n = 30, d = 7;
    const Eigen::MatrixXd Phi = random_matrix(n, d, 71);
    const Eigen::MatrixXd Psi = random_matrix(d, d, 72);
    const Eigen::VectorXd alpha = random_vector(d, 73);
    const Eigen::VectorXd g = Psi * alpha;
    // beta = V' alpha has the same norm as alpha
    const double via_transform = alpha.squaredNorm() / static_cast<double>(d);
    CHECK(lambda_star(g, Psi * Psi.transpose(), d) ==
          doctest::Approx(via_transform).epsilon(1e-8));
  }

  SUBCASE("rejects components outside the kernel range") {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3, 3);
    K(0, 0) = 1.0;
    Eigen::VectorXd g(3);
    g << 1.0, 0.5, 0.0;
    CHECK_THROWS_AS(lambda_star(g, K, 3), std::invalid_argument);
  }
}

TEST_CASE("empirical Bayes in Strawderman coordinates") {
  SUBCASE("identity weights reduce to the closed factor") {
    const Eigen::VectorXd Z = random_vector(9, 81) * 2.0;
    const Eigen::VectorXd D = Eigen::VectorXd::Ones(9);
    const double sigma2 = 0.6;
    const EbStrawdermanResult result = eb_strawderman(Z, D, sigma2);
    const double B = 9.0;
    const double factor = 1.0 - B * sigma2 / (Z.squaredNorm() + B * sigma2);
    CHECK((result.beta_bar - factor * Z).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(result.excluded == 0);
  }

  SUBCASE("zero-gain coordinates are excluded and flagged") {
    Eigen::VectorXd Z(3), D(3);
    Z << 1.0, 2.0, 3.0;
    D << 1.0, 0.0, 4.0;
    const EbStrawdermanResult result = eb_strawderman(Z, D, 1.0);
    CHECK(result.excluded == 1);
    CHECK(result.beta_bar[1] == 0.0);
    CHECK(result.lambda == doctest::Approx((1.0 + 9.0 / 4.0) / 2.0));
  }

  SUBCASE("weighted risk does not exceed least squares across a signal grid") {
    const Eigen::Index B = 20;
    Rng rng(271);
    Eigen::VectorXd D(B);
    for (Eigen::Index i = 0; i < B; ++i) D[i] = 0.5 + 2.0 * rng.uniform01();
    const double sigma2 = 1.0;
    for (double scale : {0.5, 2.0, 8.0}) {
      Eigen::VectorXd beta_bar = random_vector(B, mix_seed(272, static_cast<int>(scale * 10)));
      beta_bar *= scale * std::sqrt(static_cast<double>(B)) / beta_bar.norm();
      auto loss = [&](const Eigen::VectorXd& truth, const Eigen::VectorXd& est) {
        return weighted_loss(truth, est, D);
      };
      const RiskEstimate eb = risk_monte_carlo(
          [&](const Eigen::VectorXd& Z) { return eb_strawderman(Z, D, sigma2).beta_bar; },
          beta_bar, sigma2, 20000, 273, loss);
      const RiskEstimate ls = risk_monte_carlo(
          [](const Eigen::VectorXd& Z) { return Z; }, beta_bar, sigma2, 20000, 273, loss);
      CHECK(eb.risk <= ls.risk + 3.0 * ls.std_error);
    }
  }
}

TEST_CASE("losses") {
  const Eigen::VectorXd alpha = random_vector(10, 91);
  CHECK(compound_loss(alpha, alpha) == 0.0);
  Eigen::VectorXd D = random_vector(10, 92).cwiseAbs();
  CHECK(weighted_loss(alpha, alpha, D) == 0.0);

  SUBCASE("compound loss is permutation invariant") {
    const Eigen::VectorXd delta = random_vector(10, 93);
    const double base = compound_loss(alpha, delta);
    Eigen::VectorXd alpha_swapped = alpha, delta_swapped = delta;
    std::swap(alpha_swapped[2], alpha_swapped[7]);
    std::swap(delta_swapped[2], delta_swapped[7]);
    CHECK(compound_loss(alpha_swapped, delta_swapped) == doctest::Approx(base));
  }

  SUBCASE("weighted loss in coordinates equals the output-weighted loss") {
    const Eigen::Index n = 24, d = 6;
    const Eigen::MatrixXd Phi = random_matrix(n, d, 94);
    const Eigen::MatrixXd Psi = random_matrix(d, d, 95);
    const Eigen::VectorXd g = random_vector(d, 96);
    const Eigen::VectorXd g_hat = random_vector(d, 97);
    const CoordinateChange cc = strawderman_transform(Phi, Psi);
    const double in_coords = weighted_loss(cc.A * g, cc.A * g_hat, cc.D);
    const double on_problem = output_weighted_loss(g, g_hat, Phi, Psi * Psi.transpose());
    CHECK(in_coords == doctest::Approx(on_problem).epsilon(1e-8));
  }
}

TEST_CASE("Monte Carlo risk harness") {
  const Eigen::Index B = 10;
  const auto ls_rule = [](const Eigen::VectorXd& Y) { return Y; };

  SUBCASE("least squares risk is sigma2 everywhere") {
    for (double norm : {0.0, 3.0, 12.0}) {
      Eigen::VectorXd alpha = Eigen::VectorXd::Zero(B);
      alpha[0] = norm;
      const RiskEstimate est = risk_monte_carlo(ls_rule, alpha, 1.0, 50000, 7);
      CHECK(std::abs(est.risk - 1.0) < 3.0 * est.std_error);
    }
  }

  SUBCASE("deterministic given the seed") {
    const Eigen::VectorXd alpha = Eigen::VectorXd::Zero(B);
    const RiskEstimate a = risk_monte_carlo(ls_rule, alpha, 1.0, 1000, 5);
    const RiskEstimate b = risk_monte_carlo(ls_rule, alpha, 1.0, 1000, 5);
    CHECK(a.risk == b.risk);
    CHECK(a.std_error == b.std_error);
  }

  SUBCASE("James-Stein dominates least squares on the whole grid") {
    for (double norm : {0.0, 1.0, 5.0, 20.0}) {
      Eigen::VectorXd alpha = Eigen::VectorXd::Zero(B);
      alpha[0] = norm;
      const RiskEstimate js = risk_monte_carlo(
          [](const Eigen::VectorXd& Y) { return james_stein(Y, 1.0); }, alpha, 1.0, 100000,
          11);
      CHECK(js.risk + 3.0 * js.std_error < 1.0);
    }
  }

  SUBCASE("failures are dropped and counted") {
    int calls = 0;
    const RiskEstimate est = risk_monte_carlo(
        [&calls](const Eigen::VectorXd& Y) -> Eigen::VectorXd {
          if (++calls % 3 == 0) throw std::runtime_error("boom");
          return Y;
        },
        Eigen::VectorXd::Zero(4), 1.0, 300, 3);
    CHECK(est.n_failed == 100);
    CHECK(est.n_used == 200);
  }

  SUBCASE("replicate count below 100 is rejected") {
    CHECK_THROWS_AS(risk_monte_carlo(ls_rule, Eigen::VectorXd::Zero(3), 1.0, 10, 1),
                    std::invalid_argument);
  }

  SUBCASE("compound problems carry their loss weighting") {
    CompoundProblem problem;
    problem.Y = random_vector(6, 21);
    problem.sigma2 = 0.5;
    problem.truth = random_vector(6, 22);
    const RiskEstimate plain = risk_monte_carlo(ls_rule, problem, 500, 9);
    CHECK(std::abs(plain.risk - problem.sigma2) < 4.0 * plain.std_error);

    problem.weights = Eigen::VectorXd::Constant(6, 2.0);
    const RiskEstimate weighted = risk_monte_carlo(ls_rule, problem, 500, 9);
    // E (delta - truth)' D (delta - truth) = sum(D) sigma2 for least squares
    CHECK(std::abs(weighted.risk - 12.0 * problem.sigma2) < 4.0 * weighted.std_error);

    CompoundProblem no_truth;
    no_truth.Y = problem.Y;
    CHECK_THROWS_AS(risk_monte_carlo(ls_rule, no_truth, 500, 9), std::invalid_argument);
  }
}
