#include <doctest.h>

#include "regid/io.hpp"
#include "regid/random.hpp"

using namespace regid;

namespace {

IODataset random_dataset(Eigen::Index N, Eigen::Index m, Eigen::Index p, std::uint64_t seed) {
  Rng rng(seed);
  IODataset data;
  data.inputs.resize(N, m);
  data.outputs.resize(N, p);
  for (Eigen::Index t = 0; t < N; ++t) {
    for (Eigen::Index j = 0; j < m; ++j) data.inputs(t, j) = rng.normal();
    for (Eigen::Index i = 0; i < p; ++i) data.outputs(t, i) = rng.normal();
  }
  data.sample_time = 0.25;
  return data;
}

}  // namespace

TEST_CASE("dataset CSV round-trips exactly") {
  const IODataset data = random_dataset(17, 2, 3, 555);
  const std::string csv = iodataset_to_csv(data);
  CHECK(csv.rfind("u1,u2,y1,y2,y3\n", 0) == 0);
  const IODataset back = iodataset_from_csv(csv, data.sample_time);
  CHECK((back.inputs - data.inputs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.outputs - data.outputs).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.sample_time == data.sample_time);
}

TEST_CASE("malformed CSV is rejected") {
  CHECK_THROWS_AS(iodataset_from_csv("a,b\n1,2\n"), std::invalid_argument);
  CHECK_THROWS_AS(iodataset_from_csv("u1,y1\n1\n"), std::invalid_argument);
  CHECK_THROWS_AS(iodataset_from_csv("u1,y1\n"), std::invalid_argument);
}

TEST_CASE("impulse response JSON round-trips exactly") {
  Rng rng(7);
  ImpulseResponse g;
  for (int k = 0; k < 4; ++k) {
    Eigen::MatrixXd gk(2, 3);
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) gk(i, j) = rng.normal();
    g.coeffs.push_back(gk);
  }
  const nlohmann::json j = impulse_response_to_json(g);
  CHECK(j["truncation"] == 4);
  CHECK(j["p"] == 2);
  CHECK(j["m"] == 3);
  const ImpulseResponse back = impulse_response_from_json(j);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK((g.coeffs[k] - back.coeffs[k]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernel spec JSON carries the config contract fields") {
  KernelSpec spec;
  spec.family = KernelFamily::TC;
  spec.dims = KernelDims{10, 2, 1};
  spec.scale = Eigen::VectorXd::Constant(2, 1.5);
  spec.shape = Eigen::VectorXd::Constant(1, 0.4);
  spec.sample_time = 0.5;
  const nlohmann::json j = kernel_spec_to_json(spec);
  CHECK(j["family"] == "tc");
  CHECK(j["dims"]["T"] == 10);
  const KernelSpec back = kernel_spec_from_json(j);
  CHECK(back.family == KernelFamily::TC);
  CHECK(back.scale[0] == 1.5);
  CHECK(back.shape[0] == 0.4);
  CHECK(back.dims.p == 2);
  CHECK(back.sample_time == 0.5);
  CHECK_THROWS_AS(kernel_family_from_name("nope"), std::invalid_argument);
}

TEST_CASE("fit report and channel graph serialization") {
  FitReport report;
  report.impulse_mse = 0.25;
  report.prediction_mse = 1.5;
  report.fit_percent = 88.0;
  const nlohmann::json j = fit_report_to_json(report);
  CHECK(j["impulse_mse"] == 0.25);
  CHECK(j["fit_percent"] == 88.0);

  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> graph(2, 2);
  graph << true, false, false, true;
  const nlohmann::json gj = channel_graph_to_json(graph);
  CHECK(gj[0][0] == true);
  CHECK(gj[0][1] == false);
  CHECK(gj[1][1] == true);
}

TEST_CASE("format_double round-trips doubles") {
  for (double v : {1.0, -0.123456789123456789, 3.5e-200, 7.0e13}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}
