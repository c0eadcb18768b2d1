#include "regid/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace regid {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string iodataset_to_csv(const IODataset& data) {
  data.validate();
  std::ostringstream out;
  for (Eigen::Index j = 0; j < data.n_inputs(); ++j) out << "u" << (j + 1) << ",";
  for (Eigen::Index i = 0; i < data.n_outputs(); ++i)
    out << "y" << (i + 1) << (i + 1 < data.n_outputs() ? "," : "");
  out << "\n";
  for (Eigen::Index t = 0; t < data.samples(); ++t) {
    for (Eigen::Index j = 0; j < data.n_inputs(); ++j)
      out << format_double(data.inputs(t, j)) << ",";
    for (Eigen::Index i = 0; i < data.n_outputs(); ++i)
      out << format_double(data.outputs(t, i)) << (i + 1 < data.n_outputs() ? "," : "");
    out << "\n";
  }
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

IODataset iodataset_from_csv(const std::string& csv, double sample_time) {
  std::istringstream stream(csv);
  std::string line;
  if (!std::getline(stream, line)) throw std::invalid_argument("iodataset_from_csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  Eigen::Index m = 0, p = 0;
  for (const auto& name : header) {
    if (name.rfind("u", 0) == 0 && p == 0)
      ++m;
    else if (name.rfind("y", 0) == 0)
      ++p;
    else
      throw std::invalid_argument("iodataset_from_csv: header must list u1..um then y1..yp");
  }
  if (m < 1 || p < 1)
    throw std::invalid_argument("iodataset_from_csv: need at least one input and one output");

  std::vector<std::vector<double>> rows;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<Eigen::Index>(fields.size()) != m + p)
      throw std::invalid_argument("iodataset_from_csv: row width does not match header");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(std::stod(f));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("iodataset_from_csv: no data rows");

  IODataset data;
  data.sample_time = sample_time;
  data.inputs.resize(static_cast<Eigen::Index>(rows.size()), m);
  data.outputs.resize(static_cast<Eigen::Index>(rows.size()), p);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (Eigen::Index j = 0; j < m; ++j)
      data.inputs(static_cast<Eigen::Index>(t), j) = rows[t][static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < p; ++i)
      data.outputs(static_cast<Eigen::Index>(t), i) = rows[t][static_cast<std::size_t>(m + i)];
  }
  data.validate();
  return data;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_text_file: cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

nlohmann::json impulse_response_to_json(const ImpulseResponse& g) {
  g.validate();
  nlohmann::json j;
  j["truncation"] = g.truncation();
  j["p"] = g.n_outputs();
  j["m"] = g.n_inputs();
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& gk : g.coeffs) {
    nlohmann::json mat = nlohmann::json::array();
    for (Eigen::Index i = 0; i < gk.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index jj = 0; jj < gk.cols(); ++jj) row.push_back(gk(i, jj));
      mat.push_back(std::move(row));
    }
    coeffs.push_back(std::move(mat));
  }
  j["coeffs"] = std::move(coeffs);
  return j;
}

ImpulseResponse impulse_response_from_json(const nlohmann::json& j) {
  const Eigen::Index T = j.at("truncation").get<Eigen::Index>();
  const Eigen::Index p = j.at("p").get<Eigen::Index>();
  const Eigen::Index m = j.at("m").get<Eigen::Index>();
  const auto& coeffs = j.at("coeffs");
  if (static_cast<Eigen::Index>(coeffs.size()) != T)
    throw std::invalid_argument("impulse_response_from_json: truncation mismatch");
  ImpulseResponse g;
  for (const auto& mat : coeffs) {
    Eigen::MatrixXd gk(p, m);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index jj = 0; jj < m; ++jj)
        gk(i, jj) = mat.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(jj));
    g.coeffs.push_back(std::move(gk));
  }
  g.validate();
  return g;
}

nlohmann::json fit_report_to_json(const FitReport& report) {
  return nlohmann::json{{"impulse_mse", report.impulse_mse},
                        {"prediction_mse", report.prediction_mse},
                        {"fit_percent", report.fit_percent}};
}

nlohmann::json kernel_spec_to_json(const KernelSpec& spec) {
  nlohmann::json j;
  j["family"] = kernel_family_name(spec.family);
  j["scale"] = std::vector<double>(spec.scale.data(), spec.scale.data() + spec.scale.size());
  j["shape"] = std::vector<double>(spec.shape.data(), spec.shape.data() + spec.shape.size());
  j["dims"] = {{"T", spec.dims.T}, {"p", spec.dims.p}, {"m", spec.dims.m}};
  j["sample_time"] = spec.sample_time;
  return j;
}

KernelSpec kernel_spec_from_json(const nlohmann::json& j) {
  KernelSpec spec;
  spec.family = kernel_family_from_name(j.at("family").get<std::string>());
  const auto scale = j.at("scale").get<std::vector<double>>();
  const auto shape = j.at("shape").get<std::vector<double>>();
  spec.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(),
                                                 static_cast<Eigen::Index>(scale.size()));
  spec.shape = Eigen::Map<const Eigen::VectorXd>(shape.data(),
                                                 static_cast<Eigen::Index>(shape.size()));
  spec.dims.T = j.at("dims").at("T").get<Eigen::Index>();
  spec.dims.p = j.at("dims").at("p").get<Eigen::Index>();
  spec.dims.m = j.at("dims").at("m").get<Eigen::Index>();
  spec.sample_time = j.value("sample_time", 1.0);
  return spec;
}

nlohmann::json channel_graph_to_json(
    const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& graph) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < graph.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < graph.cols(); ++j) row.push_back(static_cast<bool>(graph(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace regid
