#pragma once

#include <string>

#include "regid/kernels.hpp"
#include "regid/types.hpp"

#include <json.hpp>

namespace regid {

/// CSV with header u1..um,y1..yp, one row per sample. The sample time lives in
/// a sidecar config, not in the CSV.
std::string iodataset_to_csv(const IODataset& data);
IODataset iodataset_from_csv(const std::string& csv, double sample_time = 1.0);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

nlohmann::json impulse_response_to_json(const ImpulseResponse& g);
ImpulseResponse impulse_response_from_json(const nlohmann::json& j);

nlohmann::json fit_report_to_json(const FitReport& report);

nlohmann::json kernel_spec_to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);

nlohmann::json channel_graph_to_json(
    const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& graph);

/// Doubles rendered with enough digits to round-trip exactly; used everywhere
/// a byte-stable text output is required.
std::string format_double(double value);

}  // namespace regid
