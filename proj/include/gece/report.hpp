#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gece/analysis.hpp"
#include "gece/calibrators.hpp"
#include "gece/estimator.hpp"

namespace gece {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "gece";
inline constexpr const char* kToolVersion = "0.1.0";

/// {tool, version, kind} header shared by all machine reports.
Json report_header(const std::string& kind);

Json to_json(const MetricConfig& config);
/// {value, n, bins: [{count, mean_output, mean_target, distance}], config}
Json to_json(const MetricResult& result);
Json to_json(const SweepResult& sweep);
Json to_json(const VarianceProfile& profile);
Json to_json(const FitReport& report);
Json to_json(const BinStats& stats);

/// {variant, parameters}; every real is a 17-significant-digit string so the
/// document round-trips bit-exactly.
Json calibrator_to_json(const Calibrator& calibrator);
Calibrator calibrator_from_json(const Json& doc);

std::string metric_bins_csv(const MetricResult& result);
std::string sweep_csv(const SweepResult& sweep);
std::string variance_profile_csv(const VarianceProfile& profile);

struct AggregateRow {
  std::string path;  // JSON pointer of the numeric field
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

/// Mean and population std of every numeric field present in all documents.
/// Fields under "/bins" and "/config", and the report header, are skipped.
std::vector<AggregateRow> aggregate_reports(std::span<const Json> documents);

/// Pretty JSON with a trailing newline; identical input gives identical bytes.
std::string dump(const Json& doc);

}  // namespace gece
