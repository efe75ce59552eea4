#include "gece/report.hpp"

#include <map>
#include <sstream>

#include <fmt/format.h>

#include "gece/detail/overloaded.hpp"
#include "gece/io.hpp"

namespace gece {

using detail::Overloaded;

Json report_header(const std::string& kind) {
  Json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["kind"] = kind;
  return doc;
}

Json to_json(const MetricConfig& config) {
  Json doc;
  doc["lens"] = config.lens;
  doc["selector"] = config.selector;
  doc["distance"] = config.distance;
  doc["binning"] = config.binning;
  doc["seed"] = config.seed ? Json(*config.seed) : Json(nullptr);
  return doc;
}

Json to_json(const MetricResult& result) {
  Json doc;
  doc["value"] = result.value;
  doc["n"] = result.n_selected;
  Json bins = Json::array();
  for (const auto& b : result.per_bin) {
    Json bin;
    bin["count"] = b.count;
    bin["mean_output"] = b.mean_output;
    bin["mean_target"] = b.mean_target;
    bin["distance"] = b.distance;
    bins.push_back(std::move(bin));
  }
  doc["bins"] = std::move(bins);
  doc["config"] = to_json(result.config);
  return doc;
}

Json to_json(const SweepResult& sweep) {
  Json doc;
  doc["gammas"] = sweep.gammas;
  doc["mean_ece"] = sweep.mean_ece;
  doc["std_ece"] = sweep.std_ece;
  doc["n_resamples"] = sweep.n_resamples;
  doc["n"] = sweep.n_points;
  doc["recommended_gamma"] = sweep.recommended_gamma;
  doc["plateau_found"] = sweep.plateau_found;
  doc["plateau_epsilon"] = sweep.plateau_epsilon;
  doc["seed"] = sweep.seed;
  return doc;
}

Json to_json(const VarianceProfile& profile) {
  Json doc;
  doc["fractions"] = profile.fractions;
  doc["sample_sizes"] = profile.sample_sizes;
  doc["mean_ece"] = profile.mean_ece;
  doc["std_ece"] = profile.std_ece;
  doc["n_resamples"] = profile.n_resamples;
  doc["gamma"] = profile.gamma;
  doc["seed"] = profile.seed;
  return doc;
}

Json to_json(const FitReport& report) {
  Json doc;
  doc["method"] = report.method;
  doc["initial_nll"] = report.initial_nll;
  doc["final_nll"] = report.final_nll;
  doc["iterations"] = report.iterations;
  doc["converged"] = report.converged;
  return doc;
}

Json to_json(const BinStats& stats) {
  Json doc;
  doc["median"] = stats.median;
  doc["min"] = stats.min;
  doc["max"] = stats.max;
  return doc;
}

namespace {

Json real_strings(std::span<const double> values) {
  Json arr = Json::array();
  for (double v : values) arr.push_back(format_double(v));
  return arr;
}

double real_from(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw Error(ErrorCode::kInvalidCalibrator, "parameter is not a number");
  const auto s = v.get<std::string>();
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw Error(ErrorCode::kInvalidCalibrator, fmt::format("'{}' is not a number", s));
  }
  return out;
}

std::vector<double> reals_from(const Json& v) {
  if (!v.is_array()) throw Error(ErrorCode::kInvalidCalibrator, "expected an array");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(real_from(x));
  return out;
}

const Json& member(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw Error(ErrorCode::kInvalidCalibrator, fmt::format("missing '{}'", key));
  }
  return doc.at(key);
}

}  // namespace

Json calibrator_to_json(const Calibrator& calibrator) {
  Json doc;
  doc["variant"] = calibrator_name(calibrator);
  Json params;
  std::visit(Overloaded{
                 [&](const TemperatureScaling& c) { params["temperature"] = format_double(c.temperature); },
                 [&](const BiasCorrectedTemperatureScaling& c) {
                   params["temperature"] = format_double(c.temperature);
                   params["bias"] = real_strings(c.bias);
                 },
                 [&](const HistogramBinningCalibrator& c) {
                   Json edges = Json::array();
                   Json values = Json::array();
                   for (const auto& e : c.edges) edges.push_back(real_strings(e));
                   for (const auto& v : c.values) values.push_back(real_strings(v));
                   params["edges"] = std::move(edges);
                   params["values"] = std::move(values);
                 },
             },
             calibrator);
  doc["parameters"] = std::move(params);
  return doc;
}

Calibrator calibrator_from_json(const Json& doc) {
  const Json& variant = member(doc, "variant");
  const Json& params = member(doc, "parameters");
  if (!variant.is_string()) throw Error(ErrorCode::kInvalidCalibrator, "variant must be a string");
  const auto name = variant.get<std::string>();
  if (name == "temperature_scaling") {
    return TemperatureScaling{real_from(member(params, "temperature"))};
  }
  if (name == "bcts") {
    return BiasCorrectedTemperatureScaling{real_from(member(params, "temperature")),
                                           reals_from(member(params, "bias"))};
  }
  if (name == "histogram_binning") {
    HistogramBinningCalibrator c;
    for (const auto& e : member(params, "edges")) c.edges.push_back(reals_from(e));
    for (const auto& v : member(params, "values")) c.values.push_back(reals_from(v));
    return c;
  }
  throw Error(ErrorCode::kInvalidCalibrator, fmt::format("unknown variant '{}'", name));
}

std::string metric_bins_csv(const MetricResult& result) {
  std::ostringstream out;
  out << "bin,count,distance,mean_output,mean_target\n";
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
    return s;
  };
  for (std::size_t i = 0; i < result.per_bin.size(); ++i) {
    const auto& b = result.per_bin[i];
    out << i << ',' << b.count << ',' << format_double(b.distance) << ',' << join(b.mean_output)
        << ',' << join(b.mean_target) << '\n';
  }
  return out.str();
}

std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "gamma,mean_ece,std_ece\n";
  for (std::size_t i = 0; i < sweep.gammas.size(); ++i) {
    out << format_double(sweep.gammas[i]) << ',' << format_double(sweep.mean_ece[i]) << ','
        << format_double(sweep.std_ece[i]) << '\n';
  }
  return out.str();
}

std::string variance_profile_csv(const VarianceProfile& profile) {
  std::ostringstream out;
  out << "fraction,sample_size,mean_ece,std_ece\n";
  for (std::size_t i = 0; i < profile.fractions.size(); ++i) {
    out << format_double(profile.fractions[i]) << ',' << profile.sample_sizes[i] << ','
        << format_double(profile.mean_ece[i]) << ',' << format_double(profile.std_ece[i]) << '\n';
  }
  return out.str();
}

namespace {

void flatten(const Json& node, const std::string& path, std::vector<std::pair<std::string, double>>& out) {
  if (path == "/bins" || path == "/config" || path == "/tool" || path == "/version" || path == "/kind") {
    return;
  }
  if (node.is_number()) {
    out.emplace_back(path, node.get<double>());
  } else if (node.is_object()) {
    for (const auto& [key, value] : node.items()) flatten(value, path + "/" + key, out);
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) flatten(node[i], path + "/" + std::to_string(i), out);
  }
}

}  // namespace

std::vector<AggregateRow> aggregate_reports(std::span<const Json> documents) {
  if (documents.empty()) throw Error(ErrorCode::kInvalidSpec, "nothing to aggregate");
  std::vector<std::vector<std::pair<std::string, double>>> flat(documents.size());
  for (std::size_t i = 0; i < documents.size(); ++i) flatten(documents[i], "", flat[i]);

  std::vector<std::map<std::string, double>> lookup(documents.size());
  for (std::size_t i = 0; i < documents.size(); ++i) {
    lookup[i].insert(flat[i].begin(), flat[i].end());
  }
  std::vector<AggregateRow> rows;
  for (const auto& [path, first] : flat[0]) {
    std::vector<double> values{first};
    for (std::size_t i = 1; i < documents.size(); ++i) {
      auto it = lookup[i].find(path);
      if (it == lookup[i].end()) break;
      values.push_back(it->second);
    }
    if (values.size() != documents.size()) continue;
    const MeanStd ms = mean_std(values);
    rows.push_back({path, ms.mean, ms.std, values.size()});
  }
  return rows;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace gece
