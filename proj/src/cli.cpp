#include "gece/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "gece/analysis.hpp"
#include "gece/calibrators.hpp"
#include "gece/estimator.hpp"
#include "gece/io.hpp"
#include "gece/report.hpp"
#include "gece/spec_text.hpp"
#include "gece/synth.hpp"

namespace gece {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  std::string format;
  std::string out_dir = ".";
  std::string name;
  std::optional<std::uint64_t> seed;
  std::string lens = "topk:1";
  std::string selector = "all";
  std::string distance = "tvd";
  std::string binning = "uniform:15";
  std::string likert;

  std::vector<double> gammas;
  std::size_t resamples = kDefaultResamples;
  double epsilon = kDefaultPlateauEpsilon;

  std::string kind = "variance";
  double gamma = kBaselineGamma;
  std::vector<double> fractions;
  std::vector<std::size_t> ks;
  std::string group_map;
  std::size_t group = 0;

  std::string validation;
  std::string method = "ts";
  std::size_t hb_bins = 0;
  bool require_logits = false;
  std::string calibrator;
  std::string output;

  std::string generator;
  std::vector<std::string> inputs;
};

std::string human(double v) { return fmt::format("{:.4f}", v); }

std::optional<DataFormat> chosen_format(const Options& o) {
  if (o.format.empty()) return std::nullopt;
  auto f = parse_format(o.format);
  if (!f) throw UsageError(fmt::format("unknown format '{}' (expected jsonl or csv)", o.format));
  return f;
}

Dataset load_input(const Options& o, const std::string& path) {
  if (path.empty()) throw UsageError("--input is required");
  return load_predictions(path, chosen_format(o));
}

std::uint64_t require_seed(const Options& o, const char* command) {
  if (!o.seed) throw UsageError(fmt::format("'{}' is stochastic and needs --seed", command));
  return *o.seed;
}

fs::path out_path(const Options& o, const std::string& stem, const std::string& ext) {
  return fs::path(o.out_dir) / ((o.name.empty() ? stem : o.name) + ext);
}

Json config_json(const Options& o) {
  Json c;
  c["input"] = o.input;
  c["lens"] = o.lens;
  c["selector"] = o.selector;
  c["distance"] = o.distance;
  c["binning"] = o.binning;
  c["seed"] = o.seed ? Json(*o.seed) : Json(nullptr);
  return c;
}

LensSpec lens_of(const Options& o, const Dataset& d) { return parse_lens(o.lens, d.num_classes()); }

// --- eval -------------------------------------------------------------------

struct LikertCategory {
  std::string name;
  double lower;
  double upper;
};

std::vector<LikertCategory> parse_likert(const std::string& text) {
  std::vector<LikertCategory> cats;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find(':');
    const auto b = item.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos || a == 0) {
      throw UsageError(fmt::format("likert category '{}' is not name:low:high", item));
    }
    cats.push_back({item.substr(0, a), parse_real(item.substr(a + 1, b - a - 1)), parse_real(item.substr(b + 1))});
    validate_distance(InterIntervalDistance{cats.back().lower, cats.back().upper});
  }
  if (cats.empty()) throw UsageError("--likert needs at least one category");
  return cats;
}

int cmd_likert(const Options& o, const Dataset& data, std::ostream& out) {
  if (data.num_classes() != 2) {
    throw Error(ErrorCode::kInvalidSpec, "--likert needs binary predictions");
  }
  const auto cats = parse_likert(o.likert);
  const SelectorSpec base = parse_selector(o.selector);
  const BinningSpec binning = parse_binning(o.binning);
  Json doc = report_header("likert");
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "category,lower,upper,count,interval_gece,tvd_gece\n";
  out << fmt::format("{:<10} {:>7} {:>7} {:>8} {:>10} {:>10}\n", "category", "lower", "upper", "count",
                     "interval", "tvd");
  for (const auto& cat : cats) {
    SelectorSpec sel = base;
    sel.terms.emplace_back(OutputCompare{Projection::kScalarBinary, 1, Comparator::kGreaterEqual, cat.lower});
    sel.terms.emplace_back(OutputCompare{Projection::kScalarBinary, 1,
                                         cat.upper >= 1.0 ? Comparator::kLessEqual : Comparator::kLess,
                                         cat.upper});
    const std::size_t count = select(sel, data).size();
    Json row;
    row["category"] = cat.name;
    row["lower"] = cat.lower;
    row["upper"] = cat.upper;
    row["count"] = count;
    csv << cat.name << ',' << format_double(cat.lower) << ',' << format_double(cat.upper) << ','
        << count << ',';
    if (count == 0) {
      row["interval_gece"] = nullptr;
      row["tvd_gece"] = nullptr;
      csv << ",\n";
      out << fmt::format("{:<10} {:>7} {:>7} {:>8} {:>10} {:>10}\n", cat.name, human(cat.lower),
                         human(cat.upper), count, "-", "-");
    } else {
      const auto interval = gece(data, ClassConditionalLens{1}, sel,
                                 InterIntervalDistance{cat.lower, cat.upper}, binning);
      const auto tvd = gece(data, ClassConditionalLens{1}, sel, TvdDistance{}, binning);
      row["interval_gece"] = interval.value;
      row["tvd_gece"] = tvd.value;
      row["interval_result"] = to_json(interval);
      csv << format_double(interval.value) << ',' << format_double(tvd.value) << '\n';
      out << fmt::format("{:<10} {:>7} {:>7} {:>8} {:>10} {:>10}\n", cat.name, human(cat.lower),
                         human(cat.upper), count, human(interval.value), human(tvd.value));
    }
    rows.push_back(std::move(row));
  }
  doc["categories"] = std::move(rows);
  Json config = config_json(o);
  config["likert"] = o.likert;
  doc["config"] = std::move(config);
  write_file(out_path(o, "likert", ".json"), dump(doc));
  write_file(out_path(o, "likert", ".csv"), csv.str());
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const Dataset data = load_input(o, o.input);
  if (!o.likert.empty()) return cmd_likert(o, data, out);
  MetricResult result = gece(data, lens_of(o, data), parse_selector(o.selector),
                             parse_distance(o.distance), parse_binning(o.binning));
  result.config.seed = o.seed;
  Json doc = report_header("metric");
  doc.update(to_json(result));
  doc["config"]["input"] = o.input;
  write_file(out_path(o, "eval", ".json"), dump(doc));
  write_file(out_path(o, "eval", "_bins.csv"), metric_bins_csv(result));
  out << fmt::format("GECE {} (lens {}, distance {}, binning {}): n = {}, bins = {}\n",
                     human(result.value), result.config.lens, result.config.distance,
                     result.config.binning, result.n_selected, result.per_bin.size());
  return kExitOk;
}

// --- sweep / profile --------------------------------------------------------

int cmd_sweep(const Options& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o, "sweep");
  const Dataset data = load_input(o, o.input);
  const auto grid = o.gammas.empty() ? default_gamma_grid() : o.gammas;
  const SweepResult sweep = gamma_sweep(data, lens_of(o, data), parse_selector(o.selector),
                                        parse_distance(o.distance), grid, o.resamples, seed,
                                        o.epsilon);
  Json doc = report_header("gamma_sweep");
  doc.update(to_json(sweep));
  Json config = config_json(o);
  config.erase("binning");
  doc["config"] = std::move(config);
  write_file(out_path(o, "sweep", ".json"), dump(doc));
  write_file(out_path(o, "sweep", ".csv"), sweep_csv(sweep));
  out << fmt::format("{:>12} {:>10} {:>10}\n", "gamma", "mean", "std");
  for (std::size_t i = 0; i < sweep.gammas.size(); ++i) {
    out << fmt::format("{:>12} {:>10} {:>10}\n", human(sweep.gammas[i]), human(sweep.mean_ece[i]),
                       human(sweep.std_ece[i]));
  }
  out << fmt::format("recommended gamma {} ({})\n", human(sweep.recommended_gamma),
                     sweep.plateau_found ? "plateau" : "baseline fallback");
  return kExitOk;
}

std::vector<std::size_t> ks_or_all(const Options& o, const Dataset& data) {
  if (!o.ks.empty()) return o.ks;
  std::vector<std::size_t> ks(data.num_classes());
  for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = i + 1;
  return ks;
}

int cmd_profile(const Options& o, std::ostream& out) {
  const Dataset data = load_input(o, o.input);
  Json doc = report_header("profile_" + o.kind);
  std::ostringstream csv;
  if (o.kind == "variance") {
    const std::uint64_t seed = require_seed(o, "profile --kind variance");
    std::vector<double> fractions = o.fractions;
    if (fractions.empty()) {
      for (int i = 1; i <= 10; ++i) fractions.push_back(i / 10.0);
    }
    const auto profile = variance_profile(data, lens_of(o, data), parse_selector(o.selector),
                                          parse_distance(o.distance), o.gamma, fractions,
                                          o.resamples, seed);
    doc.update(to_json(profile));
    csv << variance_profile_csv(profile);
    for (std::size_t i = 0; i < profile.fractions.size(); ++i) {
      out << fmt::format("fraction {} std {}\n", human(profile.fractions[i]), human(profile.std_ece[i]));
    }
  } else if (o.kind == "confidence" || o.kind == "topk-accuracy") {
    const auto ks = ks_or_all(o, data);
    const auto values = o.kind == "confidence" ? confidence_profile(data, ks) : topk_accuracy(data, ks);
    doc["ks"] = ks;
    doc["values"] = values;
    csv << "k,value\n";
    for (std::size_t i = 0; i < ks.size(); ++i) {
      csv << ks[i] << ',' << format_double(values[i]) << '\n';
      out << fmt::format("k = {:>4}: {}\n", ks[i], human(values[i]));
    }
  } else if (o.kind == "entropy") {
    const double h = mean_entropy(data);
    doc["mean_entropy"] = h;
    csv << "mean_entropy\n" << format_double(h) << '\n';
    out << fmt::format("mean entropy {} nats\n", human(h));
  } else if (o.kind == "group-confidence") {
    if (o.group_map.empty()) throw UsageError("--group-map is required for group-confidence");
    const GroupingLens grouping = load_group_map(o.group_map, data.num_classes());
    const auto values = group_conditional_confidence(data, grouping, o.group);
    doc["group"] = o.group;
    doc["values"] = values;
    csv << "group,mean_confidence\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      csv << i << ',' << format_double(values[i]) << '\n';
      out << fmt::format("group {:>4}: {}\n", i, human(values[i]));
    }
  } else if (o.kind == "bin-stats") {
    const Dataset selected = select(parse_selector(o.selector), data);
    if (selected.empty()) throw Error(ErrorCode::kEmptySelection, "selector keeps no records");
    const auto stats = bin_stats(make_binning(parse_binning(o.binning), lens_dataset(selected, lens_of(o, data))));
    doc.update(to_json(stats));
    csv << "median,min,max\n" << format_double(stats.median) << ',' << stats.min << ',' << stats.max << '\n';
    out << fmt::format("points per bin: median {} min {} max {}\n", human(stats.median), stats.min, stats.max);
  } else {
    throw UsageError(fmt::format("unknown profile kind '{}'", o.kind));
  }
  doc["config"] = config_json(o);
  write_file(out_path(o, "profile_" + o.kind, ".json"), dump(doc));
  write_file(out_path(o, "profile_" + o.kind, ".csv"), csv.str());
  return kExitOk;
}

// --- calibrators ------------------------------------------------------------

LogitPolicy policy_of(const Options& o) {
  return o.require_logits ? LogitPolicy::kRequireLogits : LogitPolicy::kAllowLogProbs;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
  if (o.validation.empty()) throw UsageError("--validation is required");
  const Dataset val = load_predictions(o.validation, chosen_format(o));
  FitResult fit;
  if (o.method == "ts") {
    fit = fit_temperature(val, policy_of(o));
  } else if (o.method == "bcts") {
    fit = fit_bcts(val, policy_of(o));
  } else if (o.method == "hb") {
    fit = o.hb_bins == 0
              ? fit_histogram_binning_auto(val, default_histogram_bin_candidates())
              : fit_histogram_binning(val, o.hb_bins);
  } else {
    throw UsageError(fmt::format("unknown method '{}' (expected ts, bcts or hb)", o.method));
  }
  write_file(fs::path(o.out_dir) / "calibrator.json", dump(calibrator_to_json(fit.calibrator)));
  Json report = report_header("fit_report");
  report.update(to_json(fit.report));
  report["parameters"] = calibrator_to_json(fit.calibrator)["parameters"];
  report["config"] = {{"validation", o.validation}, {"method", o.method}};
  write_file(fs::path(o.out_dir) / "fit_report.json", dump(report));
  out << fmt::format("{}: validation NLL {} -> {} ({} iterations, {})\n", fit.report.method,
                     human(fit.report.initial_nll), human(fit.report.final_nll), fit.report.iterations,
                     fit.report.converged ? "converged" : "not converged");

  if (!o.input.empty()) {
    const Dataset test = load_input(o, o.input);
    const Dataset calibrated = apply_calibrator(fit.calibrator, test, policy_of(o));
    save_predictions(fs::path(o.out_dir) / "calibrated.jsonl", calibrated, DataFormat::kJsonl);
    const auto lens = lens_of(o, test);
    const auto sel = parse_selector(o.selector);
    const auto dist = parse_distance(o.distance);
    const auto bins = parse_binning(o.binning);
    const auto before = gece(test, lens, sel, dist, bins);
    const auto after = gece(calibrated, lens, sel, dist, bins);
    Json doc = report_header("calibration_eval");
    doc["before"] = to_json(before);
    doc["after"] = to_json(after);
    doc["config"] = config_json(o);
    doc["config"]["method"] = o.method;
    write_file(out_path(o, "calibrate_eval", ".json"), dump(doc));
    out << fmt::format("GECE before {} after {}\n", human(before.value), human(after.value));
  }
  return kExitOk;
}

int cmd_apply(const Options& o, std::ostream& out) {
  if (o.calibrator.empty()) throw UsageError("--calibrator is required");
  Json doc;
  try {
    doc = Json::parse(read_file(o.calibrator));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, fmt::format("{}: {}", o.calibrator, e.what()));
  }
  const Calibrator cal = calibrator_from_json(doc);
  const Dataset data = load_input(o, o.input);
  const Dataset calibrated = apply_calibrator(cal, data, policy_of(o));
  const fs::path target = o.output.empty() ? fs::path(o.out_dir) / "calibrated.jsonl" : fs::path(o.output);
  save_predictions(target, calibrated, chosen_format(o));
  out << fmt::format("wrote {} calibrated records to {}\n", calibrated.size(), target.string());
  return kExitOk;
}

// --- synth / report ---------------------------------------------------------

int cmd_synth(const Options& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o, "synth");
  if (o.generator.empty()) throw UsageError("--generator is required");
  const Dataset data = generate({parse_generator(o.generator), seed});
  const fs::path target = o.output.empty() ? fs::path(o.out_dir) / "synth.jsonl" : fs::path(o.output);
  save_predictions(target, data, chosen_format(o));
  out << fmt::format("wrote {} records ({}) to {}\n", data.size(), o.generator, target.string());
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  if (o.inputs.empty()) throw UsageError("--inputs needs at least one file");
  std::vector<Json> docs;
  for (const auto& path : o.inputs) {
    try {
      docs.push_back(Json::parse(read_file(path)));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParseError, fmt::format("{}: {}", path, e.what()));
    }
  }
  const auto rows = aggregate_reports(docs);
  Json doc = report_header("aggregate");
  doc["n_inputs"] = docs.size();
  doc["inputs"] = o.inputs;
  Json metrics = Json::array();
  std::ostringstream csv;
  csv << "path,mean,std,count\n";
  out << fmt::format("{:<40} {:>10} {:>10}\n", "metric", "mean", "std");
  for (const auto& row : rows) {
    metrics.push_back({{"path", row.path}, {"mean", row.mean}, {"std", row.std}, {"count", row.count}});
    csv << row.path << ',' << format_double(row.mean) << ',' << format_double(row.std) << ','
        << row.count << '\n';
    out << fmt::format("{:<40} {:>10} {:>10}\n", row.path, human(row.mean), human(row.std));
  }
  doc["metrics"] = std::move(metrics);
  write_file(out_path(o, "report", ".json"), dump(doc));
  write_file(out_path(o, "report", ".csv"), csv.str());
  return kExitOk;
}

// Appends `--key value` for every config-file entry whose flag is absent from
// the command line, so explicit flags win.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  const auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return args;
  if (it + 1 == args.end()) throw UsageError("--config needs a file");
  const std::string path = *(it + 1);
  args.erase(it, it + 2);
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw UsageError(fmt::format("config {}: {}", path, e.what()));
  }
  if (!doc.is_object()) throw UsageError(fmt::format("config {} must be a JSON object", path));
  auto scalar = [](const Json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.starts_with(flag + "=");
    });
    if (given) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      args.push_back(flag);
      for (const auto& v : value) args.push_back(scalar(v));
    } else {
      args.push_back(flag);
      args.push_back(scalar(value));
    }
  }
  return args;
}

bool is_usage_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kInvalidSelector:
    case ErrorCode::kInvalidBinning:
    case ErrorCode::kInvalidDistance:
    case ErrorCode::kInvalidLensForK:
    case ErrorCode::kDistanceLensMismatch:
    case ErrorCode::kInterIntervalOnNonScalar:
      return true;
    default:
      return false;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Context-specific expected calibration error for saved classifier predictions", "gece"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  auto add_io = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "prediction file (jsonl or csv)");
    sub->add_option("--format", o.format, "jsonl or csv (default: from extension)");
    sub->add_option("--out-dir", o.out_dir, "directory for reports")->capture_default_str();
    sub->add_option("--name", o.name, "file stem for reports");
    sub->add_option("--seed", o.seed, "random seed");
  };
  auto add_metric = [&](CLI::App* sub, bool with_binning) {
    sub->add_option("--lens", o.lens, "full | topk:K | class:C | group:<csv>")->capture_default_str();
    sub->add_option("--selector", o.selector, "e.g. all, label=3, maxprob>=0.66")->capture_default_str();
    sub->add_option("--distance", o.distance, "tvd | l2 | interval:L:H | weighted:<csv>")->capture_default_str();
    if (with_binning) {
      sub->add_option("--binning", o.binning, "uniform:B[:LO:HI] | adaptive:GAMMA")->capture_default_str();
    }
  };

  auto* eval = app.add_subcommand("eval", "compute a GECE metric");
  add_io(eval);
  add_metric(eval, true);
  eval->add_option("--likert", o.likert, "name:low:high,... categories for binary outputs");

  auto* sweep = app.add_subcommand("sweep", "bootstrap gamma sweep for adaptive binning");
  add_io(sweep);
  add_metric(sweep, false);
  sweep->add_option("--gammas", o.gammas, "coarse-to-fine gamma grid (default 2^0..2^-8)");
  sweep->add_option("--resamples", o.resamples, "bootstrap resamples per gamma")->capture_default_str();
  sweep->add_option("--epsilon", o.epsilon, "plateau tolerance")->capture_default_str();

  auto* profile = app.add_subcommand("profile", "estimator and output diagnostics");
  add_io(profile);
  add_metric(profile, true);
  profile->add_option("--kind", o.kind, "variance | confidence | entropy | topk-accuracy | group-confidence | bin-stats")
      ->capture_default_str();
  profile->add_option("--gamma", o.gamma, "adaptive gamma for variance profiles")->capture_default_str();
  profile->add_option("--fractions", o.fractions, "sample fractions (default 0.1..1.0)");
  profile->add_option("--resamples", o.resamples, "bootstrap resamples")->capture_default_str();
  profile->add_option("--ks", o.ks, "ranks for confidence/top-k accuracy (default 1..k)");
  profile->add_option("--group-map", o.group_map, "class_index,group_index CSV");
  profile->add_option("--group", o.group, "group index for group-confidence");

  auto* calibrate = app.add_subcommand("calibrate", "fit a post-hoc calibrator on validation data");
  add_io(calibrate);
  add_metric(calibrate, true);
  calibrate->add_option("--validation", o.validation, "validation prediction file");
  calibrate->add_option("--method", o.method, "ts | bcts | hb")->capture_default_str();
  calibrate->add_option("--bins", o.hb_bins, "histogram bins (0 = choose from 10,15,25,50)");
  calibrate->add_flag("--require-logits", o.require_logits, "refuse records without logits");

  auto* apply = app.add_subcommand("apply", "apply a fitted calibrator");
  add_io(apply);
  apply->add_option("--calibrator", o.calibrator, "calibrator JSON");
  apply->add_option("--output", o.output, "output prediction file");
  apply->add_flag("--require-logits", o.require_logits, "refuse records without logits");

  auto* synth = app.add_subcommand("synth", "generate a synthetic prediction set");
  add_io(synth);
  synth->add_option("--generator", o.generator,
                    "calibrated:A:K:N | two-point:N | sharpened:A:K:N:S | constant:P:R:N");
  synth->add_option("--output", o.output, "output prediction file");

  auto* report = app.add_subcommand("report", "mean and std over repeated runs");
  report->add_option("--inputs", o.inputs, "result JSON files")->expected(1, -1);
  report->add_option("--out-dir", o.out_dir, "directory for reports")->capture_default_str();
  report->add_option("--name", o.name, "file stem for reports");

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*eval) return cmd_eval(o, out);
    if (*sweep) return cmd_sweep(o, out);
    if (*profile) return cmd_profile(o, out);
    if (*calibrate) return cmd_calibrate(o, out);
    if (*apply) return cmd_apply(o, out);
    if (*synth) return cmd_synth(o, out);
    if (*report) return cmd_report(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_usage_code(e.code()) ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace gece
