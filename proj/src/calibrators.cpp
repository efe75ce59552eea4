#include "gece/calibrators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "gece/detail/overloaded.hpp"

namespace gece {

using detail::Overloaded;

std::string calibrator_name(const Calibrator& calibrator) {
  return std::visit(Overloaded{
                        [](const TemperatureScaling&) { return std::string("temperature_scaling"); },
                        [](const BiasCorrectedTemperatureScaling&) { return std::string("bcts"); },
                        [](const HistogramBinningCalibrator&) { return std::string("histogram_binning"); },
                    },
                    calibrator);
}

namespace {

void check_temperature(double t) {
  if (!(std::isfinite(t) && t > 0.0)) {
    throw Error(ErrorCode::kInvalidCalibrator, fmt::format("temperature {} must be positive", t));
  }
}

}  // namespace

void validate_calibrator(const Calibrator& calibrator, std::size_t k) {
  std::visit(
      Overloaded{
          [](const TemperatureScaling& c) { check_temperature(c.temperature); },
          [k](const BiasCorrectedTemperatureScaling& c) {
            check_temperature(c.temperature);
            if (c.bias.size() != k) {
              throw Error(ErrorCode::kInvalidCalibrator,
                          fmt::format("bias has {} entries for {} classes", c.bias.size(), k));
            }
            for (double b : c.bias) {
              if (!std::isfinite(b)) throw Error(ErrorCode::kInvalidCalibrator, "non-finite bias");
            }
          },
          [k](const HistogramBinningCalibrator& c) {
            if (c.edges.size() != k || c.values.size() != k) {
              throw Error(ErrorCode::kInvalidCalibrator,
                          fmt::format("histogram tables cover {} classes, need {}", c.edges.size(), k));
            }
            for (std::size_t cls = 0; cls < k; ++cls) {
              const auto& e = c.edges[cls];
              const auto& v = c.values[cls];
              if (v.empty() || e.size() != v.size() + 1) {
                throw Error(ErrorCode::kInvalidCalibrator,
                            fmt::format("class {}: {} edges for {} bins", cls, e.size(), v.size()));
              }
              if (e.front() != 0.0 || e.back() != 1.0) {
                throw Error(ErrorCode::kInvalidCalibrator,
                            fmt::format("class {}: edges must span [0, 1]", cls));
              }
              for (std::size_t i = 1; i < e.size(); ++i) {
                if (!(e[i] > e[i - 1])) {
                  throw Error(ErrorCode::kInvalidCalibrator,
                              fmt::format("class {}: edges not strictly increasing", cls));
                }
              }
              for (double x : v) {
                if (!(x >= 0.0 && x <= 1.0)) {
                  throw Error(ErrorCode::kInvalidCalibrator,
                              fmt::format("class {}: bin value {} outside [0, 1]", cls, x));
                }
              }
            }
          },
      },
      calibrator);
}

LogitTable LogitTable::from_dataset(const Dataset& dataset, LogitPolicy policy) {
  LogitTable table;
  table.k_ = dataset.num_classes();
  table.logits_.reserve(dataset.size() * table.k_);
  table.labels_.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& record = dataset[i];
    if (record.has_logits()) {
      const auto& z = *record.logits();
      table.logits_.insert(table.logits_.end(), z.begin(), z.end());
    } else if (policy == LogitPolicy::kAllowLogProbs) {
      for (double p : record.probs().values()) table.logits_.push_back(std::log(std::max(p, kNllClamp)));
    } else {
      throw Error(ErrorCode::kMissingLogits, fmt::format("record {} has no logits", i));
    }
    table.labels_.push_back(record.label());
  }
  return table;
}

NllGradient bcts_objective(const LogitTable& table, double temperature,
                           std::span<const double> bias) {
  const std::size_t k = table.num_classes();
  NllGradient out;
  out.d_bias.assign(k, 0.0);
  std::vector<double> s(k);
  const double log_clamp = std::log(kNllClamp);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto z = table.row(i);
    double max = -INFINITY;
    for (std::size_t c = 0; c < k; ++c) {
      s[c] = z[c] / temperature + (bias.empty() ? 0.0 : bias[c]);
      max = std::max(max, s[c]);
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      s[c] = std::exp(s[c] - max);  // s now holds unnormalized probabilities
      sum += s[c];
    }
    const std::size_t y = table.label(i);
    const double log_py = std::log(s[y]) - std::log(sum);
    if (log_py < log_clamp) {
      out.value -= log_clamp;  // flat region: no gradient
      continue;
    }
    out.value -= log_py;
    for (std::size_t c = 0; c < k; ++c) {
      const double residual = s[c] / sum - (c == y ? 1.0 : 0.0);
      out.d_bias[c] += residual;
      out.d_temperature -= residual * z[c] / (temperature * temperature);
    }
  }
  const double n = static_cast<double>(table.size());
  out.value /= n;
  out.d_temperature /= n;
  for (double& g : out.d_bias) g /= n;
  return out;
}

double temperature_nll(const LogitTable& table, double temperature) {
  return bcts_objective(table, temperature, {}).value;
}

double mean_nll(const Dataset& dataset, double clamp) {
  if (dataset.empty()) throw Error(ErrorCode::kEmptyDataset, "NLL of an empty dataset");
  double total = 0.0;
  for (const auto& record : dataset.records()) {
    total -= std::log(std::max(record.probs()[record.label()], clamp));
  }
  return total / static_cast<double>(dataset.size());
}

namespace {

void check_validation(const Dataset& validation) {
  if (validation.size() < 2) {
    throw Error(ErrorCode::kDegenerateValidation, "need at least two validation records");
  }
  std::set<std::size_t> labels;
  for (const auto& r : validation.records()) labels.insert(r.label());
  if (labels.size() < 2) {
    throw Error(ErrorCode::kDegenerateValidation, "validation labels contain a single class");
  }
}

}  // namespace

FitResult fit_temperature(const Dataset& validation, LogitPolicy policy) {
  check_validation(validation);
  const LogitTable table = LogitTable::from_dataset(validation, policy);
  auto objective = [&](double log_t) { return temperature_nll(table, std::exp(log_t)); };

  constexpr double kLower = -4.0;
  constexpr double kUpper = 4.0;
  constexpr double kTolerance = 1e-6;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  double a = kLower;
  double b = kUpper;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  std::size_t iterations = 0;
  while (b - a > kTolerance) {
    ++iterations;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    }
  }
  double log_t = 0.5 * (a + b);
  double best = objective(log_t);

  FitReport report;
  report.method = "temperature_scaling";
  report.initial_nll = objective(0.0);
  report.iterations = iterations;
  // A minimizer pressed against the search bounds means NLL kept falling.
  report.converged = log_t - kLower > 10 * kTolerance && kUpper - log_t > 10 * kTolerance;
  if (best > report.initial_nll) {
    log_t = 0.0;
    best = report.initial_nll;
    report.converged = false;
  }
  report.final_nll = best;
  return {TemperatureScaling{std::exp(log_t)}, report};
}

FitResult fit_bcts(const Dataset& validation, LogitPolicy policy, const BctsOptions& options) {
  check_validation(validation);
  const LogitTable table = LogitTable::from_dataset(validation, policy);
  const std::size_t k = table.num_classes();

  double temperature = 1.0;
  std::vector<double> bias(k, 0.0);
  NllGradient current = bcts_objective(table, temperature, bias);
  if (!options.fit_bias) std::fill(current.d_bias.begin(), current.d_bias.end(), 0.0);

  FitReport report;
  report.method = "bcts";
  report.initial_nll = current.value;

  auto grad_norm = [](const NllGradient& g) {
    double s = g.d_temperature * g.d_temperature;
    for (double v : g.d_bias) s += v * v;
    return std::sqrt(s);
  };

  double step = 1.0;
  std::vector<double> trial_bias(k);
  for (; report.iterations < options.max_iterations; ++report.iterations) {
    if (grad_norm(current) < options.gradient_tolerance) {
      report.converged = true;
      break;
    }
    bool accepted = false;
    while (step > 1e-16) {
      const double trial_t = temperature - step * current.d_temperature;
      for (std::size_t c = 0; c < k; ++c) trial_bias[c] = bias[c] - step * current.d_bias[c];
      if (trial_t > 0.0) {
        NllGradient trial = bcts_objective(table, trial_t, trial_bias);
        if (trial.value < current.value) {
          if (!options.fit_bias) std::fill(trial.d_bias.begin(), trial.d_bias.end(), 0.0);
          temperature = trial_t;
          bias = trial_bias;
          current = std::move(trial);
          accepted = true;
          step *= 2.0;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent possible at machine precision: stationary for our purposes.
      report.converged = true;
      break;
    }
  }

  // softmax is invariant to adding a constant to every logit.
  double mean = 0.0;
  for (double b : bias) mean += b;
  mean /= static_cast<double>(k);
  for (double& b : bias) b -= mean;
  report.final_nll = std::min(bcts_objective(table, temperature, bias).value, current.value);
  return {BiasCorrectedTemperatureScaling{temperature, std::move(bias)}, report};
}

namespace {

std::size_t histogram_bin(std::span<const double> edges, double x) {
  const std::size_t n_bins = edges.size() - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  if (it == edges.begin()) return 0;
  return std::min<std::size_t>(static_cast<std::size_t>(it - edges.begin()) - 1, n_bins - 1);
}

std::vector<double> apply_histogram(const HistogramBinningCalibrator& cal,
                                    std::span<const double> p) {
  std::vector<double> q(p.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    q[c] = cal.values[c][histogram_bin(cal.edges[c], p[c])];
    sum += q[c];
  }
  if (sum <= 0.0) {
    std::fill(q.begin(), q.end(), 1.0 / static_cast<double>(q.size()));
  } else {
    for (double& v : q) v /= sum;
  }
  return q;
}

}  // namespace

FitResult fit_histogram_binning(const Dataset& validation, std::size_t n_bins) {
  if (validation.empty()) throw Error(ErrorCode::kEmptyDataset, "empty validation set");
  if (n_bins < 1) throw Error(ErrorCode::kInvalidSpec, "histogram binning needs n_bins >= 1");
  const std::size_t k = validation.num_classes();

  std::vector<double> edges(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    edges[i] = static_cast<double>(i) / static_cast<double>(n_bins);
  }
  HistogramBinningCalibrator cal;
  cal.edges.assign(k, edges);
  cal.values.assign(k, std::vector<double>(n_bins, 0.0));
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> positives(n_bins, 0.0);
    std::vector<double> counts(n_bins, 0.0);
    for (const auto& record : validation.records()) {
      const std::size_t bin = histogram_bin(edges, record.probs()[c]);
      counts[bin] += 1.0;
      if (record.label() == c) positives[bin] += 1.0;
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
      cal.values[c][b] = counts[b] > 0.0 ? positives[b] / counts[b] : 0.5 * (edges[b] + edges[b + 1]);
    }
  }

  FitReport report;
  report.method = "histogram_binning";
  report.initial_nll = mean_nll(validation, kHistogramNllClamp);
  report.final_nll = mean_nll(apply_calibrator(cal, validation), kHistogramNllClamp);
  report.iterations = 1;
  report.converged = true;
  return {std::move(cal), report};
}

std::vector<std::size_t> default_histogram_bin_candidates() { return {10, 15, 25, 50}; }

FitResult fit_histogram_binning_auto(const Dataset& validation,
                                     std::span<const std::size_t> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidSpec, "no bin-count candidates");
  std::vector<std::size_t> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  std::optional<FitResult> best;
  for (std::size_t n : sorted) {
    FitResult fit = fit_histogram_binning(validation, n);
    if (!best || fit.report.final_nll < best->report.final_nll) best = std::move(fit);
  }
  return std::move(*best);
}

Dataset apply_calibrator(const Calibrator& calibrator, const Dataset& dataset, LogitPolicy policy) {
  validate_calibrator(calibrator, dataset.num_classes());
  const std::size_t k = dataset.num_classes();
  std::vector<PredictionRecord> out;
  out.reserve(dataset.size());

  if (const auto* hb = std::get_if<HistogramBinningCalibrator>(&calibrator)) {
    for (const auto& record : dataset.records()) {
      const auto q = apply_histogram(*hb, record.probs().values());
      out.push_back(PredictionRecord::from_probs(q, record.label()));
    }
    return dataset.with_records(std::move(out));
  }

  double temperature = 1.0;
  std::span<const double> bias;
  if (const auto* ts = std::get_if<TemperatureScaling>(&calibrator)) {
    temperature = ts->temperature;
  } else {
    const auto& bcts = std::get<BiasCorrectedTemperatureScaling>(calibrator);
    temperature = bcts.temperature;
    bias = bcts.bias;
  }
  const LogitTable table = LogitTable::from_dataset(dataset, policy);
  std::vector<double> scaled(k);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto z = table.row(i);
    for (std::size_t c = 0; c < k; ++c) scaled[c] = z[c] / temperature + (bias.empty() ? 0.0 : bias[c]);
    out.push_back(PredictionRecord::from_logits(scaled, table.label(i)));
  }
  return dataset.with_records(std::move(out));
}

}  // namespace gece
