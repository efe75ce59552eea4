#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gece/core.hpp"

namespace gece {

// Probability floor inside log() for NLL computations.
inline constexpr double kNllClamp = 1e-12;
// Floor used when reporting histogram-binning NLL (bin values can be exactly 0).
inline constexpr double kHistogramNllClamp = 1e-6;

/// How calibrators obtain logits for records that only carry probabilities.
enum class LogitPolicy {
  kAllowLogProbs,  // use log(max(p, kNllClamp))
  kRequireLogits,  // throw MissingLogits
};

struct TemperatureScaling {
  double temperature = 1.0;
  bool operator==(const TemperatureScaling&) const = default;
};

/// softmax(z / T + b).
struct BiasCorrectedTemperatureScaling {
  double temperature = 1.0;
  std::vector<double> bias;
  bool operator==(const BiasCorrectedTemperatureScaling&) const = default;
};

/// One-vs-rest histogram binning: class c's output is replaced by the value of
/// the bin it falls in, then the vector is renormalized.
struct HistogramBinningCalibrator {
  std::vector<std::vector<double>> edges;   // per class, n_bins + 1 increasing, 0 .. 1
  std::vector<std::vector<double>> values;  // per class, n_bins entries in [0, 1]
  bool operator==(const HistogramBinningCalibrator&) const = default;
};

using Calibrator =
    std::variant<TemperatureScaling, BiasCorrectedTemperatureScaling, HistogramBinningCalibrator>;

std::string calibrator_name(const Calibrator& calibrator);

/// Throws InvalidCalibrator when parameters break their invariants, or when
/// the calibrator cannot be applied to k classes.
void validate_calibrator(const Calibrator& calibrator, std::size_t k);

struct FitReport {
  std::string method;
  double initial_nll = 0.0;
  double final_nll = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct FitResult {
  Calibrator calibrator;
  FitReport report;
};

/// Row-major logits with labels, extracted once for repeated objective calls.
class LogitTable {
 public:
  static LogitTable from_dataset(const Dataset& dataset, LogitPolicy policy);

  std::size_t size() const { return labels_.size(); }
  std::size_t num_classes() const { return k_; }
  std::span<const double> row(std::size_t i) const { return {logits_.data() + i * k_, k_}; }
  std::size_t label(std::size_t i) const { return labels_[i]; }

 private:
  std::size_t k_ = 0;
  std::vector<double> logits_;
  std::vector<std::size_t> labels_;
};

struct NllGradient {
  double value = 0.0;
  double d_temperature = 0.0;
  std::vector<double> d_bias;
};

/// Mean NLL of softmax(z / T + b) and its analytic gradient.
NllGradient bcts_objective(const LogitTable& table, double temperature, std::span<const double> bias);

/// Mean NLL of softmax(z / T).
double temperature_nll(const LogitTable& table, double temperature);

/// Mean negative log-likelihood of the stored probabilities.
double mean_nll(const Dataset& dataset, double clamp = kNllClamp);

/// Golden-section search on log T over [-4, 4] to width 1e-6.
FitResult fit_temperature(const Dataset& validation, LogitPolicy policy = LogitPolicy::kAllowLogProbs);

struct BctsOptions {
  bool fit_bias = true;
  std::size_t max_iterations = 5000;
  double gradient_tolerance = 1e-6;
};

/// Gradient descent from (T = 1, b = 0) with step halving whenever a step
/// fails to decrease the objective. The fitted bias is shifted to mean zero.
FitResult fit_bcts(const Dataset& validation, LogitPolicy policy = LogitPolicy::kAllowLogProbs,
                   const BctsOptions& options = {});

FitResult fit_histogram_binning(const Dataset& validation, std::size_t n_bins);

/// Picks n_bins among `candidates` by validation NLL (ties go to fewer bins).
FitResult fit_histogram_binning_auto(const Dataset& validation,
                                     std::span<const std::size_t> candidates);
std::vector<std::size_t> default_histogram_bin_candidates();

Dataset apply_calibrator(const Calibrator& calibrator, const Dataset& dataset,
                         LogitPolicy policy = LogitPolicy::kAllowLogProbs);

}  // namespace gece
