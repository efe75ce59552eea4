#include "gece/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace gece {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSumOutOfTolerance: return "SumOutOfTolerance";
    case ErrorCode::kEntryOutOfRange: return "EntryOutOfRange";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kInvalidLensForK: return "InvalidLensForK";
    case ErrorCode::kPartialMap: return "PartialMap";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kInvalidClassIndex: return "InvalidClassIndex";
    case ErrorCode::kInvalidSelector: return "InvalidSelector";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInterIntervalOnNonScalar: return "InterIntervalOnNonScalar";
    case ErrorCode::kNonPSDMatrix: return "NonPSDMatrix";
    case ErrorCode::kInvalidDistance: return "InvalidDistance";
    case ErrorCode::kInvalidBinning: return "InvalidBinning";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kDistanceLensMismatch: return "DistanceLensMismatch";
    case ErrorCode::kFractionTooSmall: return "FractionTooSmall";
    case ErrorCode::kMissingLogits: return "MissingLogits";
    case ErrorCode::kDegenerateValidation: return "DegenerateValidation";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kInvalidCalibrator: return "InvalidCalibrator";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kInconsistentWidth: return "InconsistentWidth";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSimplexViolation: return "SimplexViolation";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

ProbabilityVector validate_simplex(std::span<const double> values, double tolerance) {
  if (values.empty()) {
    throw Error(ErrorCode::kEntryOutOfRange, "empty probability vector");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteInput, fmt::format("entry {} is not finite", i));
    }
    if (v < -tolerance || v > 1.0 + tolerance) {
      throw Error(ErrorCode::kEntryOutOfRange,
                  fmt::format("entry {} = {} outside [0, 1]", i, v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw Error(ErrorCode::kSumOutOfTolerance, fmt::format("entries sum to {}", sum));
  }
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v = std::max(v, 0.0);
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  // Sums already within rounding of 1 are kept so stored vectors reload bit-exactly.
  const double rounding = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(out.size());
  if (std::abs(total - 1.0) > rounding) {
    for (double& v : out) v /= total;
  }
  return ProbabilityVector(std::move(out));
}

TargetVector one_hot(std::size_t label, std::size_t k) {
  if (label >= k) {
    throw Error(ErrorCode::kIndexOutOfRange, fmt::format("label {} not in [0, {})", label, k));
  }
  std::vector<double> v(k, 0.0);
  v[label] = 1.0;
  return TargetVector(std::move(v));
}

ProbabilityVector softmax(std::span<const double> logits) {
  if (logits.size() < 2) {
    throw Error(ErrorCode::kEntryOutOfRange, "softmax needs at least two logits");
  }
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) {
      throw Error(ErrorCode::kNonFiniteInput, fmt::format("logit {} is not finite", i));
    }
  }
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return ProbabilityVector(std::move(out));
}

PredictionRecord::PredictionRecord(ProbabilityVector probs,
                                   std::optional<std::vector<double>> logits, std::size_t label)
    : probs_(std::move(probs)), logits_(std::move(logits)), label_(label) {
  if (probs_.size() < 2) {
    throw Error(ErrorCode::kInvalidSpec, "a prediction needs at least two classes");
  }
  if (label_ >= probs_.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                fmt::format("label {} not in [0, {})", label_, probs_.size()));
  }
}

PredictionRecord PredictionRecord::from_probs(std::span<const double> probs, std::size_t label,
                                              double tolerance) {
  return PredictionRecord(validate_simplex(probs, tolerance), std::nullopt, label);
}

PredictionRecord PredictionRecord::from_logits(std::span<const double> logits, std::size_t label) {
  return PredictionRecord(softmax(logits), std::vector<double>(logits.begin(), logits.end()),
                          label);
}

PredictionRecord PredictionRecord::from_both(std::span<const double> probs,
                                             std::span<const double> logits, std::size_t label,
                                             double tolerance) {
  if (probs.size() != logits.size()) {
    throw Error(ErrorCode::kInconsistentWidth, "probs and logits differ in length");
  }
  ProbabilityVector p = validate_simplex(probs, tolerance);
  const ProbabilityVector q = softmax(logits);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p[i] - q[i]) > kLogitConsistencyTolerance) {
      throw Error(ErrorCode::kSimplexViolation,
                  fmt::format("probs[{}] = {} disagrees with softmax(logits) = {}", i, p[i], q[i]));
    }
  }
  return PredictionRecord(std::move(p), std::vector<double>(logits.begin(), logits.end()), label);
}

PredictionRecord PredictionRecord::from_binary_score(double p, std::size_t label) {
  const double probs[2] = {1.0 - p, p};
  return from_probs(probs, label);
}

Dataset::Dataset(std::size_t num_classes, std::vector<PredictionRecord> records,
                 std::vector<std::string> class_names)
    : num_classes_(num_classes), records_(std::move(records)), class_names_(std::move(class_names)) {
  if (num_classes_ < 2) {
    throw Error(ErrorCode::kInvalidSpec, "a dataset needs at least two classes");
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].num_classes() != num_classes_) {
      throw Error(ErrorCode::kInconsistentWidth,
                  fmt::format("record {} has {} classes, expected {}", i,
                              records_[i].num_classes(), num_classes_));
    }
  }
  if (!class_names_.empty() && class_names_.size() != num_classes_) {
    throw Error(ErrorCode::kInconsistentWidth, "class name count differs from class count");
  }
}

Dataset Dataset::with_records(std::vector<PredictionRecord> records) const {
  return Dataset(num_classes_, std::move(records), class_names_);
}

std::vector<std::size_t> descending_order(std::span<const double> probs) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  return order;
}

}  // namespace gece
