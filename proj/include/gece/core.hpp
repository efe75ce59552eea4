#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gece/error.hpp"

namespace gece {

// Tolerance applied when reading prediction dumps (renormalize within it).
inline constexpr double kIngestTolerance = 1e-6;
// Tolerance for values produced inside the library.
inline constexpr double kSimplexTolerance = 1e-9;
// Maximum allowed disagreement between stored probs and softmax(logits).
inline constexpr double kLogitConsistencyTolerance = 1e-6;

/// A point of the probability simplex with k >= 2 entries.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const ProbabilityVector&) const = default;

 private:
  friend ProbabilityVector validate_simplex(std::span<const double>, double);
  friend ProbabilityVector softmax(std::span<const double>);
  explicit ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {}

  std::vector<double> values_;
};

/// One-hot label encoding.
class TargetVector {
 public:
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  friend TargetVector one_hot(std::size_t, std::size_t);
  explicit TargetVector(std::vector<double> values) : values_(std::move(values)) {}

  std::vector<double> values_;
};

/// Checks that `values` lies on the simplex within `tolerance` and returns the
/// renormalized vector. Entries slightly below zero (within tolerance) are
/// clamped to zero before renormalizing.
ProbabilityVector validate_simplex(std::span<const double> values, double tolerance);

TargetVector one_hot(std::size_t label, std::size_t k);

/// Max-subtracted softmax. Requires at least two finite logits.
ProbabilityVector softmax(std::span<const double> logits);

/// A single classifier prediction. Probabilities are always available; logits
/// are kept when the source provided them.
class PredictionRecord {
 public:
  static PredictionRecord from_probs(std::span<const double> probs, std::size_t label,
                                     double tolerance = kSimplexTolerance);
  static PredictionRecord from_logits(std::span<const double> logits, std::size_t label);
  static PredictionRecord from_both(std::span<const double> probs, std::span<const double> logits,
                                    std::size_t label, double tolerance = kSimplexTolerance);
  // Binary scalar convention: p is the class-1 probability.
  static PredictionRecord from_binary_score(double p, std::size_t label);

  const ProbabilityVector& probs() const { return probs_; }
  const std::optional<std::vector<double>>& logits() const { return logits_; }
  bool has_logits() const { return logits_.has_value(); }
  std::size_t label() const { return label_; }
  std::size_t num_classes() const { return probs_.size(); }

 private:
  PredictionRecord(ProbabilityVector probs, std::optional<std::vector<double>> logits,
                   std::size_t label);

  ProbabilityVector probs_;
  std::optional<std::vector<double>> logits_;
  std::size_t label_ = 0;
};

/// An ordered collection of predictions sharing one class count. May be empty
/// (selection results); operations that need data check for that themselves.
class Dataset {
 public:
  Dataset(std::size_t num_classes, std::vector<PredictionRecord> records,
          std::vector<std::string> class_names = {});

  std::size_t num_classes() const { return num_classes_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<PredictionRecord>& records() const { return records_; }
  const PredictionRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<std::string>& class_names() const { return class_names_; }

  /// Same class count and names, different records.
  Dataset with_records(std::vector<PredictionRecord> records) const;

 private:
  std::size_t num_classes_;
  std::vector<PredictionRecord> records_;
  std::vector<std::string> class_names_;
};

/// Indices of `probs` ordered by decreasing value; ties keep the lower index first.
std::vector<std::size_t> descending_order(std::span<const double> probs);

}  // namespace gece
