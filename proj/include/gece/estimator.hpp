#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gece/core.hpp"
#include "gece/distances.hpp"
#include "gece/lenses.hpp"
#include "gece/selectors.hpp"

namespace gece {

/// `bins` equal-width cells per axis over [lower, upper].
struct UniformBinning {
  std::size_t bins = 15;
  double lower = 0.0;
  double upper = 1.0;
  bool operator==(const UniformBinning&) const = default;
};

/// k-d tree median splits until no leaf holds more than ceil(gamma * N) points.
struct AdaptiveBinning {
  double gamma = 0.1;
  bool operator==(const AdaptiveBinning&) const = default;
};

using BinningSpec = std::variant<UniformBinning, AdaptiveBinning>;

void validate_binning(const BinningSpec& spec);
std::string to_string(const BinningSpec& spec);

/// Lensed outputs and targets of a dataset, stored row-major.
class LensedPoints {
 public:
  explicit LensedPoints(std::size_t dim) : dim_(dim) {}

  void push_back(const LensedPair& pair);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : outputs_.size() / dim_; }
  std::span<const double> output(std::size_t i) const { return {outputs_.data() + i * dim_, dim_}; }
  std::span<const double> target(std::size_t i) const { return {targets_.data() + i * dim_, dim_}; }

  /// Points at `indices`, in that order (indices may repeat).
  LensedPoints gather(std::span<const std::size_t> indices) const;

 private:
  std::size_t dim_;
  std::vector<double> outputs_;
  std::vector<double> targets_;
};

LensedPoints lens_dataset(const Dataset& dataset, const LensSpec& lens);

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct Bin {
  std::vector<std::size_t> members;  // indices into the LensedPoints
  std::vector<double> mean_output;
  std::vector<double> mean_target;
  Box region;
};

/// A partition of the lensed points. Only non-empty bins are stored.
struct Binning {
  std::vector<Bin> bins;
  std::size_t num_points = 0;
};

/// Per-axis grid. A coordinate on an interior edge goes to the upper cell; the
/// top edge closes the last cell; coordinates outside the range are clamped.
/// Bins are ordered lexicographically by cell index.
Binning bin_uniform(const LensedPoints& points, std::size_t bins, double lower, double upper);

/// Recursive lower-median split, cycling the split axis with depth. The left
/// child receives ceil(n/2) points; equal coordinates are ordered by point
/// index. Bins are ordered left to right across the tree.
Binning bin_adaptive(const LensedPoints& points, double gamma);

/// Largest leaf occupancy allowed by bin_adaptive for N points.
std::size_t adaptive_capacity(double gamma, std::size_t num_points);

Binning make_binning(const BinningSpec& spec, const LensedPoints& points);

struct BinResult {
  std::size_t count = 0;
  std::vector<double> mean_output;
  std::vector<double> mean_target;
  double distance = 0.0;
};

struct MetricConfig {
  std::string lens;
  std::string selector;
  std::string distance;
  std::string binning;
  std::optional<std::uint64_t> seed;
};

struct MetricResult {
  double value = 0.0;
  std::vector<BinResult> per_bin;
  std::size_t n_selected = 0;
  MetricConfig config;
};

/// Histogram estimate of the expected calibration error: select, lens, bin,
/// then sum |B|/N * d(mean output, mean target) over occupied bins.
MetricResult gece(const Dataset& dataset, const LensSpec& lens, const SelectorSpec& selector,
                  const DistanceSpec& distance, const BinningSpec& binning);

/// The binning and summation steps of gece() on already lensed points.
/// `distance` must already be valid for points.dim(); points must be non-empty.
MetricResult gece_points(const LensedPoints& points, const DistanceSpec& distance,
                         const BinningSpec& binning);

/// Top-1 lens, TVD and 15 uniform bins over [0, 1].
MetricResult traditional_ece(const Dataset& dataset);

}  // namespace gece
