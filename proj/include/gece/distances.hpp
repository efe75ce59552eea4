#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gece {

// Smallest eigenvalue accepted for a weight matrix.
inline constexpr double kPsdTolerance = -1e-8;

/// Total variation distance: half the L1 norm. For scalar (k' = 1) inputs
/// the value is |g - y|, the TVD of the binary pair [1-g, g] vs [1-y, y].
struct TvdDistance {
  bool operator==(const TvdDistance&) const = default;
};

struct L2Distance {
  bool operator==(const L2Distance&) const = default;
};

/// Hinge on the mean target leaving [lower, upper]; the mean output is ignored.
/// Defined for scalar (k' = 1) problems only.
struct InterIntervalDistance {
  double lower = 0.0;
  double upper = 1.0;
  bool operator==(const InterIntervalDistance&) const = default;
};

/// sqrt(d^T M d) for a symmetric PSD matrix M. Build through
/// validate_weight_matrix().
class WeightedDistance {
 public:
  std::size_t dimension() const { return dim_; }
  std::span<const double> matrix() const { return matrix_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

  bool operator==(const WeightedDistance&) const = default;

 private:
  friend WeightedDistance validate_weight_matrix(std::span<const double>, std::size_t);
  WeightedDistance(std::vector<double> m, std::size_t dim, double min_eig)
      : matrix_(std::move(m)), dim_(dim), min_eigenvalue_(min_eig) {}

  std::vector<double> matrix_;  // row-major dim x dim, symmetrized
  std::size_t dim_ = 0;
  double min_eigenvalue_ = 0.0;
};

using DistanceSpec = std::variant<TvdDistance, L2Distance, InterIntervalDistance, WeightedDistance>;

/// Symmetrizes (M + M^T) / 2 and rejects it with NonPSDMatrix when its smallest
/// eigenvalue is below kPsdTolerance. `row_major` holds dim*dim finite values.
WeightedDistance validate_weight_matrix(std::span<const double> row_major, std::size_t dim);

/// Throws InvalidDistance for an interval outside 0 <= lower < upper <= 1.
void validate_distance(const DistanceSpec& spec);

/// Checks that `spec` is usable on k'-dimensional lensed vectors.
void check_distance_dimension(const DistanceSpec& spec, std::size_t lensed_dim);

double distance(const DistanceSpec& spec, std::span<const double> g_bar,
                std::span<const double> y_bar);

std::string to_string(const DistanceSpec& spec);

}  // namespace gece
