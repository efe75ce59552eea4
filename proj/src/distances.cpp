#include "gece/distances.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "gece/detail/overloaded.hpp"
#include "gece/error.hpp"

namespace gece {

using detail::Overloaded;

WeightedDistance validate_weight_matrix(std::span<const double> row_major, std::size_t dim) {
  if (dim == 0 || row_major.size() != dim * dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("weight matrix has {} entries, expected a square {}x{}",
                            row_major.size(), dim, dim));
  }
  for (double v : row_major) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, "weight matrix entry");
  }
  Eigen::MatrixXd m(dim, dim);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) m(r, c) = row_major[r * dim + c];
  }
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < kPsdTolerance) {
    throw Error(ErrorCode::kNonPSDMatrix,
                fmt::format("smallest eigenvalue {:.17g} is negative", min_eig));
  }
  std::vector<double> stored(dim * dim);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) stored[r * dim + c] = sym(r, c);
  }
  return WeightedDistance(std::move(stored), dim, min_eig);
}

void validate_distance(const DistanceSpec& spec) {
  if (const auto* iv = std::get_if<InterIntervalDistance>(&spec)) {
    if (!(iv->lower >= 0.0 && iv->lower < iv->upper && iv->upper <= 1.0)) {
      throw Error(ErrorCode::kInvalidDistance,
                  fmt::format("interval [{}, {}] needs 0 <= l < h <= 1", iv->lower, iv->upper));
    }
  }
}

void check_distance_dimension(const DistanceSpec& spec, std::size_t lensed_dim) {
  validate_distance(spec);
  if (std::holds_alternative<InterIntervalDistance>(spec) && lensed_dim != 1) {
    throw Error(ErrorCode::kInterIntervalOnNonScalar,
                fmt::format("interval distance needs a scalar lens, got k' = {}", lensed_dim));
  }
  if (const auto* w = std::get_if<WeightedDistance>(&spec); w && w->dimension() != lensed_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("weight matrix is {0}x{0} but k' = {1}", w->dimension(), lensed_dim));
  }
}

double distance(const DistanceSpec& spec, std::span<const double> g_bar,
                std::span<const double> y_bar) {
  if (g_bar.size() != y_bar.size() || g_bar.empty()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("distance inputs of length {} and {}", g_bar.size(), y_bar.size()));
  }
  check_distance_dimension(spec, g_bar.size());
  const std::size_t n = g_bar.size();
  return std::visit(
      Overloaded{
          [&](const TvdDistance&) {
            if (n == 1) return std::abs(g_bar[0] - y_bar[0]);
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += std::abs(g_bar[i] - y_bar[i]);
            return 0.5 * sum;
          },
          [&](const L2Distance&) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              const double d = g_bar[i] - y_bar[i];
              sum += d * d;
            }
            return std::sqrt(sum);
          },
          [&](const InterIntervalDistance& iv) {
            const double y = y_bar[0];
            return std::max(0.0, std::max(iv.lower - y, y - iv.upper));
          },
          [&](const WeightedDistance& w) {
            const auto m = w.matrix();
            double quad = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
              double row = 0.0;
              for (std::size_t c = 0; c < n; ++c) row += m[r * n + c] * (g_bar[c] - y_bar[c]);
              quad += (g_bar[r] - y_bar[r]) * row;
            }
            // PSD matrices within tolerance can leave a tiny negative quadratic form.
            return std::sqrt(std::max(0.0, quad));
          },
      },
      spec);
}

std::string to_string(const DistanceSpec& spec) {
  return std::visit(Overloaded{
                        [](const TvdDistance&) { return std::string("tvd"); },
                        [](const L2Distance&) { return std::string("l2"); },
                        [](const InterIntervalDistance& iv) {
                          return fmt::format("interval:{}:{}", iv.lower, iv.upper);
                        },
                        [](const WeightedDistance& w) {
                          return fmt::format("weighted:{}x{}", w.dimension(), w.dimension());
                        },
                    },
                    spec);
}

}  // namespace gece
