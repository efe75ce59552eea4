#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gece/core.hpp"
#include "gece/distances.hpp"
#include "gece/estimator.hpp"
#include "gece/lenses.hpp"
#include "gece/selectors.hpp"

namespace gece {

inline constexpr double kDefaultPlateauEpsilon = 0.005;
inline constexpr double kBaselineGamma = 0.1;
inline constexpr std::size_t kDefaultResamples = 1000;

/// 2^0, 2^-1, ..., 2^-8.
std::vector<double> default_gamma_grid();

struct SweepResult {
  std::vector<double> gammas;
  std::vector<double> mean_ece;
  std::vector<double> std_ece;
  std::size_t n_resamples = 0;
  double recommended_gamma = kBaselineGamma;
  bool plateau_found = false;
  double plateau_epsilon = kDefaultPlateauEpsilon;
  std::uint64_t seed = 0;
  std::size_t n_points = 0;
};

struct VarianceProfile {
  std::vector<double> fractions;
  std::vector<std::size_t> sample_sizes;
  std::vector<double> mean_ece;
  std::vector<double> std_ece;
  std::size_t n_resamples = 0;
  double gamma = kBaselineGamma;
  std::uint64_t seed = 0;
};

struct BinStats {
  double median = 0.0;
  std::size_t min = 0;
  std::size_t max = 0;
};

/// Adaptive-binning GECE over bootstrap resamples (N draws with replacement
/// from the N selected records) for each gamma of a coarse-to-fine grid.
///
/// The recommended gamma is the coarsest grid value whose mean differs from
/// the next finer one by less than `plateau_epsilon`; without such a plateau
/// it falls back to kBaselineGamma. Resample r at grid index i draws from
/// Rng(seed, i, r).
SweepResult gamma_sweep(const Dataset& dataset, const LensSpec& lens, const SelectorSpec& selector,
                        const DistanceSpec& distance, std::span<const double> gamma_grid,
                        std::size_t n_resamples, std::uint64_t seed,
                        double plateau_epsilon = kDefaultPlateauEpsilon);

/// Bootstrap std of adaptive GECE at reduced sample sizes floor(f * N).
/// Resample r at fraction index i draws from Rng(seed, i, r).
VarianceProfile variance_profile(const Dataset& dataset, const LensSpec& lens,
                                 const SelectorSpec& selector, const DistanceSpec& distance,
                                 double gamma, std::span<const double> fractions,
                                 std::size_t n_resamples, std::uint64_t seed);

BinStats bin_stats(const Binning& binning);

/// Mean of the k-th largest output for each (1-based) k in `ks`.
std::vector<double> confidence_profile(const Dataset& dataset, std::span<const std::size_t> ks);

/// Fraction of records whose label is among the k largest outputs (ties broken
/// by lower class index, as in the top-k lens).
std::vector<double> topk_accuracy(const Dataset& dataset, std::span<const std::size_t> ks);

/// Mean Shannon entropy of the outputs, in nats.
double mean_entropy(const Dataset& dataset);

/// Mean grouped output over records whose label belongs to group `group`.
std::vector<double> group_conditional_confidence(const Dataset& dataset, const GroupingLens& grouping,
                                                 std::size_t group);

/// Population mean and standard deviation (two-pass).
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(std::span<const double> values);

}  // namespace gece
