#include "gece/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gece/detail/parallel.hpp"
#include "gece/random.hpp"

namespace gece {

std::vector<double> default_gamma_grid() {
  std::vector<double> grid;
  for (int e = 0; e <= 8; ++e) grid.push_back(std::ldexp(1.0, -e));
  return grid;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return {*lo, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

namespace {

// Selects and lenses once; resampling then works on indices into these points.
LensedPoints prepare_points(const Dataset& dataset, const LensSpec& lens,
                            const SelectorSpec& selector, const DistanceSpec& distance) {
  validate_lens(lens, dataset.num_classes());
  const std::size_t dim = lensed_dimension(lens, dataset.num_classes());
  try {
    check_distance_dimension(distance, dim);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidDistance) throw;
    throw Error(ErrorCode::kDistanceLensMismatch, e.what());
  }
  const Dataset selected = select(selector, dataset);
  if (selected.empty()) {
    throw Error(ErrorCode::kEmptySelection,
                fmt::format("selector '{}' keeps no records", to_string(selector)));
  }
  return lens_dataset(selected, lens);
}

// GECE of `draws` points drawn with replacement from `points`, one value per
// resample, in resample order.
std::vector<double> bootstrap(const LensedPoints& points, const DistanceSpec& distance,
                              double gamma, std::size_t draws, std::size_t n_resamples,
                              std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> values(n_resamples);
  detail::parallel_for(n_resamples, [&](std::size_t r) {
    Rng rng(seed, stream, r);
    std::vector<std::size_t> idx(draws);
    for (auto& i : idx) i = rng.uniform_index(points.size());
    values[r] = gece_points(points.gather(idx), distance, AdaptiveBinning{gamma}).value;
  });
  return values;
}

}  // namespace

SweepResult gamma_sweep(const Dataset& dataset, const LensSpec& lens, const SelectorSpec& selector,
                        const DistanceSpec& distance, std::span<const double> gamma_grid,
                        std::size_t n_resamples, std::uint64_t seed, double plateau_epsilon) {
  if (gamma_grid.empty()) throw Error(ErrorCode::kInvalidSpec, "empty gamma grid");
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    validate_binning(AdaptiveBinning{gamma_grid[i]});
    if (i > 0 && !(gamma_grid[i] < gamma_grid[i - 1])) {
      throw Error(ErrorCode::kInvalidSpec, "gamma grid must be strictly decreasing");
    }
  }
  if (n_resamples < 1) throw Error(ErrorCode::kInvalidSpec, "need at least one resample");

  const LensedPoints points = prepare_points(dataset, lens, selector, distance);
  SweepResult result;
  result.gammas.assign(gamma_grid.begin(), gamma_grid.end());
  result.n_resamples = n_resamples;
  result.seed = seed;
  result.plateau_epsilon = plateau_epsilon;
  result.n_points = points.size();
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    const auto values =
        bootstrap(points, distance, gamma_grid[i], points.size(), n_resamples, seed, i);
    const MeanStd ms = mean_std(values);
    result.mean_ece.push_back(ms.mean);
    result.std_ece.push_back(ms.std);
  }
  for (std::size_t i = 0; i + 1 < result.gammas.size(); ++i) {
    if (std::abs(result.mean_ece[i] - result.mean_ece[i + 1]) < plateau_epsilon) {
      result.recommended_gamma = result.gammas[i];
      result.plateau_found = true;
      break;
    }
  }
  return result;
}

VarianceProfile variance_profile(const Dataset& dataset, const LensSpec& lens,
                                 const SelectorSpec& selector, const DistanceSpec& distance,
                                 double gamma, std::span<const double> fractions,
                                 std::size_t n_resamples, std::uint64_t seed) {
  validate_binning(AdaptiveBinning{gamma});
  if (n_resamples < 1) throw Error(ErrorCode::kInvalidSpec, "need at least one resample");
  const LensedPoints points = prepare_points(dataset, lens, selector, distance);

  VarianceProfile profile;
  profile.gamma = gamma;
  profile.seed = seed;
  profile.n_resamples = n_resamples;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double f = fractions[i];
    if (!(f > 0.0 && f <= 1.0)) {
      throw Error(ErrorCode::kInvalidSpec, fmt::format("fraction {} not in (0, 1]", f));
    }
    const auto n = static_cast<std::size_t>(std::floor(f * static_cast<double>(points.size())));
    if (n == 0) {
      throw Error(ErrorCode::kFractionTooSmall,
                  fmt::format("fraction {} of {} points draws nothing", f, points.size()));
    }
    const auto values = bootstrap(points, distance, gamma, n, n_resamples, seed, i);
    const MeanStd ms = mean_std(values);
    profile.fractions.push_back(f);
    profile.sample_sizes.push_back(n);
    profile.mean_ece.push_back(ms.mean);
    profile.std_ece.push_back(ms.std);
  }
  return profile;
}

BinStats bin_stats(const Binning& binning) {
  if (binning.bins.empty()) throw Error(ErrorCode::kEmptyDataset, "binning has no bins");
  std::vector<std::size_t> sizes;
  sizes.reserve(binning.bins.size());
  for (const auto& bin : binning.bins) sizes.push_back(bin.members.size());
  std::sort(sizes.begin(), sizes.end());
  BinStats stats;
  stats.min = sizes.front();
  stats.max = sizes.back();
  const std::size_t m = sizes.size() / 2;
  stats.median = sizes.size() % 2 == 1
                     ? static_cast<double>(sizes[m])
                     : 0.5 * static_cast<double>(sizes[m - 1] + sizes[m]);
  return stats;
}

namespace {

void check_ks(std::span<const std::size_t> ks, std::size_t k) {
  for (std::size_t v : ks) {
    if (v < 1 || v > k) {
      throw Error(ErrorCode::kInvalidSpec, fmt::format("k = {} not in [1, {}]", v, k));
    }
  }
}

void require_records(const Dataset& dataset) {
  if (dataset.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset has no records");
}

}  // namespace

std::vector<double> confidence_profile(const Dataset& dataset, std::span<const std::size_t> ks) {
  check_ks(ks, dataset.num_classes());
  if (ks.empty()) return {};
  require_records(dataset);
  std::vector<double> sums(ks.size(), 0.0);
  std::vector<double> sorted;
  for (const auto& record : dataset.records()) {
    const auto p = record.probs().values();
    sorted.assign(p.begin(), p.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (std::size_t j = 0; j < ks.size(); ++j) sums[j] += sorted[ks[j] - 1];
  }
  for (double& s : sums) s /= static_cast<double>(dataset.size());
  return sums;
}

std::vector<double> topk_accuracy(const Dataset& dataset, std::span<const std::size_t> ks) {
  check_ks(ks, dataset.num_classes());
  if (ks.empty()) return {};
  require_records(dataset);
  std::vector<double> hits(ks.size(), 0.0);
  for (const auto& record : dataset.records()) {
    const auto order = descending_order(record.probs().values());
    const auto rank = static_cast<std::size_t>(
        std::find(order.begin(), order.end(), record.label()) - order.begin());
    for (std::size_t j = 0; j < ks.size(); ++j) {
      if (rank < ks[j]) hits[j] += 1.0;
    }
  }
  for (double& h : hits) h /= static_cast<double>(dataset.size());
  return hits;
}

double mean_entropy(const Dataset& dataset) {
  require_records(dataset);
  double total = 0.0;
  for (const auto& record : dataset.records()) {
    double h = 0.0;
    for (double p : record.probs().values()) {
      if (p > 0.0) h -= p * std::log(p);
    }
    total += h;
  }
  return total / static_cast<double>(dataset.size());
}

std::vector<double> group_conditional_confidence(const Dataset& dataset,
                                                 const GroupingLens& grouping, std::size_t group) {
  validate_lens(grouping, dataset.num_classes());
  if (group >= grouping.groups.size()) {
    throw Error(ErrorCode::kInvalidSpec,
                fmt::format("group {} not in [0, {})", group, grouping.groups.size()));
  }
  const Dataset members = select({{LabelInGroup{grouping.groups[group]}}}, dataset);
  if (members.empty()) {
    throw Error(ErrorCode::kEmptySelection, fmt::format("no record has a label in group {}", group));
  }
  std::vector<double> mean(grouping.groups.size(), 0.0);
  for (const auto& record : members.records()) {
    const auto lensed = apply_lens(grouping, record.probs().values(), record.label());
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += lensed.output[j];
  }
  for (double& m : mean) m /= static_cast<double>(members.size());
  return mean;
}

}  // namespace gece
