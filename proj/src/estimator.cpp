#include "gece/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "gece/detail/overloaded.hpp"

namespace gece {

using detail::Overloaded;

void validate_binning(const BinningSpec& spec) {
  std::visit(Overloaded{
                 [](const UniformBinning& u) {
                   if (u.bins < 1) throw Error(ErrorCode::kInvalidBinning, "uniform needs b >= 1");
                   if (!(u.lower < u.upper) || !std::isfinite(u.lower) || !std::isfinite(u.upper)) {
                     throw Error(ErrorCode::kInvalidBinning,
                                 fmt::format("uniform range [{}, {}] is empty", u.lower, u.upper));
                   }
                 },
                 [](const AdaptiveBinning& a) {
                   if (!(a.gamma > 0.0 && a.gamma <= 1.0)) {
                     throw Error(ErrorCode::kInvalidBinning,
                                 fmt::format("adaptive gamma {} not in (0, 1]", a.gamma));
                   }
                 },
             },
             spec);
}

std::string to_string(const BinningSpec& spec) {
  return std::visit(Overloaded{
                        [](const UniformBinning& u) {
                          if (u.lower == 0.0 && u.upper == 1.0) {
                            return fmt::format("uniform:{}", u.bins);
                          }
                          return fmt::format("uniform:{}:{}:{}", u.bins, u.lower, u.upper);
                        },
                        [](const AdaptiveBinning& a) { return fmt::format("adaptive:{}", a.gamma); },
                    },
                    spec);
}

void LensedPoints::push_back(const LensedPair& pair) {
  if (pair.output.size() != dim_ || pair.target.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "lensed pair has the wrong dimension");
  }
  outputs_.insert(outputs_.end(), pair.output.begin(), pair.output.end());
  targets_.insert(targets_.end(), pair.target.begin(), pair.target.end());
}

LensedPoints LensedPoints::gather(std::span<const std::size_t> indices) const {
  LensedPoints out(dim_);
  out.outputs_.reserve(indices.size() * dim_);
  out.targets_.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    const auto o = output(i);
    const auto t = target(i);
    out.outputs_.insert(out.outputs_.end(), o.begin(), o.end());
    out.targets_.insert(out.targets_.end(), t.begin(), t.end());
  }
  return out;
}

LensedPoints lens_dataset(const Dataset& dataset, const LensSpec& lens) {
  validate_lens(lens, dataset.num_classes());
  LensedPoints points(lensed_dimension(lens, dataset.num_classes()));
  for (const auto& record : dataset.records()) {
    points.push_back(apply_lens(lens, record.probs().values(), record.label()));
  }
  return points;
}

namespace {

// Means are accumulated over members sorted by (output, target, index), so a
// bin's statistics depend only on the multiset of its points, not on the order
// records arrived in.
void fill_means(const LensedPoints& points, Bin& bin) {
  std::vector<std::size_t> order = bin.members;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto oa = points.output(a), ob = points.output(b);
    if (!std::equal(oa.begin(), oa.end(), ob.begin())) {
      return std::lexicographical_compare(oa.begin(), oa.end(), ob.begin(), ob.end());
    }
    const auto ta = points.target(a), tb = points.target(b);
    if (!std::equal(ta.begin(), ta.end(), tb.begin())) {
      return std::lexicographical_compare(ta.begin(), ta.end(), tb.begin(), tb.end());
    }
    return a < b;
  });
  const std::size_t dim = points.dim();
  bin.mean_output.assign(dim, 0.0);
  bin.mean_target.assign(dim, 0.0);
  for (std::size_t i : order) {
    const auto o = points.output(i);
    const auto t = points.target(i);
    for (std::size_t d = 0; d < dim; ++d) {
      bin.mean_output[d] += o[d];
      bin.mean_target[d] += t[d];
    }
  }
  const double n = static_cast<double>(order.size());
  for (std::size_t d = 0; d < dim; ++d) {
    bin.mean_output[d] /= n;
    bin.mean_target[d] /= n;
  }
}

std::size_t uniform_cell(double x, std::size_t bins, double lower, double upper) {
  if (x <= lower) return 0;
  if (x >= upper) return bins - 1;
  const auto cell = static_cast<std::size_t>(std::floor((x - lower) / (upper - lower) *
                                                        static_cast<double>(bins)));
  return std::min(cell, bins - 1);
}

}  // namespace

Binning bin_uniform(const LensedPoints& points, std::size_t bins, double lower, double upper) {
  validate_binning(UniformBinning{bins, lower, upper});
  const std::size_t dim = points.dim();
  const double width = (upper - lower) / static_cast<double>(bins);
  std::map<std::vector<std::size_t>, std::vector<std::size_t>> cells;
  std::vector<std::size_t> key(dim);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto o = points.output(i);
    for (std::size_t d = 0; d < dim; ++d) key[d] = uniform_cell(o[d], bins, lower, upper);
    cells[key].push_back(i);
  }
  Binning binning;
  binning.num_points = points.size();
  binning.bins.reserve(cells.size());
  for (auto& [cell, members] : cells) {
    Bin bin;
    bin.members = std::move(members);
    bin.region.lower.resize(dim);
    bin.region.upper.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      bin.region.lower[d] = lower + static_cast<double>(cell[d]) * width;
      bin.region.upper[d] = cell[d] + 1 == bins ? upper : lower + static_cast<double>(cell[d] + 1) * width;
    }
    fill_means(points, bin);
    binning.bins.push_back(std::move(bin));
  }
  return binning;
}

std::size_t adaptive_capacity(double gamma, std::size_t num_points) {
  // The epsilon keeps gamma = 1/N from rounding up to a capacity of 2.
  const double raw = std::ceil(gamma * static_cast<double>(num_points) - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(raw));
}

namespace {

struct KdBuilder {
  const LensedPoints& points;
  std::size_t capacity;
  Binning& out;

  void build(std::vector<std::size_t>::iterator begin, std::vector<std::size_t>::iterator end,
             std::size_t depth, Box box) {
    const auto n = static_cast<std::size_t>(end - begin);
    if (n <= capacity) {
      Bin bin;
      bin.members.assign(begin, end);
      std::sort(bin.members.begin(), bin.members.end());
      bin.region = std::move(box);
      fill_means(points, bin);
      out.bins.push_back(std::move(bin));
      return;
    }
    const std::size_t axis = depth % points.dim();
    const auto less = [&](std::size_t a, std::size_t b) {
      const double va = points.output(a)[axis];
      const double vb = points.output(b)[axis];
      return va < vb || (va == vb && a < b);
    };
    const auto median = begin + static_cast<std::ptrdiff_t>((n - 1) / 2);
    std::nth_element(begin, median, end, less);
    const double split = points.output(*median)[axis];
    Box left = box;
    Box right = std::move(box);
    left.upper[axis] = split;
    right.lower[axis] = split;
    build(begin, median + 1, depth + 1, std::move(left));
    build(median + 1, end, depth + 1, std::move(right));
  }
};

}  // namespace

Binning bin_adaptive(const LensedPoints& points, double gamma) {
  validate_binning(AdaptiveBinning{gamma});
  Binning binning;
  binning.num_points = points.size();
  if (points.size() == 0) return binning;
  std::vector<std::size_t> index(points.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  Box root{std::vector<double>(points.dim(), 0.0), std::vector<double>(points.dim(), 1.0)};
  KdBuilder builder{points, adaptive_capacity(gamma, points.size()), binning};
  builder.build(index.begin(), index.end(), 0, std::move(root));
  return binning;
}

Binning make_binning(const BinningSpec& spec, const LensedPoints& points) {
  return std::visit(Overloaded{
                        [&](const UniformBinning& u) {
                          return bin_uniform(points, u.bins, u.lower, u.upper);
                        },
                        [&](const AdaptiveBinning& a) { return bin_adaptive(points, a.gamma); },
                    },
                    spec);
}

MetricResult gece(const Dataset& dataset, const LensSpec& lens, const SelectorSpec& selector,
                  const DistanceSpec& distance_spec, const BinningSpec& binning_spec) {
  validate_lens(lens, dataset.num_classes());
  validate_binning(binning_spec);
  const std::size_t dim = lensed_dimension(lens, dataset.num_classes());
  try {
    check_distance_dimension(distance_spec, dim);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidDistance) throw;
    throw Error(ErrorCode::kDistanceLensMismatch,
                fmt::format("{} cannot be used with {}: {}", to_string(distance_spec),
                            to_string(lens), e.what()));
  }

  const Dataset selected = select(selector, dataset);
  if (selected.empty()) {
    throw Error(ErrorCode::kEmptySelection,
                fmt::format("selector '{}' keeps no records", to_string(selector)));
  }
  MetricResult result = gece_points(lens_dataset(selected, lens), distance_spec, binning_spec);
  result.config = {to_string(lens), to_string(selector), to_string(distance_spec),
                   to_string(binning_spec), std::nullopt};
  return result;
}

MetricResult gece_points(const LensedPoints& points, const DistanceSpec& distance_spec,
                         const BinningSpec& binning_spec) {
  if (points.size() == 0) throw Error(ErrorCode::kEmptySelection, "no points to bin");
  const Binning binning = make_binning(binning_spec, points);
  MetricResult result;
  result.n_selected = points.size();
  result.config.distance = to_string(distance_spec);
  result.config.binning = to_string(binning_spec);
  const double n = static_cast<double>(points.size());
  for (const Bin& bin : binning.bins) {
    BinResult br;
    br.count = bin.members.size();
    br.mean_output = bin.mean_output;
    br.mean_target = bin.mean_target;
    br.distance = distance(distance_spec, bin.mean_output, bin.mean_target);
    result.value += static_cast<double>(br.count) / n * br.distance;
    result.per_bin.push_back(std::move(br));
  }
  return result;
}

MetricResult traditional_ece(const Dataset& dataset) {
  return gece(dataset, TopKLens{1}, SelectorSpec::all(), TvdDistance{},
              UniformBinning{15, 0.0, 1.0});
}

}  // namespace gece
