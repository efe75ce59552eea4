#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gece/core.hpp"

namespace gece {

/// Identity lens: outputs and targets pass through unchanged (k' = k).
struct FullLens {
  bool operator==(const FullLens&) const = default;
};

/// The `count` largest outputs in descending order, paired with the targets at
/// those class indices. Equal outputs are ordered by lower class index first.
struct TopKLens {
  std::size_t count = 1;
  bool operator==(const TopKLens&) const = default;
};

/// Sums outputs and targets over each group of classes. Groups partition the
/// class indices and are kept in first-appearance order.
struct GroupingLens {
  std::vector<std::vector<std::size_t>> groups;
  bool operator==(const GroupingLens&) const = default;
};

/// The single output/target coordinate for one class (k' = 1).
struct ClassConditionalLens {
  std::size_t cls = 0;
  bool operator==(const ClassConditionalLens&) const = default;
};

using LensSpec = std::variant<FullLens, TopKLens, GroupingLens, ClassConditionalLens>;

struct LensedPair {
  std::vector<double> output;
  std::vector<double> target;
};

/// Throws InvalidLensForK when `lens` is not defined for k classes.
void validate_lens(const LensSpec& lens, std::size_t k);

/// Dimension k' of the lensed space for a k-class problem.
std::size_t lensed_dimension(const LensSpec& lens, std::size_t k);

LensedPair apply_lens(const LensSpec& lens, const ProbabilityVector& g, const TargetVector& y);

// Same as above with the one-hot target implied by `label`.
LensedPair apply_lens(const LensSpec& lens, std::span<const double> g, std::size_t label);

/// Builds a grouping lens from a class -> group assignment. Group ids need not
/// be contiguous; they are compacted in order of first appearance over classes
/// 0..k-1.
LensSpec make_grouping(const std::map<std::size_t, std::size_t>& group_map, std::size_t k);

std::string to_string(const LensSpec& lens);

}  // namespace gece
