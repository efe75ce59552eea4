#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "gece/core.hpp"

namespace gece {

enum class Projection {
  kMaxProb,       // max_i g[i]
  kClassProb,     // g[cls]
  kScalarBinary,  // g[1] of a two-class problem
};

enum class Comparator { kLess, kLessEqual, kGreater, kGreaterEqual, kEqual };

// Tolerance of the `=` comparator on real-valued outputs.
inline constexpr double kEqualityTolerance = 1e-9;

struct SelectAll {
  bool operator==(const SelectAll&) const = default;
};
struct LabelEquals {
  std::size_t cls = 0;
  bool operator==(const LabelEquals&) const = default;
};
struct LabelInGroup {
  std::vector<std::size_t> classes;
  bool operator==(const LabelInGroup&) const = default;
};
struct OutputCompare {
  Projection projection = Projection::kMaxProb;
  std::size_t cls = 0;  // used by kClassProb only
  Comparator comparator = Comparator::kGreaterEqual;
  double threshold = 0.0;
  bool operator==(const OutputCompare&) const = default;
};

using SelectorTerm = std::variant<SelectAll, LabelEquals, LabelInGroup, OutputCompare>;

/// Conjunction of terms. An empty term list is not a valid selector; use
/// SelectorSpec::all().
struct SelectorSpec {
  std::vector<SelectorTerm> terms;

  static SelectorSpec all() { return {{SelectAll{}}}; }
  bool operator==(const SelectorSpec&) const = default;
};

void validate_selector(const SelectorSpec& selector, std::size_t k);

bool matches(const SelectorSpec& selector, const PredictionRecord& record);

/// Order-preserving subset of `dataset`. An empty result is returned as is.
Dataset select(const SelectorSpec& selector, const Dataset& dataset);

double project(Projection projection, std::size_t cls, const ProbabilityVector& g);

std::string to_string(const SelectorSpec& selector);

}  // namespace gece
