#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

#include "gece/core.hpp"
#include "gece/distances.hpp"
#include "gece/estimator.hpp"
#include "gece/lenses.hpp"
#include "gece/selectors.hpp"

namespace gece {

/// g ~ Dirichlet(alpha, ..., alpha), label ~ Categorical(g). Calibrated under
/// every lens by construction.
struct CalibratedGenerator {
  double alpha = 1.0;
  std::size_t num_classes = 3;
  std::size_t size = 1000;
  bool operator==(const CalibratedGenerator&) const = default;
};

/// Binary; even-indexed records output 0.3 for class 1, odd-indexed 0.7;
/// labels ~ Bernoulli(0.5). Its true full ECE is 0.2.
struct TwoPointBinaryGenerator {
  std::size_t size = 1000;
  bool operator==(const TwoPointBinaryGenerator&) const = default;
};

/// Draws as CalibratedGenerator, then reports softmax(inv_temp * log g) while
/// the label still follows g: an overconfident model when inv_temp > 1.
struct SharpenedGenerator {
  CalibratedGenerator base;
  double inv_temp = 2.0;
  bool operator==(const SharpenedGenerator&) const = default;
};

/// Binary; every record outputs p for class 1, labels ~ Bernoulli(rate).
struct ConstantBinaryGenerator {
  double p = 0.5;
  double rate = 0.5;
  std::size_t size = 1000;
  bool operator==(const ConstantBinaryGenerator&) const = default;
};

using GeneratorVariant = std::variant<CalibratedGenerator, TwoPointBinaryGenerator,
                                      SharpenedGenerator, ConstantBinaryGenerator>;

struct GeneratorSpec {
  GeneratorVariant variant;
  std::uint64_t seed = 0;
};

void validate_generator(const GeneratorSpec& spec);

Dataset generate(const GeneratorSpec& spec);

std::string to_string(const GeneratorVariant& variant);

/// Reference GECE written without any of the estimator's code paths: explicit
/// per-record lensing, a cell map for uniform bins and a fully sorted
/// recursive split for adaptive bins. Meant for tests on small data.
double oracle_gece(const Dataset& dataset, const LensSpec& lens, const SelectorSpec& selector,
                   const DistanceSpec& distance, const BinningSpec& binning);

}  // namespace gece
