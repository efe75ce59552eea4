#include "gece/selectors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "gece/detail/overloaded.hpp"

namespace gece {

using detail::Overloaded;

namespace {

void check_class(std::size_t cls, std::size_t k) {
  if (cls >= k) {
    throw Error(ErrorCode::kInvalidClassIndex, fmt::format("class {} not in [0, {})", cls, k));
  }
}

bool compare(double value, Comparator cmp, double threshold) {
  switch (cmp) {
    case Comparator::kLess: return value < threshold;
    case Comparator::kLessEqual: return value <= threshold;
    case Comparator::kGreater: return value > threshold;
    case Comparator::kGreaterEqual: return value >= threshold;
    case Comparator::kEqual: return std::abs(value - threshold) <= kEqualityTolerance;
  }
  return false;
}

std::string_view symbol(Comparator cmp) {
  switch (cmp) {
    case Comparator::kLess: return "<";
    case Comparator::kLessEqual: return "<=";
    case Comparator::kGreater: return ">";
    case Comparator::kGreaterEqual: return ">=";
    case Comparator::kEqual: return "=";
  }
  return "?";
}

}  // namespace

double project(Projection projection, std::size_t cls, const ProbabilityVector& g) {
  switch (projection) {
    case Projection::kMaxProb: return *std::max_element(g.values().begin(), g.values().end());
    case Projection::kClassProb: return g[cls];
    case Projection::kScalarBinary: return g[1];
  }
  return 0.0;
}

void validate_selector(const SelectorSpec& selector, std::size_t k) {
  if (selector.terms.empty()) {
    throw Error(ErrorCode::kInvalidSelector, "empty conjunction");
  }
  for (const auto& term : selector.terms) {
    std::visit(Overloaded{
                   [](const SelectAll&) {},
                   [k](const LabelEquals& t) { check_class(t.cls, k); },
                   [k](const LabelInGroup& t) {
                     if (t.classes.empty()) {
                       throw Error(ErrorCode::kInvalidSelector, "label-in needs classes");
                     }
                     for (std::size_t c : t.classes) check_class(c, k);
                   },
                   [k](const OutputCompare& t) {
                     if (!(t.threshold >= 0.0 && t.threshold <= 1.0)) {
                       throw Error(ErrorCode::kInvalidSelector,
                                   fmt::format("threshold {} outside [0, 1]", t.threshold));
                     }
                     if (t.projection == Projection::kClassProb) check_class(t.cls, k);
                     if (t.projection == Projection::kScalarBinary && k != 2) {
                       throw Error(ErrorCode::kInvalidSelector,
                                   fmt::format("score projection needs k = 2, got {}", k));
                     }
                   },
               },
               term);
  }
}

bool matches(const SelectorSpec& selector, const PredictionRecord& record) {
  for (const auto& term : selector.terms) {
    const bool ok = std::visit(
        Overloaded{
            [](const SelectAll&) { return true; },
            [&](const LabelEquals& t) { return record.label() == t.cls; },
            [&](const LabelInGroup& t) {
              return std::find(t.classes.begin(), t.classes.end(), record.label()) !=
                     t.classes.end();
            },
            [&](const OutputCompare& t) {
              return compare(project(t.projection, t.cls, record.probs()), t.comparator,
                             t.threshold);
            },
        },
        term);
    if (!ok) return false;
  }
  return true;
}

Dataset select(const SelectorSpec& selector, const Dataset& dataset) {
  validate_selector(selector, dataset.num_classes());
  std::vector<PredictionRecord> kept;
  for (const auto& record : dataset.records()) {
    if (matches(selector, record)) kept.push_back(record);
  }
  return dataset.with_records(std::move(kept));
}

std::string to_string(const SelectorSpec& selector) {
  std::vector<std::string> parts;
  for (const auto& term : selector.terms) {
    parts.push_back(std::visit(
        Overloaded{
            [](const SelectAll&) { return std::string("all"); },
            [](const LabelEquals& t) { return fmt::format("label={}", t.cls); },
            [](const LabelInGroup& t) { return fmt::format("label-in={}", fmt::join(t.classes, ",")); },
            [](const OutputCompare& t) {
              std::string lhs;
              switch (t.projection) {
                case Projection::kMaxProb: lhs = "maxprob"; break;
                case Projection::kClassProb: lhs = fmt::format("p{}", t.cls); break;
                case Projection::kScalarBinary: lhs = "score"; break;
              }
              return fmt::format("{}{}{}", lhs, symbol(t.comparator), t.threshold);
            },
        },
        term));
  }
  return fmt::format("{}", fmt::join(parts, ","));
}

}  // namespace gece
