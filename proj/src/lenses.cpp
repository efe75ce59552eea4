#include "gece/lenses.hpp"

#include "gece/detail/overloaded.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace gece {

using detail::Overloaded;

void validate_lens(const LensSpec& lens, std::size_t k) {
  std::visit(
      Overloaded{
          [](const FullLens&) {},
          [k](const TopKLens& l) {
            if (l.count < 1 || l.count > k) {
              throw Error(ErrorCode::kInvalidLensForK,
                          fmt::format("topk:{} needs 1 <= k <= {}", l.count, k));
            }
          },
          [k](const GroupingLens& l) {
            std::vector<int> seen(k, 0);
            for (const auto& group : l.groups) {
              if (group.empty()) throw Error(ErrorCode::kInvalidLensForK, "empty group");
              for (std::size_t c : group) {
                if (c >= k) {
                  throw Error(ErrorCode::kInvalidLensForK,
                              fmt::format("group member {} not in [0, {})", c, k));
                }
                if (seen[c]++) {
                  throw Error(ErrorCode::kInvalidLensForK,
                              fmt::format("class {} appears in two groups", c));
                }
              }
            }
            for (std::size_t c = 0; c < k; ++c) {
              if (!seen[c]) {
                throw Error(ErrorCode::kInvalidLensForK,
                            fmt::format("class {} is not covered by any group", c));
              }
            }
          },
          [k](const ClassConditionalLens& l) {
            if (l.cls >= k) {
              throw Error(ErrorCode::kInvalidLensForK,
                          fmt::format("class:{} not in [0, {})", l.cls, k));
            }
          },
      },
      lens);
}

std::size_t lensed_dimension(const LensSpec& lens, std::size_t k) {
  return std::visit(Overloaded{
                        [k](const FullLens&) { return k; },
                        [](const TopKLens& l) { return l.count; },
                        [](const GroupingLens& l) { return l.groups.size(); },
                        [](const ClassConditionalLens&) { return std::size_t{1}; },
                    },
                    lens);
}

namespace {

LensedPair apply_impl(const LensSpec& lens, std::span<const double> g,
                      std::span<const double> y) {
  LensedPair out;
  std::visit(Overloaded{
                 [&](const FullLens&) {
                   out.output.assign(g.begin(), g.end());
                   out.target.assign(y.begin(), y.end());
                 },
                 [&](const TopKLens& l) {
                   const auto order = descending_order(g);
                   out.output.reserve(l.count);
                   out.target.reserve(l.count);
                   for (std::size_t j = 0; j < l.count; ++j) {
                     out.output.push_back(g[order[j]]);
                     out.target.push_back(y[order[j]]);
                   }
                 },
                 [&](const GroupingLens& l) {
                   out.output.reserve(l.groups.size());
                   out.target.reserve(l.groups.size());
                   for (const auto& group : l.groups) {
                     // Seed with the first member so singleton groups copy bits exactly.
                     double gs = g[group.front()];
                     double ys = y[group.front()];
                     for (std::size_t j = 1; j < group.size(); ++j) {
                       gs += g[group[j]];
                       ys += y[group[j]];
                     }
                     out.output.push_back(gs);
                     out.target.push_back(ys);
                   }
                 },
                 [&](const ClassConditionalLens& l) {
                   out.output = {g[l.cls]};
                   out.target = {y[l.cls]};
                 },
             },
             lens);
  return out;
}

}  // namespace

LensedPair apply_lens(const LensSpec& lens, const ProbabilityVector& g, const TargetVector& y) {
  if (g.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "output and target lengths differ");
  }
  validate_lens(lens, g.size());
  return apply_impl(lens, g.values(), y.values());
}

LensedPair apply_lens(const LensSpec& lens, std::span<const double> g, std::size_t label) {
  std::vector<double> y(g.size(), 0.0);
  if (label >= g.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, fmt::format("label {} out of range", label));
  }
  y[label] = 1.0;
  return apply_impl(lens, g, y);
}

LensSpec make_grouping(const std::map<std::size_t, std::size_t>& group_map, std::size_t k) {
  for (const auto& [cls, group] : group_map) {
    if (cls >= k) {
      throw Error(ErrorCode::kInvalidLensForK,
                  fmt::format("group map names class {} but k = {}", cls, k));
    }
  }
  std::map<std::size_t, std::size_t> compact;  // raw group id -> position
  GroupingLens lens;
  for (std::size_t c = 0; c < k; ++c) {
    auto it = group_map.find(c);
    if (it == group_map.end()) {
      throw Error(ErrorCode::kPartialMap, fmt::format("class {} has no group", c));
    }
    auto [pos, inserted] = compact.try_emplace(it->second, lens.groups.size());
    if (inserted) lens.groups.emplace_back();
    lens.groups[pos->second].push_back(c);
  }
  return lens;
}

std::string to_string(const LensSpec& lens) {
  return std::visit(
      Overloaded{
          [](const FullLens&) { return std::string("full"); },
          [](const TopKLens& l) { return fmt::format("topk:{}", l.count); },
          [](const GroupingLens& l) {
            std::vector<std::string> parts;
            for (const auto& g : l.groups) parts.push_back(fmt::format("{}", fmt::join(g, "+")));
            return fmt::format("group:[{}]", fmt::join(parts, ","));
          },
          [](const ClassConditionalLens& l) { return fmt::format("class:{}", l.cls); },
      },
      lens);
}

}  // namespace gece
