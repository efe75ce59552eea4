#include "gece/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "gece/detail/overloaded.hpp"
#include "gece/random.hpp"

namespace gece {

using detail::Overloaded;

void validate_generator(const GeneratorSpec& spec) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidSpec, msg); };
  auto check_calibrated = [&](const CalibratedGenerator& g) {
    if (!(g.alpha > 0.0 && std::isfinite(g.alpha))) fail("Dirichlet concentration must be positive");
    if (g.num_classes < 2) fail("need at least two classes");
    if (g.size < 1) fail("need at least one record");
  };
  std::visit(Overloaded{
                 check_calibrated,
                 [&](const TwoPointBinaryGenerator& g) {
                   if (g.size < 1) fail("need at least one record");
                 },
                 [&](const SharpenedGenerator& g) {
                   check_calibrated(g.base);
                   if (!(g.inv_temp > 1.0 && std::isfinite(g.inv_temp))) {
                     fail("sharpening needs inv_temp > 1");
                   }
                 },
                 [&](const ConstantBinaryGenerator& g) {
                   if (!(g.p >= 0.0 && g.p <= 1.0)) fail("p must be in [0, 1]");
                   if (!(g.rate >= 0.0 && g.rate <= 1.0)) fail("rate must be in [0, 1]");
                   if (g.size < 1) fail("need at least one record");
                 },
             },
             spec.variant);
}

namespace {

std::vector<double> dirichlet(Rng& rng, double alpha, std::size_t k) {
  std::vector<double> g(k);
  double sum = 0.0;
  do {
    sum = 0.0;
    for (double& v : g) {
      v = rng.gamma(alpha);
      sum += v;
    }
  } while (sum <= 0.0);
  for (double& v : g) v /= sum;
  return g;
}

}  // namespace

Dataset generate(const GeneratorSpec& spec) {
  validate_generator(spec);
  Rng rng(spec.seed);
  return std::visit(
      Overloaded{
          [&](const CalibratedGenerator& g) {
            std::vector<PredictionRecord> records;
            records.reserve(g.size);
            for (std::size_t i = 0; i < g.size; ++i) {
              const auto p = dirichlet(rng, g.alpha, g.num_classes);
              records.push_back(PredictionRecord::from_probs(p, rng.categorical(p)));
            }
            return Dataset(g.num_classes, std::move(records));
          },
          [&](const TwoPointBinaryGenerator& g) {
            std::vector<PredictionRecord> records;
            records.reserve(g.size);
            for (std::size_t i = 0; i < g.size; ++i) {
              const double p = i % 2 == 0 ? 0.3 : 0.7;
              records.push_back(PredictionRecord::from_binary_score(p, rng.bernoulli(0.5) ? 1 : 0));
            }
            return Dataset(2, std::move(records));
          },
          [&](const SharpenedGenerator& g) {
            const std::size_t k = g.base.num_classes;
            std::vector<PredictionRecord> records;
            records.reserve(g.base.size);
            std::vector<double> logits(k);
            for (std::size_t i = 0; i < g.base.size; ++i) {
              const auto p = dirichlet(rng, g.base.alpha, k);
              const std::size_t label = rng.categorical(p);
              for (std::size_t c = 0; c < k; ++c) {
                logits[c] = g.inv_temp * std::log(std::max(p[c], 1e-300));
              }
              records.push_back(PredictionRecord::from_probs(softmax(logits).values(), label));
            }
            return Dataset(k, std::move(records));
          },
          [&](const ConstantBinaryGenerator& g) {
            std::vector<PredictionRecord> records;
            records.reserve(g.size);
            for (std::size_t i = 0; i < g.size; ++i) {
              records.push_back(
                  PredictionRecord::from_binary_score(g.p, rng.bernoulli(g.rate) ? 1 : 0));
            }
            return Dataset(2, std::move(records));
          },
      },
      spec.variant);
}

std::string to_string(const GeneratorVariant& variant) {
  return std::visit(
      Overloaded{
          [](const CalibratedGenerator& g) {
            return fmt::format("calibrated:{}:{}:{}", g.alpha, g.num_classes, g.size);
          },
          [](const TwoPointBinaryGenerator& g) { return fmt::format("two-point:{}", g.size); },
          [](const SharpenedGenerator& g) {
            return fmt::format("sharpened:{}:{}:{}:{}", g.base.alpha, g.base.num_classes,
                               g.base.size, g.inv_temp);
          },
          [](const ConstantBinaryGenerator& g) {
            return fmt::format("constant:{}:{}:{}", g.p, g.rate, g.size);
          },
      },
      variant);
}

// ---------------------------------------------------------------------------
// Reference implementation. Everything below recomputes the estimator from the
// definitions with deliberately plain loops.

namespace {

struct OraclePoint {
  std::size_t index;
  std::vector<double> out;
  std::vector<double> tgt;
};

bool oracle_keep(const SelectorSpec& selector, const PredictionRecord& r) {
  const auto& g = r.probs();
  for (const auto& term : selector.terms) {
    if (std::holds_alternative<SelectAll>(term)) continue;
    if (const auto* t = std::get_if<LabelEquals>(&term)) {
      if (r.label() != t->cls) return false;
      continue;
    }
    if (const auto* t = std::get_if<LabelInGroup>(&term)) {
      bool found = false;
      for (std::size_t c : t->classes) found = found || c == r.label();
      if (!found) return false;
      continue;
    }
    const auto& t = std::get<OutputCompare>(term);
    double v = 0.0;
    if (t.projection == Projection::kMaxProb) {
      v = g[0];
      for (std::size_t c = 1; c < g.size(); ++c) v = g[c] > v ? g[c] : v;
    } else if (t.projection == Projection::kClassProb) {
      v = g[t.cls];
    } else {
      v = g[1];
    }
    bool ok = false;
    switch (t.comparator) {
      case Comparator::kLess: ok = v < t.threshold; break;
      case Comparator::kLessEqual: ok = v <= t.threshold; break;
      case Comparator::kGreater: ok = v > t.threshold; break;
      case Comparator::kGreaterEqual: ok = v >= t.threshold; break;
      case Comparator::kEqual: ok = std::fabs(v - t.threshold) <= 1e-9; break;
    }
    if (!ok) return false;
  }
  return true;
}

OraclePoint oracle_lens(const LensSpec& lens, const PredictionRecord& r, std::size_t index) {
  const std::size_t k = r.num_classes();
  OraclePoint pt{index, {}, {}};
  auto y = [&](std::size_t c) { return c == r.label() ? 1.0 : 0.0; };
  const auto& g = r.probs();
  if (std::holds_alternative<FullLens>(lens)) {
    for (std::size_t c = 0; c < k; ++c) {
      pt.out.push_back(g[c]);
      pt.tgt.push_back(y(c));
    }
  } else if (const auto* top = std::get_if<TopKLens>(&lens)) {
    // Selection sort: repeatedly take the largest remaining, lowest index on ties.
    std::vector<bool> used(k, false);
    for (std::size_t j = 0; j < top->count; ++j) {
      std::size_t best = k;
      for (std::size_t c = 0; c < k; ++c) {
        if (used[c]) continue;
        if (best == k || g[c] > g[best]) best = c;
      }
      used[best] = true;
      pt.out.push_back(g[best]);
      pt.tgt.push_back(y(best));
    }
  } else if (const auto* grp = std::get_if<GroupingLens>(&lens)) {
    for (const auto& group : grp->groups) {
      double go = g[group[0]];
      double yo = y(group[0]);
      for (std::size_t j = 1; j < group.size(); ++j) {
        go += g[group[j]];
        yo += y(group[j]);
      }
      pt.out.push_back(go);
      pt.tgt.push_back(yo);
    }
  } else {
    const std::size_t c = std::get<ClassConditionalLens>(lens).cls;
    pt.out.push_back(g[c]);
    pt.tgt.push_back(y(c));
  }
  return pt;
}

double oracle_distance(const DistanceSpec& spec, const std::vector<double>& g,
                       const std::vector<double>& y) {
  const std::size_t n = g.size();
  if (std::holds_alternative<TvdDistance>(spec)) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(g[i] - y[i]);
    return n == 1 ? s : s / 2.0;
  }
  if (std::holds_alternative<L2Distance>(spec)) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (g[i] - y[i]) * (g[i] - y[i]);
    return std::sqrt(s);
  }
  if (const auto* iv = std::get_if<InterIntervalDistance>(&spec)) {
    const double below = iv->lower - y[0];
    const double above = y[0] - iv->upper;
    if (below > 0.0) return below;
    if (above > 0.0) return above;
    return 0.0;
  }
  const auto& w = std::get<WeightedDistance>(spec);
  const auto m = w.matrix();
  double q = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) q += (g[r] - y[r]) * m[r * n + c] * (g[c] - y[c]);
  }
  return q > 0.0 ? std::sqrt(q) : 0.0;
}

void oracle_split(std::vector<OraclePoint> pts, std::size_t depth, std::size_t capacity,
                  std::vector<std::vector<OraclePoint>>& leaves) {
  if (pts.size() <= capacity) {
    leaves.push_back(std::move(pts));
    return;
  }
  const std::size_t axis = depth % pts[0].out.size();
  std::stable_sort(pts.begin(), pts.end(), [&](const OraclePoint& a, const OraclePoint& b) {
    if (a.out[axis] != b.out[axis]) return a.out[axis] < b.out[axis];
    return a.index < b.index;
  });
  const std::size_t left_size = (pts.size() + 1) / 2;
  std::vector<OraclePoint> left(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(left_size));
  std::vector<OraclePoint> right(pts.begin() + static_cast<std::ptrdiff_t>(left_size), pts.end());
  oracle_split(std::move(left), depth + 1, capacity, leaves);
  oracle_split(std::move(right), depth + 1, capacity, leaves);
}

}  // namespace

double oracle_gece(const Dataset& dataset, const LensSpec& lens, const SelectorSpec& selector,
                   const DistanceSpec& distance, const BinningSpec& binning) {
  validate_lens(lens, dataset.num_classes());
  validate_selector(selector, dataset.num_classes());
  std::vector<OraclePoint> pts;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (oracle_keep(selector, dataset[i])) pts.push_back(oracle_lens(lens, dataset[i], pts.size()));
  }
  if (pts.empty()) throw Error(ErrorCode::kEmptySelection, "oracle: nothing selected");
  const std::size_t dim = pts[0].out.size();
  if (std::holds_alternative<InterIntervalDistance>(distance) && dim != 1) {
    throw Error(ErrorCode::kDistanceLensMismatch, "oracle: interval distance on k' > 1");
  }

  std::vector<std::vector<OraclePoint>> groups;
  if (const auto* u = std::get_if<UniformBinning>(&binning)) {
    std::map<std::vector<long>, std::vector<OraclePoint>> cells;
    for (const auto& p : pts) {
      std::vector<long> key;
      for (double x : p.out) {
        long cell = 0;
        if (x >= u->upper) {
          cell = static_cast<long>(u->bins) - 1;
        } else if (x > u->lower) {
          cell = static_cast<long>(std::floor((x - u->lower) / (u->upper - u->lower) *
                                              static_cast<double>(u->bins)));
          if (cell > static_cast<long>(u->bins) - 1) cell = static_cast<long>(u->bins) - 1;
        }
        key.push_back(cell);
      }
      cells[key].push_back(p);
    }
    for (auto& [key, members] : cells) groups.push_back(std::move(members));
  } else {
    const double gamma = std::get<AdaptiveBinning>(binning).gamma;
    std::size_t capacity = 1;
    while (static_cast<double>(capacity) < gamma * static_cast<double>(pts.size()) - 1e-9) {
      ++capacity;
    }
    oracle_split(pts, 0, capacity, groups);
  }

  double total = 0.0;
  for (const auto& members : groups) {
    std::vector<double> g(dim, 0.0);
    std::vector<double> y(dim, 0.0);
    for (const auto& p : members) {
      for (std::size_t d = 0; d < dim; ++d) {
        g[d] += p.out[d];
        y[d] += p.tgt[d];
      }
    }
    for (std::size_t d = 0; d < dim; ++d) {
      g[d] /= static_cast<double>(members.size());
      y[d] /= static_cast<double>(members.size());
    }
    total += static_cast<double>(members.size()) / static_cast<double>(pts.size()) *
             oracle_distance(distance, g, y);
  }
  return total;
}

}  // namespace gece
