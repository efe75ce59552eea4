#include "gece/spec_text.hpp"

#include <charconv>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "gece/io.hpp"

namespace gece {

namespace {

[[noreturn]] void bad(std::string_view what, std::string_view text) {
  throw Error(ErrorCode::kInvalidSpec, fmt::format("{} '{}'", what, text));
}

std::vector<std::string_view> fields(std::string_view text, char sep = ':') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Everything after the first ':' (paths may contain ':').
std::string_view tail(std::string_view text) {
  const auto pos = text.find(':');
  return pos == std::string_view::npos ? std::string_view{} : text.substr(pos + 1);
}

}  // namespace

double parse_real(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) bad("not a number:", text);
  return v;
}

std::size_t parse_count(std::string_view text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    bad("not a non-negative integer:", text);
  }
  return v;
}

LensSpec parse_lens(std::string_view text, std::size_t k) {
  const auto f = fields(text);
  LensSpec lens;
  if (text == "full") {
    lens = FullLens{};
  } else if (f[0] == "topk" && f.size() == 2) {
    lens = TopKLens{parse_count(f[1])};
  } else if (f[0] == "class" && f.size() == 2) {
    lens = ClassConditionalLens{parse_count(f[1])};
  } else if (f[0] == "group" && !tail(text).empty()) {
    return load_group_map(std::string(tail(text)), k);
  } else {
    bad("unknown lens", text);
  }
  try {
    validate_lens(lens, k);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidSpec, fmt::format("lens '{}': {}", text, e.what()));
  }
  return lens;
}

SelectorSpec parse_selector(std::string_view text) {
  SelectorSpec spec;
  for (std::string_view raw : fields(text, ',')) {
    const auto first = raw.find_first_not_of(' ');
    if (first == std::string_view::npos) bad("empty selector term in", text);
    const std::string_view term = raw.substr(first, raw.find_last_not_of(' ') - first + 1);

    if (term == "all") {
      spec.terms.emplace_back(SelectAll{});
      continue;
    }
    if (term.starts_with("label-in=")) {
      spec.terms.emplace_back(LabelInGroup{{parse_count(term.substr(9))}});
      continue;
    }
    if (term.find_first_not_of("0123456789") == std::string_view::npos) {
      auto* group = spec.terms.empty() ? nullptr : std::get_if<LabelInGroup>(&spec.terms.back());
      if (!group) bad("bare class index outside label-in in", text);
      group->classes.push_back(parse_count(term));
      continue;
    }
    if (term.starts_with("label=")) {
      spec.terms.emplace_back(LabelEquals{parse_count(term.substr(6))});
      continue;
    }

    const auto op_pos = term.find_first_of("<>=");
    if (op_pos == std::string_view::npos || op_pos == 0) bad("unknown selector term", term);
    const std::string_view lhs = term.substr(0, op_pos);
    std::string_view rest = term.substr(op_pos);
    OutputCompare cmp;
    if (lhs == "maxprob") {
      cmp.projection = Projection::kMaxProb;
    } else if (lhs == "score") {
      cmp.projection = Projection::kScalarBinary;
    } else if (lhs.size() > 1 && lhs[0] == 'p') {
      cmp.projection = Projection::kClassProb;
      cmp.cls = parse_count(lhs.substr(1));
    } else {
      bad("unknown projection in", term);
    }
    if (rest.starts_with("<=")) {
      cmp.comparator = Comparator::kLessEqual;
      rest.remove_prefix(2);
    } else if (rest.starts_with(">=")) {
      cmp.comparator = Comparator::kGreaterEqual;
      rest.remove_prefix(2);
    } else if (rest.starts_with("==")) {
      cmp.comparator = Comparator::kEqual;
      rest.remove_prefix(2);
    } else if (rest.starts_with('<')) {
      cmp.comparator = Comparator::kLess;
      rest.remove_prefix(1);
    } else if (rest.starts_with('>')) {
      cmp.comparator = Comparator::kGreater;
      rest.remove_prefix(1);
    } else {
      cmp.comparator = Comparator::kEqual;
      rest.remove_prefix(1);
    }
    cmp.threshold = parse_real(rest);
    if (!(cmp.threshold >= 0.0 && cmp.threshold <= 1.0)) bad("threshold outside [0, 1] in", term);
    spec.terms.emplace_back(cmp);
  }
  return spec;
}

DistanceSpec parse_distance(std::string_view text) {
  const auto f = fields(text);
  if (text == "tvd") return TvdDistance{};
  if (text == "l2") return L2Distance{};
  if (f[0] == "interval" && f.size() == 3) {
    DistanceSpec d = InterIntervalDistance{parse_real(f[1]), parse_real(f[2])};
    try {
      validate_distance(d);
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidSpec, fmt::format("distance '{}': {}", text, e.what()));
    }
    return d;
  }
  if (f[0] == "weighted" && !tail(text).empty()) return load_weight_matrix(std::string(tail(text)));
  bad("unknown distance", text);
}

BinningSpec parse_binning(std::string_view text) {
  const auto f = fields(text);
  BinningSpec spec;
  if (f[0] == "uniform" && f.size() == 2) {
    spec = UniformBinning{parse_count(f[1]), 0.0, 1.0};
  } else if (f[0] == "uniform" && f.size() == 4) {
    spec = UniformBinning{parse_count(f[1]), parse_real(f[2]), parse_real(f[3])};
  } else if (f[0] == "adaptive" && f.size() == 2) {
    spec = AdaptiveBinning{parse_real(f[1])};
  } else {
    bad("unknown binning", text);
  }
  try {
    validate_binning(spec);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidSpec, fmt::format("binning '{}': {}", text, e.what()));
  }
  return spec;
}

GeneratorVariant parse_generator(std::string_view text) {
  const auto f = fields(text);
  GeneratorVariant v;
  if (f[0] == "calibrated" && f.size() == 4) {
    v = CalibratedGenerator{parse_real(f[1]), parse_count(f[2]), parse_count(f[3])};
  } else if (f[0] == "two-point" && f.size() == 2) {
    v = TwoPointBinaryGenerator{parse_count(f[1])};
  } else if (f[0] == "sharpened" && f.size() == 5) {
    v = SharpenedGenerator{{parse_real(f[1]), parse_count(f[2]), parse_count(f[3])}, parse_real(f[4])};
  } else if (f[0] == "constant" && f.size() == 4) {
    v = ConstantBinaryGenerator{parse_real(f[1]), parse_real(f[2]), parse_count(f[3])};
  } else {
    bad("unknown generator", text);
  }
  try {
    validate_generator({v, 0});
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidSpec, fmt::format("generator '{}': {}", text, e.what()));
  }
  return v;
}

}  // namespace gece
