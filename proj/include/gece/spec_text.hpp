#pragma once

#include <cstddef>
#include <string_view>

#include "gece/distances.hpp"
#include "gece/estimator.hpp"
#include "gece/lenses.hpp"
#include "gece/selectors.hpp"
#include "gece/synth.hpp"

// Textual forms used by the CLI and config files. Malformed text throws
// Error(kInvalidSpec) naming the offending input.
namespace gece {

/// `full`, `topk:5`, `class:12`, `group:<path to class,group CSV>`.
/// `k` is needed to resolve group maps.
LensSpec parse_lens(std::string_view text, std::size_t k);

/// Comma-joined conjunction of `all`, `label=3`, `label-in=1,4,5` and
/// `<projection><op><threshold>`, where projection is `maxprob`, `p<class>` or
/// `score` (class-1 probability of a binary problem) and op is one of
/// `<`, `<=`, `>`, `>=`, `=`. Bare integers after `label-in=` extend its list.
SelectorSpec parse_selector(std::string_view text);

/// `tvd`, `l2`, `interval:<l>:<h>`, `weighted:<path to matrix CSV>`.
DistanceSpec parse_distance(std::string_view text);

/// `uniform:<b>`, `uniform:<b>:<lo>:<hi>`, `adaptive:<gamma>`.
BinningSpec parse_binning(std::string_view text);

/// `calibrated:<alpha>:<k>:<n>`, `two-point:<n>`,
/// `sharpened:<alpha>:<k>:<n>:<inv_temp>`, `constant:<p>:<rate>:<n>`.
GeneratorVariant parse_generator(std::string_view text);

double parse_real(std::string_view text);
std::size_t parse_count(std::string_view text);

}  // namespace gece
