#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "gece/core.hpp"
#include "gece/distances.hpp"
#include "gece/lenses.hpp"

namespace gece {

enum class DataFormat { kJsonl, kCsv };

/// ".csv" -> kCsv, anything else -> kJsonl.
DataFormat format_from_path(const std::filesystem::path& path);
std::optional<DataFormat> parse_format(std::string_view name);

/// Reads prediction records.
///
/// JSONL: one object per line with an integer `label` and `probs` and/or
/// `logits` arrays; a binary record may give `score` (class-1 probability)
/// instead. Blank lines are skipped.
///
/// CSV: a header naming `label` plus either `p0..p{k-1}`, `z0..z{k-1}`, both,
/// or a single `score` column.
///
/// Probabilities are checked against kIngestTolerance and renormalized.
/// Errors carry the 1-based line number.
Dataset read_predictions(std::istream& in, DataFormat format, const std::string& source = "<stream>");
Dataset load_predictions(const std::filesystem::path& path, std::optional<DataFormat> format = {});

/// Writes probabilities (and logits when every record has them) with enough
/// digits to round-trip exactly.
void write_predictions(std::ostream& out, const Dataset& dataset, DataFormat format);
void save_predictions(const std::filesystem::path& path, const Dataset& dataset,
                      std::optional<DataFormat> format = {});

/// Two-column CSV `class_index,group_index`; a header row is optional.
GroupingLens load_group_map(const std::filesystem::path& path, std::size_t k);

/// Square matrix, one row per line, comma separated.
WeightedDistance load_weight_matrix(const std::filesystem::path& path);

/// 17 significant digits.
std::string format_double(double value);

/// Reads a whole file; throws Error(kIo) when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace gece
