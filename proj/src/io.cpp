#include "gece/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

namespace gece {

namespace {

using nlohmann::json;

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

Error line_error(ErrorCode code, const std::string& source, std::size_t line, const std::string& what) {
  return Error(code, fmt::format("{}:{}: {}", source, line, what));
}

double to_double(const std::string& field, const std::string& source, std::size_t line) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw line_error(ErrorCode::kParseError, source, line, fmt::format("'{}' is not a number", t));
  }
  return v;
}

std::size_t to_label(const std::string& field, const std::string& source, std::size_t line) {
  const std::string t = trim(field);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw line_error(ErrorCode::kParseError, source, line,
                     fmt::format("label '{}' is not a non-negative integer", t));
  }
  return v;
}

// Builds a record, translating core validation errors into line-tagged ones.
template <class Fn>
PredictionRecord make_record(Fn&& fn, const std::string& source, std::size_t line) {
  try {
    return fn();
  } catch (const Error& e) {
    const ErrorCode code = e.code() == ErrorCode::kIndexOutOfRange ||
                                   e.code() == ErrorCode::kInconsistentWidth ||
                                   e.code() == ErrorCode::kNonFiniteInput
                               ? e.code()
                               : ErrorCode::kSimplexViolation;
    throw line_error(code, source, line, e.what());
  }
}

void check_width(std::optional<std::size_t>& k, std::size_t width, const std::string& source,
                 std::size_t line) {
  if (!k) {
    k = width;
  } else if (*k != width) {
    throw line_error(ErrorCode::kInconsistentWidth, source, line,
                     fmt::format("{} classes, earlier rows have {}", width, *k));
  }
}

Dataset read_jsonl(std::istream& in, const std::string& source) {
  std::vector<PredictionRecord> records;
  std::optional<std::size_t> k;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    json row;
    try {
      row = json::parse(text);
    } catch (const json::exception& e) {
      throw line_error(ErrorCode::kParseError, source, line, e.what());
    }
    if (!row.is_object() || !row.contains("label") || !row["label"].is_number_integer() ||
        row["label"].get<long long>() < 0) {
      throw line_error(ErrorCode::kParseError, source, line,
                       "expected an object with a non-negative integer 'label'");
    }
    const auto label = row["label"].get<std::size_t>();
    auto read_array = [&](const char* key) -> std::optional<std::vector<double>> {
      if (!row.contains(key)) return std::nullopt;
      const json& arr = row[key];
      if (!arr.is_array()) {
        throw line_error(ErrorCode::kParseError, source, line, fmt::format("'{}' must be an array", key));
      }
      std::vector<double> v;
      for (const auto& x : arr) {
        if (!x.is_number()) {
          throw line_error(ErrorCode::kParseError, source, line,
                           fmt::format("'{}' holds a non-number", key));
        }
        v.push_back(x.get<double>());
      }
      return v;
    };
    const auto probs = read_array("probs");
    const auto logits = read_array("logits");
    if (probs && logits) {
      check_width(k, probs->size(), source, line);
      records.push_back(make_record(
          [&] { return PredictionRecord::from_both(*probs, *logits, label, kIngestTolerance); },
          source, line));
    } else if (probs) {
      check_width(k, probs->size(), source, line);
      records.push_back(make_record(
          [&] { return PredictionRecord::from_probs(*probs, label, kIngestTolerance); }, source, line));
    } else if (logits) {
      check_width(k, logits->size(), source, line);
      records.push_back(
          make_record([&] { return PredictionRecord::from_logits(*logits, label); }, source, line));
    } else if (row.contains("score") && row["score"].is_number()) {
      check_width(k, 2, source, line);
      const double p = row["score"].get<double>();
      records.push_back(make_record(
          [&] {
            const double v[2] = {1.0 - p, p};
            return PredictionRecord::from_probs(v, label, kIngestTolerance);
          },
          source, line));
    } else {
      throw line_error(ErrorCode::kParseError, source, line, "row has no probs, logits or score");
    }
  }
  if (!k) throw Error(ErrorCode::kEmptyDataset, fmt::format("{}: no records", source));
  return Dataset(*k, std::move(records));
}

Dataset read_csv(std::istream& in, const std::string& source) {
  std::string text;
  std::size_t line = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, text)) {
    ++line;
    if (!trim(text).empty()) header = split(text, ',');
  }
  if (header.empty()) throw Error(ErrorCode::kEmptyDataset, fmt::format("{}: no header", source));

  std::optional<std::size_t> label_col;
  std::optional<std::size_t> score_col;
  std::map<std::size_t, std::size_t> p_cols;
  std::map<std::size_t, std::size_t> z_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    auto index_of = [&](std::string_view digits) -> std::size_t {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty()) {
        throw line_error(ErrorCode::kParseError, source, line, fmt::format("unknown column '{}'", name));
      }
      return v;
    };
    if (name == "label") {
      label_col = c;
    } else if (name == "score") {
      score_col = c;
    } else if (name.size() > 1 && name[0] == 'p') {
      p_cols[index_of(std::string_view(name).substr(1))] = c;
    } else if (name.size() > 1 && name[0] == 'z') {
      z_cols[index_of(std::string_view(name).substr(1))] = c;
    } else {
      throw line_error(ErrorCode::kParseError, source, line, fmt::format("unknown column '{}'", name));
    }
  }
  auto contiguous = [](const std::map<std::size_t, std::size_t>& cols) {
    std::size_t expect = 0;
    for (const auto& [i, c] : cols) {
      if (i != expect++) return false;
    }
    return true;
  };
  if (!label_col) throw line_error(ErrorCode::kParseError, source, line, "header lacks 'label'");
  if (!contiguous(p_cols) || !contiguous(z_cols)) {
    throw line_error(ErrorCode::kParseError, source, line, "class columns must be numbered 0..k-1");
  }
  if (!p_cols.empty() && !z_cols.empty() && p_cols.size() != z_cols.size()) {
    throw line_error(ErrorCode::kInconsistentWidth, source, line, "p and z column counts differ");
  }
  if (p_cols.empty() && z_cols.empty() && !score_col) {
    throw line_error(ErrorCode::kParseError, source, line, "header has no p*, z* or score columns");
  }
  const std::size_t k = !p_cols.empty() ? p_cols.size() : !z_cols.empty() ? z_cols.size() : 2;
  if (k < 2) throw line_error(ErrorCode::kParseError, source, line, "need at least two classes");

  std::vector<PredictionRecord> records;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    const auto fields = split(text, ',');
    if (fields.size() != header.size()) {
      throw line_error(ErrorCode::kInconsistentWidth, source, line,
                       fmt::format("{} fields, header has {}", fields.size(), header.size()));
    }
    const std::size_t label = to_label(fields[*label_col], source, line);
    std::vector<double> p;
    std::vector<double> z;
    for (const auto& [i, c] : p_cols) p.push_back(to_double(fields[c], source, line));
    for (const auto& [i, c] : z_cols) z.push_back(to_double(fields[c], source, line));
    if (p.empty() && z.empty()) {
      const double s = to_double(fields[*score_col], source, line);
      p = {1.0 - s, s};
    }
    records.push_back(make_record(
        [&] {
          if (!p.empty() && !z.empty()) return PredictionRecord::from_both(p, z, label, kIngestTolerance);
          if (!p.empty()) return PredictionRecord::from_probs(p, label, kIngestTolerance);
          return PredictionRecord::from_logits(z, label);
        },
        source, line));
  }
  return Dataset(k, std::move(records));
}

}  // namespace

DataFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DataFormat::kCsv : DataFormat::kJsonl;
}

std::optional<DataFormat> parse_format(std::string_view name) {
  if (name == "jsonl") return DataFormat::kJsonl;
  if (name == "csv") return DataFormat::kCsv;
  return std::nullopt;
}

Dataset read_predictions(std::istream& in, DataFormat format, const std::string& source) {
  return format == DataFormat::kCsv ? read_csv(in, source) : read_jsonl(in, source);
}

Dataset load_predictions(const std::filesystem::path& path, std::optional<DataFormat> format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open {}", path.string()));
  return read_predictions(in, format.value_or(format_from_path(path)), path.string());
}

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

void write_predictions(std::ostream& out, const Dataset& dataset, DataFormat format) {
  bool all_logits = !dataset.empty();
  for (const auto& r : dataset.records()) all_logits = all_logits && r.has_logits();
  const std::size_t k = dataset.num_classes();
  if (format == DataFormat::kJsonl) {
    for (const auto& r : dataset.records()) {
      nlohmann::ordered_json row;
      row["label"] = r.label();
      row["probs"] = std::vector<double>(r.probs().values().begin(), r.probs().values().end());
      if (all_logits) row["logits"] = *r.logits();
      out << row.dump() << '\n';
    }
    return;
  }
  for (std::size_t c = 0; c < k; ++c) out << 'p' << c << ',';
  if (all_logits) {
    for (std::size_t c = 0; c < k; ++c) out << 'z' << c << ',';
  }
  out << "label\n";
  for (const auto& r : dataset.records()) {
    for (double p : r.probs().values()) out << format_double(p) << ',';
    if (all_logits) {
      for (double z : *r.logits()) out << format_double(z) << ',';
    }
    out << r.label() << '\n';
  }
}

void save_predictions(const std::filesystem::path& path, const Dataset& dataset,
                      std::optional<DataFormat> format) {
  std::ostringstream out;
  write_predictions(out, dataset, format.value_or(format_from_path(path)));
  write_file(path, out.str());
}

GroupingLens load_group_map(const std::filesystem::path& path, std::size_t k) {
  std::istringstream in(read_file(path));
  const std::string source = path.string();
  std::map<std::size_t, std::size_t> mapping;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    const auto fields = split(text, ',');
    if (fields.size() != 2) {
      throw line_error(ErrorCode::kParseError, source, line, "expected class_index,group_index");
    }
    if (line == 1 && !trim(fields[0]).empty() && !std::isdigit(static_cast<unsigned char>(trim(fields[0])[0]))) {
      continue;  // header
    }
    const std::size_t cls = to_label(fields[0], source, line);
    const std::size_t group = to_label(fields[1], source, line);
    if (!mapping.emplace(cls, group).second) {
      throw line_error(ErrorCode::kParseError, source, line, fmt::format("class {} listed twice", cls));
    }
  }
  return std::get<GroupingLens>(make_grouping(mapping, k));
}

WeightedDistance load_weight_matrix(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  const std::string source = path.string();
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    const auto fields = split(text, ',');
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols) {
      throw line_error(ErrorCode::kInconsistentWidth, source, line, "ragged matrix row");
    }
    for (const auto& f : fields) values.push_back(to_double(f, source, line));
    ++rows;
  }
  if (rows == 0 || rows != cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("{}: matrix is {}x{}, expected square", source, rows, cols));
  }
  return validate_weight_matrix(values, rows);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path.string()));
  out << contents;
}

}  // namespace gece
