#include "paxts/series.hpp"

#include "paxts/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace paxts {

namespace {

std::vector<std::string> default_names(std::size_t d) {
  std::vector<std::string> names;
  names.reserve(d);
  for (std::size_t c = 0; c < d; ++c) names.push_back(fmt::format("c{}", c));
  return names;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

bool is_time_column(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return lower == "timestamp" || lower == "date";
}

std::optional<double> parse_number(std::string_view field) {
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

Series::Series(Matrix values, std::vector<std::string> channel_names,
               std::optional<std::string> frequency_hint)
    : values_(std::move(values)),
      channel_names_(std::move(channel_names)),
      frequency_hint_(std::move(frequency_hint)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw DataError(fmt::format("series must have at least one channel and one step, got {}x{}",
                                values_.rows(), values_.cols()));
  }
  if (!values_.allFinite()) throw DataError("series contains non-finite values");
  if (channel_names_.size() != channels()) {
    throw DataError(fmt::format("series has {} channels but {} channel names", channels(),
                                channel_names_.size()));
  }
  const std::set<std::string> unique(channel_names_.begin(), channel_names_.end());
  if (unique.size() != channel_names_.size()) throw DataError("channel names must be distinct");
}

Series::Series(Matrix values) : Series(values, default_names(static_cast<std::size_t>(values.rows()))) {}

Series Series::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > length()) {
    throw ArgumentError(
        fmt::format("slice [{}, {}) exceeds series length {}", begin, begin + count, length()));
  }
  return Series(values_.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count)),
                channel_names_, frequency_hint_);
}

void SplitSpec::validate() const {
  if (train < 0 || validation < 0 || test < 0) throw ArgumentError("split ratios must be non-negative");
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    throw ArgumentError(
        fmt::format("split ratios must sum to 1, got {}+{}+{}", train, validation, test));
  }
}

ScalingStats ScalingStats::fit(const Series& series) {
  const auto& v = series.values();
  ScalingStats stats;
  stats.mean = v.rowwise().mean();
  stats.std.resize(v.rows());
  stats.zero_std.assign(series.channels(), false);
  for (Eigen::Index c = 0; c < v.rows(); ++c) {
    const double var = (v.row(c).array() - stats.mean(c)).square().mean();
    const double sd = std::sqrt(var);
    if (sd == 0.0) {
      stats.std(c) = 1.0;
      stats.zero_std[static_cast<std::size_t>(c)] = true;
    } else {
      stats.std(c) = sd;
    }
  }
  return stats;
}

Series parse_csv(const std::string& text, const CsvSchema& schema) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto f : split_fields(line)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw DataError("empty CSV: no header row");

  const std::size_t first_data = (!header.empty() && is_time_column(header.front())) ? 1 : 0;

  std::vector<std::size_t> selected;
  if (schema.columns.empty()) {
    for (std::size_t i = first_data; i < header.size(); ++i) selected.push_back(i);
  } else {
    for (const auto& name : schema.columns) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw DataError(fmt::format("column '{}' not found in CSV header", name));
      selected.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }
  if (selected.empty()) throw DataError("CSV has no data columns");

  std::vector<std::vector<double>> rows;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++data_row;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError(fmt::format("ragged row {} (line {}): expected {} fields, found {}", data_row,
                                  line_no, header.size(), fields.size()));
    }
    std::vector<double> row;
    row.reserve(selected.size());
    for (const auto col : selected) {
      const auto value = parse_number(fields[col]);
      if (!value) {
        throw DataError(fmt::format("non-numeric cell '{}' at row {} (line {}), column {} '{}'",
                                    fields[col], data_row, line_no, col + 1, header[col]));
      }
      row.push_back(*value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("CSV has a header but no data rows");

  Matrix values(static_cast<Eigen::Index>(selected.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < selected.size(); ++c) {
      values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = rows[i][c];
    }
  }
  std::vector<std::string> names;
  for (const auto col : selected) names.push_back(header[col]);
  return Series(std::move(values), std::move(names));
}

Series load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open CSV file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_csv(buffer.str(), schema);
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string to_csv(const Series& series) {
  std::string out;
  const auto& names = series.channel_names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c) out += ',';
    out += names[c];
  }
  out += '\n';
  const auto& v = series.values();
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    for (Eigen::Index c = 0; c < v.rows(); ++c) {
      if (c) out += ',';
      out += fmt::format("{:.17g}", v(c, i));
    }
    out += '\n';
  }
  return out;
}

SplitResult split(const Series& series, const SplitSpec& spec, std::size_t min_segment) {
  spec.validate();
  const std::size_t n = series.length();
  // Small slack so 0.7 * 10 lands on 7 despite binary rounding.
  const auto portion = [n](double ratio) {
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  };
  const std::size_t n_val = portion(spec.validation);
  const std::size_t n_test = portion(spec.test);
  const std::size_t n_train = n - n_val - n_test;

  const auto check = [&](const char* name, double ratio, std::size_t len) {
    if (ratio > 0 && len < std::max<std::size_t>(min_segment, 1)) {
      throw DataError(fmt::format("{} split has {} steps, needs at least {} (n = {})", name, len,
                                  std::max<std::size_t>(min_segment, 1), n));
    }
  };
  check("train", spec.train, n_train);
  check("validation", spec.validation, n_val);
  check("test", spec.test, n_test);

  SplitResult result{series.slice(0, n_train), std::nullopt, std::nullopt};
  if (n_val > 0) result.validation = series.slice(n_train, n_val);
  if (n_test > 0) result.test = series.slice(n_train + n_val, n_test);
  return result;
}

Series standardize(const Series& series, const ScalingStats& stats) {
  if (static_cast<std::size_t>(stats.mean.size()) != series.channels()) {
    throw ShapeError("scaling stats channel count does not match series");
  }
  Matrix v = (series.values().colwise() - stats.mean).array().colwise() / stats.std.array();
  return Series(std::move(v), series.channel_names(), series.frequency_hint());
}

Series unstandardize(const Series& series, const ScalingStats& stats) {
  if (static_cast<std::size_t>(stats.mean.size()) != series.channels()) {
    throw ShapeError("scaling stats channel count does not match series");
  }
  Matrix v = (series.values().array().colwise() * stats.std.array()).matrix().colwise() + stats.mean;
  return Series(std::move(v), series.channel_names(), series.frequency_hint());
}

std::vector<Window> make_windows(const Series& series, std::size_t lookback, std::size_t horizon,
                                 std::size_t stride) {
  if (lookback < 2) throw ArgumentError(fmt::format("lookback must be >= 2, got {}", lookback));
  if (horizon < 1) throw ArgumentError("horizon must be >= 1");
  if (stride < 1) throw ArgumentError("stride must be >= 1");
  const std::size_t n = series.length();
  if (n < lookback + horizon) {
    throw DataError(fmt::format("series of length {} yields no windows with lookback {} and horizon {}",
                                n, lookback, horizon));
  }
  const auto& v = series.values();
  std::vector<Window> windows;
  windows.reserve((n - lookback - horizon) / stride + 1);
  for (std::size_t origin = 0; origin + lookback + horizon <= n; origin += stride) {
    const auto o = static_cast<Eigen::Index>(origin);
    const auto b = static_cast<Eigen::Index>(lookback);
    windows.push_back(Window{v.middleCols(o, b), Matrix(v.middleCols(o + b, static_cast<Eigen::Index>(horizon))),
                             origin});
  }
  return windows;
}

}  // namespace paxts
