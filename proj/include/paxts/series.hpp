#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace paxts {

/// Channel-major matrix: rows are channels, columns are time steps.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A d-channel series of n finite observations.
class Series {
 public:
  Series(Matrix values, std::vector<std::string> channel_names,
         std::optional<std::string> frequency_hint = std::nullopt);

  /// Names channels "c0", "c1", ...
  explicit Series(Matrix values);

  const Matrix& values() const { return values_; }
  const std::vector<std::string>& channel_names() const { return channel_names_; }
  const std::optional<std::string>& frequency_hint() const { return frequency_hint_; }

  std::size_t channels() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t length() const { return static_cast<std::size_t>(values_.cols()); }

  /// Contiguous time slice [begin, begin + count).
  Series slice(std::size_t begin, std::size_t count) const;

 private:
  Matrix values_;
  std::vector<std::string> channel_names_;
  std::optional<std::string> frequency_hint_;
};

/// One forecasting sample: x is d×b, y (when known) is the d×h continuation.
struct Window {
  Matrix x;
  std::optional<Matrix> y;
  std::size_t origin = 0;
};

struct SplitSpec {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;

  void validate() const;
};

struct SplitResult {
  Series train;
  std::optional<Series> validation;
  std::optional<Series> test;
};

struct ScalingStats {
  Vector mean;
  Vector std;
  /// Channels whose observed std was zero; their stored std is 1.
  std::vector<bool> zero_std;

  static ScalingStats fit(const Series& series);
};

/// Column selection for load_csv. Empty selects every data column.
struct CsvSchema {
  std::vector<std::string> columns;
};

Series load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
Series parse_csv(const std::string& text, const CsvSchema& schema = {});
std::string to_csv(const Series& series);

/// Temporally ordered split; floor(ratio * n) per segment, remainder to train.
/// Every segment with a nonzero ratio must hold at least min_segment steps.
SplitResult split(const Series& series, const SplitSpec& spec, std::size_t min_segment = 1);

Series standardize(const Series& series, const ScalingStats& stats);
Series unstandardize(const Series& series, const ScalingStats& stats);

std::vector<Window> make_windows(const Series& series, std::size_t lookback, std::size_t horizon,
                                 std::size_t stride = 1);

}  // namespace paxts
