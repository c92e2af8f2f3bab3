#pragma once

#include "paxts/engine.hpp"

#include <json.hpp>

#include <cstddef>
#include <string>
#include <string_view>

namespace paxts {

enum class PatternClass { Diagonals, DiagonalsEnd, LastTimestep, BipolarRegions, FullyCorrelated, Other };

std::string_view to_string(PatternClass cls);

/// Shape descriptors of a b×h dependency matrix, computed on the matrix
/// scaled by its maximum absolute entry. All values lie in [0, 1].
struct PatternFeatures {
  /// Share of |mass| on seasonal diagonal cells: (b - t + n) within the diagonal band of a multiple of k.
  double diagonal_mass = 0.0;
  /// Share of |mass| on seasonal diagonal cells in the last k input rows.
  double end_diagonal_mass = 0.0;
  /// Share of |mass| on the last input row (and the row band before it).
  double last_row_mass = 0.0;
  /// |sum| / sum of |values|.
  double sign_homogeneity = 0.0;
  /// 2 min(P, N) / total, P and N the mass of positive and negative connected blocks.
  double bipolarity = 0.0;
  /// Share of cells whose scaled magnitude reaches the significance level.
  double density = 0.0;
  /// Set for an all-zero matrix; every feature is then 0.
  bool degenerate = false;
};

/// Versioned decision thresholds, applied in priority order by classify().
struct PatternThresholds {
  std::string version = "v1";
  double last_row = 0.6;
  double diagonal = 0.5;
  double end_ratio = 0.8;
  double end_diagonal = 0.5;
  double sign_homogeneity = 0.9;
  double density = 0.8;
  double bipolarity = 0.5;
  /// Scaled magnitude at which a cell counts as populated.
  double significance = 0.1;
  /// Minimum cell count of a sign-coherent block.
  std::size_t min_block = 2;
};

struct PatternLabel {
  PatternClass cls = PatternClass::Other;
  PatternFeatures features;
  std::string thresholds_version;
};

/// Diagonal tolerance matching the smear of an index perturbation of width
/// `width`, capped at floor((k - 1) / 4) so the band covers under half the lags.
std::size_t diagonal_band(std::size_t width, std::size_t seasonality);

/// Rows before the last one that still count as "last row": the same smear,
/// capped at floor((b - 1) / 4).
std::size_t last_row_band(std::size_t width, std::size_t lookback);

/// `width` is the index-perturbation width the matrix was computed with.
/// k = 1 means no seasonality: the diagonal features are 0.
PatternFeatures extract_features(const Matrix& matrix, std::size_t seasonality, std::size_t width = 0,
                                 const PatternThresholds& thresholds = {});

PatternLabel classify(const PatternFeatures& features, const PatternThresholds& thresholds = {});

inline PatternLabel classify(const ChangeRatioMatrix& matrix, std::size_t seasonality, std::size_t width = 0,
                             const PatternThresholds& thresholds = {}) {
  return classify(extract_features(matrix.values, seasonality, width, thresholds), thresholds);
}

nlohmann::ordered_json to_json(const PatternLabel& label);

}  // namespace paxts
