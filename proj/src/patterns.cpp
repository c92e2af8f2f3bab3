#include "paxts/patterns.hpp"

#include "paxts/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace paxts {

namespace {

// Distance from lag to the nearest multiple of k.
std::size_t seasonal_offset(std::size_t lag, std::size_t k) {
  const std::size_t r = lag % k;
  return std::min(r, k - r);
}

// Mass of 4-connected same-sign components with at least min_block cells.
std::pair<double, double> block_masses(const Matrix& scaled, double significance, std::size_t min_block) {
  const auto rows = scaled.rows();
  const auto cols = scaled.cols();
  std::vector<int> seen(static_cast<std::size_t>(rows * cols), 0);
  const auto idx = [cols](Eigen::Index r, Eigen::Index c) { return static_cast<std::size_t>(r * cols + c); };

  double positive = 0.0;
  double negative = 0.0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;
  for (Eigen::Index r0 = 0; r0 < rows; ++r0) {
    for (Eigen::Index c0 = 0; c0 < cols; ++c0) {
      const double v0 = scaled(r0, c0);
      if (seen[idx(r0, c0)] || std::abs(v0) < significance) continue;
      const bool sign = v0 > 0;
      std::size_t size = 0;
      double mass = 0.0;
      stack.assign(1, {r0, c0});
      seen[idx(r0, c0)] = 1;
      while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        ++size;
        mass += std::abs(scaled(r, c));
        const std::pair<Eigen::Index, Eigen::Index> next[] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (const auto& [nr, nc] : next) {
          if (nr < 0 || nc < 0 || nr >= rows || nc >= cols || seen[idx(nr, nc)]) continue;
          const double v = scaled(nr, nc);
          if (std::abs(v) < significance || (v > 0) != sign) continue;
          seen[idx(nr, nc)] = 1;
          stack.emplace_back(nr, nc);
        }
      }
      if (size >= min_block) (sign ? positive : negative) += mass;
    }
  }
  return {positive, negative};
}

}  // namespace

std::string_view to_string(PatternClass cls) {
  switch (cls) {
    case PatternClass::Diagonals: return "diagonals";
    case PatternClass::DiagonalsEnd: return "diagonals_end";
    case PatternClass::LastTimestep: return "last_timestep";
    case PatternClass::BipolarRegions: return "bipolar_regions";
    case PatternClass::FullyCorrelated: return "fully_correlated";
    case PatternClass::Other: return "other";
  }
  return "other";
}

std::size_t diagonal_band(std::size_t width, std::size_t seasonality) {
  if (seasonality < 2) return 0;
  return std::min(width, (seasonality - 1) / 4);
}

std::size_t last_row_band(std::size_t width, std::size_t lookback) {
  if (lookback < 2) return 0;
  return std::min(width, (lookback - 1) / 4);
}

PatternFeatures extract_features(const Matrix& matrix, std::size_t seasonality, std::size_t width,
                                 const PatternThresholds& thresholds) {
  const auto b = static_cast<std::size_t>(matrix.rows());
  const auto h = static_cast<std::size_t>(matrix.cols());
  if (b < 2 || h < 2) throw ArgumentError(fmt::format("pattern features need a matrix of at least 2x2, got {}x{}", b, h));
  if (seasonality < 1 || seasonality > b) {
    throw ArgumentError(fmt::format("pattern features: seasonality {} outside 1..{}", seasonality, b));
  }
  if (!matrix.allFinite()) throw ArgumentError("pattern features need a finite matrix");

  PatternFeatures f;
  const double peak = matrix.cwiseAbs().maxCoeff();
  if (peak == 0.0) {
    f.degenerate = true;
    return f;
  }
  const Matrix scaled = matrix / peak;
  const std::size_t band = diagonal_band(width, seasonality);
  const std::size_t row_band = last_row_band(width, b);
  const double total = scaled.cwiseAbs().sum();

  double diagonal = 0.0;
  double end_diagonal = 0.0;
  double last_rows = 0.0;
  std::size_t populated = 0;
  for (std::size_t t = 1; t <= b; ++t) {
    for (std::size_t n = 1; n <= h; ++n) {
      const double mass = std::abs(scaled(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(n - 1)));
      if (mass >= thresholds.significance) ++populated;
      if (t + row_band >= b) last_rows += mass;
      if (seasonality >= 2 && seasonal_offset(b - t + n, seasonality) <= band) {
        diagonal += mass;
        if (t > b - seasonality) end_diagonal += mass;
      }
    }
  }
  // Partial sums can overshoot the total by an ulp.
  const auto share = [total](double part) { return std::min(1.0, part / total); };
  f.diagonal_mass = share(diagonal);
  f.end_diagonal_mass = share(end_diagonal);
  f.last_row_mass = share(last_rows);
  f.sign_homogeneity = std::min(1.0, std::abs(scaled.sum()) / total);
  f.density = static_cast<double>(populated) / static_cast<double>(b * h);
  const auto [positive, negative] = block_masses(scaled, thresholds.significance, thresholds.min_block);
  f.bipolarity = std::min(1.0, 2.0 * std::min(positive, negative) / total);
  return f;
}

PatternLabel classify(const PatternFeatures& f, const PatternThresholds& th) {
  PatternLabel label{PatternClass::Other, f, th.version};
  if (f.degenerate) return label;
  if (f.last_row_mass >= th.last_row) {
    label.cls = PatternClass::LastTimestep;
  } else if (f.diagonal_mass >= th.diagonal && f.end_diagonal_mass / f.diagonal_mass < th.end_ratio) {
    label.cls = PatternClass::Diagonals;
  } else if (f.end_diagonal_mass >= th.end_diagonal) {
    label.cls = PatternClass::DiagonalsEnd;
  } else if (f.sign_homogeneity >= th.sign_homogeneity && f.density >= th.density) {
    label.cls = PatternClass::FullyCorrelated;
  } else if (f.bipolarity >= th.bipolarity) {
    label.cls = PatternClass::BipolarRegions;
  }
  return label;
}

nlohmann::ordered_json to_json(const PatternLabel& label) {
  nlohmann::ordered_json j;
  j["label"] = std::string(to_string(label.cls));
  j["thresholds_version"] = label.thresholds_version;
  nlohmann::ordered_json f;
  f["diagonal_mass"] = label.features.diagonal_mass;
  f["end_diagonal_mass"] = label.features.end_diagonal_mass;
  f["last_row_mass"] = label.features.last_row_mass;
  f["sign_homogeneity"] = label.features.sign_homogeneity;
  f["bipolarity"] = label.features.bipolarity;
  f["density"] = label.features.density;
  f["degenerate"] = label.features.degenerate;
  j["features"] = std::move(f);
  return j;
}

}  // namespace paxts
