#pragma once

#include "paxts/series.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace paxts {

enum class Family { Index, Mean, Variance, Trend };

/// Which point of the fitted trend line stays fixed when its slope changes.
enum class TrendAnchor { LeftFixed, Symmetric, RightFixed };

std::string_view to_string(Family family);
std::string_view to_string(TrendAnchor anchor);
TrendAnchor parse_trend_anchor(std::string_view token);

/// Parameters of one perturbation. Time steps are 1-based; channels 0-based.
struct PerturbationSpec {
  Family family = Family::Index;
  double alpha = 0.0;

  // Index family
  std::size_t t = 1;
  std::size_t width = 2;
  double softness = 1.0;
  double epsilon = 1e-8;

  // Trend family
  std::size_t seasonality = 1;
  TrendAnchor anchor = TrendAnchor::LeftFixed;

  /// Channel to perturb. Required by Index on multivariate input; other
  /// families perturb every channel when unset.
  std::optional<std::size_t> channel;

  static PerturbationSpec index(std::size_t t, double alpha, std::size_t width = 2,
                                double softness = 1.0, double epsilon = 1e-8,
                                std::optional<std::size_t> channel = std::nullopt);
  static PerturbationSpec mean(double alpha, std::optional<std::size_t> channel = std::nullopt);
  static PerturbationSpec variance(double alpha, std::optional<std::size_t> channel = std::nullopt);
  static PerturbationSpec trend(double alpha, std::size_t seasonality = 1,
                                TrendAnchor anchor = TrendAnchor::LeftFixed,
                                std::optional<std::size_t> channel = std::nullopt);
};

struct PerturbedWindow {
  Matrix x_prime;
  double delta = 0.0;
  PerturbationSpec spec;
};

/// Gaussian-like falloff around t, zero beyond the width. width == 0 is a
/// single-point perturbation.
double positional_weight(std::size_t i, std::size_t t, std::size_t width, double softness);

/// min(|xi|,|xt|) / (max(|xi|,|xt|) + epsilon), clamped to [0, 1].
double amplitude_weight(double xi, double xt, double epsilon);

/// Euclidean norm of the flattened difference.
double distance(const Matrix& x, const Matrix& x_prime);

PerturbedWindow perturb_index(const Matrix& x, const PerturbationSpec& spec);
PerturbedWindow scale_mean(const Matrix& x, double alpha,
                           std::optional<std::size_t> channel = std::nullopt);
PerturbedWindow scale_variance(const Matrix& x, double alpha,
                               std::optional<std::size_t> channel = std::nullopt);
PerturbedWindow adjust_trend(const Matrix& x, const PerturbationSpec& spec);

/// Dispatches on spec.family.
PerturbedWindow apply(const Matrix& x, const PerturbationSpec& spec);

/// Intercept and slope of a line a + m * i over 0-based original indices.
struct LinearTrend {
  double intercept = 0.0;
  double slope = 0.0;
};

/// Centered moving average over the valid region (length L - k + 1).
std::vector<double> moving_average(std::span<const double> seq, std::size_t k);

/// OLS line through the k-deseasonalized sequence. Sample j of the moving
/// average sits at original index j + floor((k - 1) / 2). A single remaining
/// sample gives slope 0.
LinearTrend fit_trend(std::span<const double> seq, std::size_t k = 1);

}  // namespace paxts
