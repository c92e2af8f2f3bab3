#include "paxts/perturb.hpp"

#include "paxts/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace paxts {

namespace {

std::vector<Eigen::Index> target_channels(const Matrix& x, std::optional<std::size_t> channel) {
  std::vector<Eigen::Index> rows;
  if (channel) {
    if (*channel >= static_cast<std::size_t>(x.rows())) {
      throw ArgumentError(fmt::format("channel {} out of range for {} channels", *channel, x.rows()));
    }
    rows.push_back(static_cast<Eigen::Index>(*channel));
  } else {
    for (Eigen::Index c = 0; c < x.rows(); ++c) rows.push_back(c);
  }
  return rows;
}

PerturbedWindow finish(const Matrix& x, Matrix x_prime, PerturbationSpec spec) {
  const double delta = distance(x, x_prime);
  return PerturbedWindow{std::move(x_prime), delta, spec};
}

std::vector<double> row_values(const Matrix& x, Eigen::Index c) {
  std::vector<double> seq(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.cols(); ++i) seq[static_cast<std::size_t>(i)] = x(c, i);
  return seq;
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Index: return "index";
    case Family::Mean: return "mean";
    case Family::Variance: return "variance";
    case Family::Trend: return "trend";
  }
  return "unknown";
}

std::string_view to_string(TrendAnchor anchor) {
  switch (anchor) {
    case TrendAnchor::LeftFixed: return "left";
    case TrendAnchor::Symmetric: return "symmetric";
    case TrendAnchor::RightFixed: return "right";
  }
  return "unknown";
}

TrendAnchor parse_trend_anchor(std::string_view token) {
  if (token == "left" || token == "left-fixed") return TrendAnchor::LeftFixed;
  if (token == "symmetric") return TrendAnchor::Symmetric;
  if (token == "right" || token == "right-fixed") return TrendAnchor::RightFixed;
  throw ArgumentError(fmt::format("unknown trend anchor '{}' (expected left, symmetric, right)", token));
}

PerturbationSpec PerturbationSpec::index(std::size_t t, double alpha, std::size_t width,
                                         double softness, double epsilon,
                                         std::optional<std::size_t> channel) {
  PerturbationSpec spec;
  spec.family = Family::Index;
  spec.t = t;
  spec.alpha = alpha;
  spec.width = width;
  spec.softness = softness;
  spec.epsilon = epsilon;
  spec.channel = channel;
  return spec;
}

PerturbationSpec PerturbationSpec::mean(double alpha, std::optional<std::size_t> channel) {
  PerturbationSpec spec;
  spec.family = Family::Mean;
  spec.alpha = alpha;
  spec.channel = channel;
  return spec;
}

PerturbationSpec PerturbationSpec::variance(double alpha, std::optional<std::size_t> channel) {
  PerturbationSpec spec;
  spec.family = Family::Variance;
  spec.alpha = alpha;
  spec.channel = channel;
  return spec;
}

PerturbationSpec PerturbationSpec::trend(double alpha, std::size_t seasonality, TrendAnchor anchor,
                                         std::optional<std::size_t> channel) {
  PerturbationSpec spec;
  spec.family = Family::Trend;
  spec.alpha = alpha;
  spec.seasonality = seasonality;
  spec.anchor = anchor;
  spec.channel = channel;
  return spec;
}

double positional_weight(std::size_t i, std::size_t t, std::size_t width, double softness) {
  const auto gap = static_cast<double>(i > t ? i - t : t - i);
  if (gap == 0.0) return 1.0;
  if (gap > static_cast<double>(width)) return 0.0;
  const double z = gap / static_cast<double>(width);
  return std::exp(-softness * z * z);
}

double amplitude_weight(double xi, double xt, double epsilon) {
  const double a = std::abs(xi);
  const double b = std::abs(xt);
  const double weight = std::min(a, b) / (std::max(a, b) + epsilon);
  return std::clamp(weight, 0.0, 1.0);
}

double distance(const Matrix& x, const Matrix& x_prime) {
  if (x.rows() != x_prime.rows() || x.cols() != x_prime.cols()) {
    throw ShapeError(fmt::format("distance: shape {}x{} vs {}x{}", x.rows(), x.cols(), x_prime.rows(),
                                 x_prime.cols()));
  }
  return (x - x_prime).norm();
}

PerturbedWindow perturb_index(const Matrix& x, const PerturbationSpec& spec) {
  const auto b = static_cast<std::size_t>(x.cols());
  if (spec.t < 1 || spec.t > b) {
    throw ArgumentError(fmt::format("index perturbation: t = {} outside 1..{}", spec.t, b));
  }
  if (!(spec.softness > 0)) throw ArgumentError("index perturbation: softness must be > 0");
  if (!(spec.epsilon > 0)) throw ArgumentError("index perturbation: epsilon must be > 0");
  if (x.rows() > 1 && !spec.channel) {
    throw ArgumentError("index perturbation on multivariate input needs a channel");
  }
  const auto c = static_cast<Eigen::Index>(spec.channel.value_or(0));
  if (c >= x.rows()) {
    throw ArgumentError(fmt::format("channel {} out of range for {} channels", c, x.rows()));
  }

  Matrix x_prime = x;
  const double xt = x(c, static_cast<Eigen::Index>(spec.t - 1));
  for (std::size_t i = 1; i <= b; ++i) {
    const double wp = positional_weight(i, spec.t, spec.width, spec.softness);
    if (wp == 0.0) continue;
    const auto col = static_cast<Eigen::Index>(i - 1);
    const double xi = x(c, col);
    x_prime(c, col) = xi + wp * amplitude_weight(xi, xt, spec.epsilon) * spec.alpha * xi;
  }
  return finish(x, std::move(x_prime), spec);
}

PerturbedWindow scale_mean(const Matrix& x, double alpha, std::optional<std::size_t> channel) {
  Matrix x_prime = x;
  for (const auto c : target_channels(x, channel)) {
    const double mu = x.row(c).mean();
    x_prime.row(c).array() += alpha * mu;
  }
  return finish(x, std::move(x_prime), PerturbationSpec::mean(alpha, channel));
}

PerturbedWindow scale_variance(const Matrix& x, double alpha, std::optional<std::size_t> channel) {
  if (!(alpha > -1.0)) {
    throw ArgumentError(fmt::format("variance scaling needs alpha > -1, got {}", alpha));
  }
  // (x - mu) * sqrt(alpha + 1) + mu, written as an increment so alpha = 0 is exact.
  const double gain = std::sqrt(alpha + 1.0) - 1.0;
  Matrix x_prime = x;
  for (const auto c : target_channels(x, channel)) {
    const double mu = x.row(c).mean();
    x_prime.row(c) = (x.row(c).array() + (x.row(c).array() - mu) * gain).matrix();
  }
  return finish(x, std::move(x_prime), PerturbationSpec::variance(alpha, channel));
}

std::vector<double> moving_average(std::span<const double> seq, std::size_t k) {
  if (k < 1 || k > seq.size()) {
    throw ArgumentError(fmt::format("moving average window {} outside 1..{}", k, seq.size()));
  }
  std::vector<double> out(seq.size() - k + 1);
  for (std::size_t j = 0; j < out.size(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += seq[j + i];
    out[j] = sum / static_cast<double>(k);
  }
  return out;
}

LinearTrend fit_trend(std::span<const double> seq, std::size_t k) {
  const auto smooth = moving_average(seq, k);
  const double offset = static_cast<double>((k - 1) / 2);
  const auto n = static_cast<double>(smooth.size());
  if (smooth.size() == 1) return LinearTrend{smooth.front(), 0.0};

  double mean_i = 0.0;
  double mean_v = 0.0;
  for (std::size_t j = 0; j < smooth.size(); ++j) {
    mean_i += static_cast<double>(j) + offset;
    mean_v += smooth[j];
  }
  mean_i /= n;
  mean_v /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t j = 0; j < smooth.size(); ++j) {
    const double di = static_cast<double>(j) + offset - mean_i;
    sxy += di * (smooth[j] - mean_v);
    sxx += di * di;
  }
  const double slope = sxy / sxx;
  return LinearTrend{mean_v - slope * mean_i, slope};
}

PerturbedWindow adjust_trend(const Matrix& x, const PerturbationSpec& spec) {
  const auto b = static_cast<std::size_t>(x.cols());
  if (b < 2) throw ArgumentError("trend adjustment needs at least 2 time steps");
  if (spec.seasonality < 1 || spec.seasonality > b) {
    throw ArgumentError(
        fmt::format("trend adjustment: seasonality {} outside 1..{}", spec.seasonality, b));
  }
  Matrix x_prime = x;
  for (const auto c : target_channels(x, spec.channel)) {
    const auto seq = row_values(x, c);
    const auto line = fit_trend(seq, spec.seasonality);
    const double z = line.slope >= 0 ? spec.alpha * line.slope : -spec.alpha * line.slope;
    double shift = 0.0;  // a' - a
    switch (spec.anchor) {
      case TrendAnchor::RightFixed: shift = -static_cast<double>(b - 1) * z; break;
      case TrendAnchor::Symmetric: shift = -0.5 * static_cast<double>(b - 1) * z; break;
      case TrendAnchor::LeftFixed: shift = 0.0; break;
    }
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      x_prime(c, i) = x(c, i) + shift + z * static_cast<double>(i);
    }
  }
  return finish(x, std::move(x_prime), spec);
}

PerturbedWindow apply(const Matrix& x, const PerturbationSpec& spec) {
  switch (spec.family) {
    case Family::Index: return perturb_index(x, spec);
    case Family::Mean: return scale_mean(x, spec.alpha, spec.channel);
    case Family::Variance: return scale_variance(x, spec.alpha, spec.channel);
    case Family::Trend: return adjust_trend(x, spec);
  }
  throw ArgumentError("unknown perturbation family");
}

}  // namespace paxts
