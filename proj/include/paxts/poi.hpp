#pragma once

#include "paxts/series.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace paxts {

enum class PropertyKind { Min, Max, Mean, Variance, TrendSlope, ValueAt };

/// A scalar property of interest of a single-channel sequence.
struct Property {
  PropertyKind kind = PropertyKind::Mean;
  /// 1-based step for ValueAt.
  std::size_t step = 1;
  /// Deseasonalization window for TrendSlope.
  std::size_t seasonality = 1;
  /// Channel read on multivariate sequences.
  std::optional<std::size_t> target_channel;

  static Property min() { return make(PropertyKind::Min); }
  static Property max() { return make(PropertyKind::Max); }
  static Property mean() { return make(PropertyKind::Mean); }
  static Property variance() { return make(PropertyKind::Variance); }
  static Property trend(std::size_t seasonality = 1) {
    Property p = make(PropertyKind::TrendSlope);
    p.seasonality = seasonality;
    return p;
  }
  static Property value_at(std::size_t step) {
    Property p = make(PropertyKind::ValueAt);
    p.step = step;
    return p;
  }

  Property on_channel(std::size_t channel) const {
    Property copy = *this;
    copy.target_channel = channel;
    return copy;
  }

  /// Linear properties commute with affine forecasters (Mean, ValueAt).
  bool is_linear() const { return kind == PropertyKind::Mean || kind == PropertyKind::ValueAt; }

  friend bool operator==(const Property&, const Property&) = default;

 private:
  static Property make(PropertyKind kind) {
    Property p;
    p.kind = kind;
    return p;
  }
};

double eval_property(const Property& prop, std::span<const double> seq);

/// Evaluates on one row of a channel-major matrix. Uses target_channel, or
/// channel 0 for single-channel input.
double eval_property(const Property& prop, const Matrix& values);

/// ValueAt(1) ... ValueAt(h).
std::vector<Property> output_step_properties(std::size_t horizon);

/// Parses "min", "max", "mean", "var", "trend", "step:<n>" with an optional
/// "@<channel>" suffix.
Property parse_property(std::string_view token);
std::string to_token(const Property& prop);

/// Row/column label without the channel suffix ("min", "variance", "t+3").
std::string display_label(const Property& prop);

}  // namespace paxts
