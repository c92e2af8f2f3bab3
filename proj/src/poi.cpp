#include "paxts/poi.hpp"

#include "paxts/error.hpp"
#include "paxts/perturb.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <numeric>

namespace paxts {

namespace {

std::optional<std::size_t> parse_index(std::string_view text) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

constexpr std::string_view kValidTokens = "min, max, mean, var, trend, step:<n> (optionally @<channel>)";

}  // namespace

double eval_property(const Property& prop, std::span<const double> seq) {
  if (seq.empty()) throw ArgumentError("property of an empty sequence");
  switch (prop.kind) {
    case PropertyKind::Min: return *std::min_element(seq.begin(), seq.end());
    case PropertyKind::Max: return *std::max_element(seq.begin(), seq.end());
    case PropertyKind::Mean:
      return std::accumulate(seq.begin(), seq.end(), 0.0) / static_cast<double>(seq.size());
    case PropertyKind::Variance: {
      const double mu = std::accumulate(seq.begin(), seq.end(), 0.0) / static_cast<double>(seq.size());
      double acc = 0.0;
      for (const double v : seq) acc += (v - mu) * (v - mu);
      return acc / static_cast<double>(seq.size());
    }
    case PropertyKind::TrendSlope:
      if (seq.size() < 2) throw ArgumentError("trend slope needs a sequence of length >= 2");
      if (prop.seasonality < 1 || prop.seasonality > seq.size() - 1) {
        throw ArgumentError(fmt::format("trend slope: seasonality {} leaves fewer than 2 points of {}",
                                        prop.seasonality, seq.size()));
      }
      return fit_trend(seq, prop.seasonality).slope;
    case PropertyKind::ValueAt:
      if (prop.step < 1 || prop.step > seq.size()) {
        throw ArgumentError(fmt::format("step {} outside 1..{}", prop.step, seq.size()));
      }
      return seq[prop.step - 1];
  }
  throw ArgumentError("unknown property kind");
}

double eval_property(const Property& prop, const Matrix& values) {
  if (values.rows() > 1 && !prop.target_channel) {
    throw ArgumentError("property on a multivariate forecast needs a target channel");
  }
  const auto c = static_cast<Eigen::Index>(prop.target_channel.value_or(0));
  if (c >= values.rows()) {
    throw ArgumentError(fmt::format("target channel {} out of range for {} channels", c, values.rows()));
  }
  // Row of a column-major matrix is strided; copy it out.
  std::vector<double> row(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index i = 0; i < values.cols(); ++i) row[static_cast<std::size_t>(i)] = values(c, i);
  return eval_property(prop, std::span<const double>(row));
}

std::vector<Property> output_step_properties(std::size_t horizon) {
  if (horizon < 1) throw ArgumentError("horizon must be >= 1");
  std::vector<Property> props;
  props.reserve(horizon);
  for (std::size_t n = 1; n <= horizon; ++n) props.push_back(Property::value_at(n));
  return props;
}

Property parse_property(std::string_view token) {
  std::optional<std::size_t> channel;
  if (const auto at = token.find('@'); at != std::string_view::npos) {
    channel = parse_index(token.substr(at + 1));
    if (!channel) {
      throw ArgumentError(fmt::format("bad channel in property token '{}'; valid tokens: {}", token,
                                      kValidTokens));
    }
    token = token.substr(0, at);
  }
  Property prop;
  if (token == "min") {
    prop = Property::min();
  } else if (token == "max") {
    prop = Property::max();
  } else if (token == "mean") {
    prop = Property::mean();
  } else if (token == "var" || token == "variance") {
    prop = Property::variance();
  } else if (token == "trend") {
    prop = Property::trend();
  } else if (token.starts_with("step:")) {
    const auto step = parse_index(token.substr(5));
    if (!step || *step < 1) {
      throw ArgumentError(fmt::format("bad step in property token '{}'; valid tokens: {}", token,
                                      kValidTokens));
    }
    prop = Property::value_at(*step);
  } else {
    throw ArgumentError(fmt::format("unknown property '{}'; valid tokens: {}", token, kValidTokens));
  }
  prop.target_channel = channel;
  return prop;
}

std::string to_token(const Property& prop) {
  std::string token;
  switch (prop.kind) {
    case PropertyKind::Min: token = "min"; break;
    case PropertyKind::Max: token = "max"; break;
    case PropertyKind::Mean: token = "mean"; break;
    case PropertyKind::Variance: token = "var"; break;
    case PropertyKind::TrendSlope: token = "trend"; break;
    case PropertyKind::ValueAt: token = fmt::format("step:{}", prop.step); break;
  }
  if (prop.target_channel) token += fmt::format("@{}", *prop.target_channel);
  return token;
}

std::string display_label(const Property& prop) {
  switch (prop.kind) {
    case PropertyKind::Min: return "min";
    case PropertyKind::Max: return "max";
    case PropertyKind::Mean: return "mean";
    case PropertyKind::Variance: return "variance";
    case PropertyKind::TrendSlope: return "trend";
    case PropertyKind::ValueAt: return fmt::format("t+{}", prop.step);
  }
  return "?";
}

}  // namespace paxts
